//! `calabi`: decide the Calabi condition for foliation graphs, reduce them to
//! Calabi form, and check surface models.
//!
//! Exit status: 0 on success or a true predicate, 1 when the predicate is
//! false (or a check fails), 2 on parse or validation errors.

mod commands;
mod load;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use report::Outcome;

#[derive(Parser, Debug)]
#[command(
    name = "calabi",
    version,
    about = "Calabi (intrinsic harmonicity) checks for foliation graphs and surface models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Where the input comes from: `builtin:<name>`, `example:<n>` or a file.
#[derive(Args, Debug, Clone)]
struct Input {
    /// `builtin:theta`, `builtin:dumbbell`, `builtin:free-circle(<w>)`,
    /// `example:<1-4>`, or a path to a .graph/.surface file
    #[arg(required_unless_present = "batch")]
    input: Option<String>,

    /// Process every file in a directory, one report per file
    #[arg(long, value_name = "DIR", conflicts_with = "input")]
    batch: Option<PathBuf>,

    /// Print key=value lines instead of prose
    #[arg(long)]
    machine: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and check well-formedness
    Validate(Input),
    /// Decide the Calabi condition; exit 1 if it fails
    Calabi(Input),
    /// Minimal number of strands crossing a regular level
    Complexity(Input),
    /// Reduce to a Calabi graph with the same vertex counts
    Harmonize {
        #[command(flatten)]
        input: Input,
        /// Print one line per reduction step
        #[arg(long)]
        trace: bool,
        /// Write before/after DOT files for every step
        #[arg(long, value_name = "DIR")]
        dot_dir: Option<PathBuf>,
        /// Write the final graph here instead of standard output
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Leaf and cohomology-class report for a surface model
    SurfaceClassify(Input),
    /// Check the implications between surface invariants; exit 1 on a violation
    SurfaceCheck(Input),
    /// Print one of the four built-in surface examples as a surface file
    Example {
        /// Example number, 1 to 4
        n: u32,
        #[arg(long)]
        machine: bool,
        /// Write the surface file here instead of standard output
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Graphviz export of a graph
    Dot {
        input: String,
        /// Write here instead of standard output
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

fn run_input<F>(input: &Input, f: F) -> ExitCode
where
    F: Fn(&str) -> Outcome + Sync,
{
    match &input.batch {
        Some(dir) => report::batch(dir, input.machine, f),
        None => f(input.input.as_deref().expect("clap requires input")).emit(input.machine),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate(i) => run_input(&i, commands::validate),
        Command::Calabi(i) => run_input(&i, commands::calabi),
        Command::Complexity(i) => run_input(&i, commands::complexity),
        Command::SurfaceClassify(i) => run_input(&i, commands::surface_classify),
        Command::SurfaceCheck(i) => run_input(&i, commands::surface_check),
        Command::Harmonize {
            input,
            trace,
            dot_dir,
            out,
        } => {
            let opts = commands::HarmonizeOptions {
                trace,
                dot_dir,
                out,
                batch: input.batch.is_some(),
            };
            run_input(&input, |src| commands::harmonize(src, &opts))
        }
        Command::Example { n, machine, out } => commands::example(n, out.as_deref()).emit(machine),
        Command::Dot { input, out } => commands::dot(&input, out.as_deref()).emit(false),
    }
}
