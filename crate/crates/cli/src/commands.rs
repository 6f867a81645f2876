use std::fs;
use std::path::{Path, PathBuf};

use calabi_core::graph::{CalabiCertificate, FoliationGraph};
use calabi_core::io::{serialize_graph, serialize_surface, to_dot, Document};
use calabi_core::reduction::{contiguous, harmonize as reduce, ReductionTrace};
use calabi_core::surface::surface_example;

use crate::load;
use crate::report::Outcome;

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn describe(g: &FoliationGraph, o: &mut Outcome) {
    let (chi, genus) = g.euler_genus();
    o.record("name", &g.name)
        .record("vertices", g.vertices().len())
        .record("edges", g.edges().len())
        .record("merges", g.merge_count())
        .record("splits", g.split_count())
        .record("euler", chi)
        .record("genus", genus);
}

pub fn validate(src: &str) -> Outcome {
    let mut o = Outcome::ok();
    match load::document(src) {
        Err(e) => Outcome::failed(e),
        Ok(Document::Graph(g)) => {
            let report = g.validate();
            if !report.is_ok() {
                let lines: Vec<String> = report
                    .violations
                    .iter()
                    .map(|v| format!("{src}: {v}"))
                    .collect();
                return Outcome::failed(lines.join("\n"));
            }
            o.record("valid", true).record("type", "graph");
            describe(&g, &mut o);
            o.line(format!(
                "{src}: valid graph `{}` ({} vertices, {} edges, genus {})",
                g.name,
                g.vertices().len(),
                g.edges().len(),
                g.euler_genus().1
            ));
            o
        }
        Ok(Document::Surface(m)) => {
            o.record("valid", true)
                .record("type", "surface")
                .record("name", m.name())
                .record("summands", m.summands().len())
                .record("genus", m.genus());
            o.line(format!(
                "{src}: valid surface `{}` ({} summands, genus {})",
                m.name(),
                m.summands().len(),
                m.genus()
            ));
            o
        }
    }
}

pub fn calabi(src: &str) -> Outcome {
    let g = match load::graph(src) {
        Ok(g) => g,
        Err(e) => return Outcome::failed(e),
    };
    let mut o = Outcome::ok();
    o.record("name", &g.name);
    if g.is_free_circle() {
        o.record("calabi", true);
        o.line(format!("{}: Calabi (free circle)", g.name));
        return o;
    }
    let vid = |i: usize| g.vertices()[i].id.as_str();
    let eid = |i: usize| g.edges()[i].id.as_str();
    match g.is_calabi() {
        CalabiCertificate::Calabi { cycles } => {
            o.record("calabi", true).record("cycles", cycles.len());
            o.line(format!(
                "{}: Calabi; every edge lies on a positive cycle",
                g.name
            ));
            for (k, c) in cycles.iter().enumerate() {
                let ids: Vec<&str> = c.iter().map(|&e| eid(e)).collect();
                o.record(format!("cycle.{}", k + 1), ids.join(","));
                o.line(format!("  cycle {}: {}", k + 1, ids.join(" ")));
            }
        }
        CalabiCertificate::NotCalabi {
            source,
            target,
            out_set,
        } => {
            o.code = 1;
            let closed: Vec<&str> = out_set.iter().map(|&v| vid(v)).collect();
            o.record("calabi", false)
                .record("obstruction.source", vid(source))
                .record("obstruction.target", vid(target))
                .record("obstruction.closed_set", closed.join(","));
            o.line(format!("{}: not Calabi", g.name));
            o.line(format!(
                "  obstruction: no positive path from `{}` to `{}`; no edge leaves {{{}}}",
                vid(source),
                vid(target),
                closed.join(", ")
            ));
        }
    }
    o
}

pub fn complexity(src: &str) -> Outcome {
    let g = match load::graph(src) {
        Ok(g) => g,
        Err(e) => return Outcome::failed(e),
    };
    let (c, level) = g.complexity();
    let mut o = Outcome::ok();
    o.record("name", &g.name)
        .record("complexity", c)
        .record("level", level);
    o.line(format!(
        "{}: complexity {c} (attained at level {level})",
        g.name
    ));
    o
}

pub struct HarmonizeOptions {
    pub trace: bool,
    pub dot_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// In batch mode `out` and `dot_dir` are directories keyed by file stem.
    pub batch: bool,
}

fn stem(src: &str) -> String {
    Path::new(src)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| src.replace([':', '/', '(', ')'], "-"))
}

fn write_dots(
    dir: &Path,
    prefix: &str,
    start: &FoliationGraph,
    trace: &ReductionTrace,
) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    // Rebuild the intermediate graphs from the recorded steps.
    let mut current = start.clone();
    for (k, _) in trace.steps.iter().enumerate() {
        let (next, _) =
            calabi_core::reduction::reduce_once(&current).expect("replaying a recorded step");
        fs::write(
            dir.join(format!("{prefix}step{}-before.dot", k + 1)),
            to_dot(&current),
        )?;
        fs::write(
            dir.join(format!("{prefix}step{}-after.dot", k + 1)),
            to_dot(&next),
        )?;
        current = next;
    }
    Ok(())
}

pub fn harmonize(src: &str, opts: &HarmonizeOptions) -> Outcome {
    let g = match load::graph(src) {
        Ok(g) => g,
        Err(e) => return Outcome::failed(e),
    };
    let mut o = Outcome::ok();
    o.record("name", &g.name)
        .record("complexity.before", g.complexity().0);
    let (h, trace) = match reduce(&g) {
        Ok(r) => r,
        Err(stuck) => {
            o.code = 1;
            o.record("stuck", true).record("cause", &stuck.cause);
            if opts.trace {
                o.text
                    .extend(stuck.trace.to_string().lines().map(String::from));
            }
            o.line(format!("{}: reduction stuck: {}", g.name, stuck.cause));
            o.errors.push(format!("{src}: {stuck}"));
            return o;
        }
    };
    o.record("steps", trace.steps.len())
        .record("complexity.after", h.complexity().0)
        .record("calabi", h.is_calabi().verdict())
        .record("contiguous", contiguous(&g, &h));
    for (k, s) in trace.steps.iter().enumerate() {
        let key = format!("step.{}", k + 1);
        o.record(format!("{key}.cut"), s.cut_angle)
            .record(
                format!("{key}.complexity"),
                format!("{}->{}", s.complexity_before, s.complexity_after),
            )
            .record(format!("{key}.rewrites"), s.rewrites)
            .record(format!("{key}.partial"), s.blocked.is_some());
    }
    if opts.trace {
        o.text.extend(trace.to_string().lines().map(String::from));
    }
    o.line(format!(
        "{}: Calabi after {} step(s); complexity {} -> {}",
        g.name,
        trace.steps.len(),
        g.complexity().0,
        h.complexity().0
    ));

    let prefix = if opts.batch {
        format!("{}-", stem(src))
    } else {
        String::new()
    };
    if let Some(dir) = &opts.dot_dir {
        if let Err(e) = write_dots(dir, &prefix, &g, &trace) {
            return Outcome::failed(format!("{}: {e}", dir.display()));
        }
        o.record("dot_dir", dir.display());
    }
    let text = serialize_graph(&h);
    match &opts.out {
        Some(path) => {
            let path = if opts.batch {
                if let Err(e) = fs::create_dir_all(path) {
                    return Outcome::failed(format!("{}: {e}", path.display()));
                }
                path.join(format!("{}.graph", stem(src)))
            } else {
                path.clone()
            };
            if let Err(e) = fs::write(&path, &text) {
                return Outcome::failed(format!("{}: {e}", path.display()));
            }
            o.record("out", path.display());
            o.line(format!("wrote {}", path.display()));
        }
        None if !opts.batch => {
            o.text.extend(text.lines().map(String::from));
        }
        None => {}
    }
    o
}

pub fn surface_classify(src: &str) -> Outcome {
    let m = match load::surface(src) {
        Ok(m) => m,
        Err(e) => return Outcome::failed(e),
    };
    let class = m.class_report();
    let leaves = m.classify_leaves();
    let calabi = m.calabi_status();
    let vanisher = m.cup_vanisher();
    let periods: Vec<String> = class.periods.iter().map(|p| p.to_string()).collect();
    let vanisher_text = vanisher.as_ref().map_or("none".to_string(), |v| {
        let v: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        v.join(",")
    });
    let mut o = Outcome::ok();
    o.record("name", m.name())
        .record("genus", class.genus)
        .record("periods", periods.join("; "))
        .record("rank", class.rank)
        .record("completely_irrational", class.completely_irrational)
        .record("split", class.split)
        .record("m1", class.m1)
        .record("calabi", calabi)
        .record("compact_regular_leaf", leaves.has_compact_regular_leaf)
        .record(
            "noncompact_regular_leaf",
            leaves.has_noncompact_regular_leaf,
        )
        .record(
            "all_regular_noncompact",
            leaves.all_regular_leaves_noncompact,
        )
        .record(
            "compact_singular_components",
            leaves.compact_singular_components,
        )
        .record("generic", leaves.generic)
        .record("cup_vanisher", &vanisher_text);
    o.line(format!("surface {} (genus {})", m.name(), class.genus));
    o.line(format!("  periods: {}", periods.join("; ")));
    o.line(format!(
        "  rank {} (completely irrational: {}, split: {})",
        class.rank,
        yes_no(class.completely_irrational),
        yes_no(class.split)
    ));
    o.line(format!("  index-1 critical points: {}", class.m1));
    o.line(format!("  Calabi: {}", yes_no(calabi)));
    o.line(format!(
        "  compact regular leaves: {}; non-compact regular leaves: {}",
        yes_no(leaves.has_compact_regular_leaf),
        yes_no(leaves.has_noncompact_regular_leaf)
    ));
    o.line(format!(
        "  compact singular leaf components: {}; generic: {}",
        leaves.compact_singular_components,
        yes_no(leaves.generic)
    ));
    o.line(format!(
        "  integral class with vanishing cup product: {vanisher_text}"
    ));
    o
}

pub fn surface_check(src: &str) -> Outcome {
    let m = match load::surface(src) {
        Ok(m) => m,
        Err(e) => return Outcome::failed(e),
    };
    let report = m.consistency_check();
    let mut o = Outcome::ok();
    o.record("name", m.name());
    o.line(format!("surface {}", m.name()));
    for c in &report.checks {
        let status = match (c.premise, c.holds) {
            (_, false) => "VIOLATED",
            (true, true) => "holds",
            (false, true) => "vacuous",
        };
        o.record(c.code, status);
        o.line(format!("  {} {:<8} {}", c.code, status, c.statement));
    }
    o.record("passed", report.passed());
    if !report.passed() {
        o.code = 1;
    }
    o
}

pub fn example(n: u32, out: Option<&Path>) -> Outcome {
    let m = match surface_example(n) {
        Ok(m) => m,
        Err(e) => return Outcome::failed(e.to_string()),
    };
    let text = serialize_surface(&m);
    let mut o = Outcome::ok();
    o.record("name", m.name()).record("genus", m.genus());
    match out {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                return Outcome::failed(format!("{}: {e}", path.display()));
            }
            o.record("out", path.display());
            o.line(format!("wrote {}", path.display()));
        }
        None => {
            o.text.extend(text.lines().map(String::from));
        }
    }
    o
}

pub fn dot(src: &str, out: Option<&Path>) -> Outcome {
    let g = match load::graph(src) {
        Ok(g) => g,
        Err(e) => return Outcome::failed(e),
    };
    let text = to_dot(&g);
    let mut o = Outcome::ok();
    match out {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                return Outcome::failed(format!("{}: {e}", path.display()));
            }
            o.line(format!("wrote {}", path.display()));
        }
        None => {
            o.text.extend(text.lines().map(String::from));
        }
    }
    o
}
