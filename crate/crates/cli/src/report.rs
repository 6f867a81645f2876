use std::path::Path;
use std::process::ExitCode;
use std::thread;

/// Result of one command on one input: an exit status, prose for people and
/// key=value records for scripts.
#[derive(Debug, Default)]
pub struct Outcome {
    pub code: u8,
    pub text: Vec<String>,
    pub records: Vec<(String, String)>,
    /// Goes to stderr in both modes.
    pub errors: Vec<String>,
}

impl Outcome {
    pub fn ok() -> Self {
        Outcome::default()
    }

    pub fn failed(message: impl Into<String>) -> Self {
        let message = message.into();
        Outcome {
            code: 2,
            records: vec![(
                "error".into(),
                message.lines().next().unwrap_or("").to_string(),
            )],
            errors: vec![message],
            ..Outcome::default()
        }
    }

    pub fn line(&mut self, s: impl Into<String>) -> &mut Self {
        self.text.push(s.into());
        self
    }

    pub fn record(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.records.push((key.into(), value.to_string()));
        self
    }

    pub fn render(&self, machine: bool) -> String {
        let mut out = String::new();
        if machine {
            for (k, v) in &self.records {
                out.push_str(&format!("{k}={v}\n"));
            }
        } else {
            for l in &self.text {
                out.push_str(l);
                out.push('\n');
            }
        }
        out
    }

    pub fn emit(&self, machine: bool) -> ExitCode {
        print!("{}", self.render(machine));
        for e in &self.errors {
            eprintln!("{e}");
        }
        ExitCode::from(self.code)
    }
}

/// Runs `f` on every regular file in `dir` on its own thread. A panic in
/// one file is reported as an error for that file only. The exit status is
/// the worst of the per-file statuses.
pub fn batch<F>(dir: &Path, machine: bool, f: F) -> ExitCode
where
    F: Fn(&str) -> Outcome + Sync,
{
    let entries = match std::fs::read_dir(dir) {
        Ok(rd) => rd,
        Err(e) => return Outcome::failed(format!("{}: {e}", dir.display())).emit(machine),
    };
    let mut files: Vec<String> = entries
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_ok_and(|t| t.is_file()))
        .map(|e| e.path().to_string_lossy().into_owned())
        .collect();
    files.sort();
    let outcomes: Vec<Outcome> = thread::scope(|s| {
        let handles: Vec<_> = files.iter().map(|p| s.spawn(|| f(p))).collect();
        handles
            .into_iter()
            .zip(&files)
            .map(|(h, p)| {
                h.join()
                    .unwrap_or_else(|_| Outcome::failed(format!("{p}: internal error")))
            })
            .collect()
    });
    let mut worst = 0;
    for (p, o) in files.iter().zip(&outcomes) {
        if machine {
            println!("file={p}");
        } else {
            println!("== {p}");
        }
        print!("{}", o.render(machine));
        for e in &o.errors {
            eprintln!("{e}");
        }
        worst = worst.max(o.code);
    }
    ExitCode::from(worst)
}
