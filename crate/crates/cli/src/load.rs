use calabi_core::graph::{builtin, parse_builtin_name, FoliationGraph};
use calabi_core::io::{self, Document};
use calabi_core::surface::{surface_example, SurfaceModel};

/// Resolves `builtin:`, `example:` or a file path. Errors are ready to print.
pub fn document(src: &str) -> Result<Document, String> {
    if let Some(name) = src.strip_prefix("builtin:") {
        return parse_builtin_name(name)
            .map(|b| Document::Graph(builtin(b)))
            .ok_or_else(|| {
                format!("unknown builtin `{name}` (known: theta, dumbbell, free-circle(<w>))")
            });
    }
    if let Some(n) = src.strip_prefix("example:") {
        let n: u32 = n
            .parse()
            .map_err(|_| format!("`{n}` is not an example number"))?;
        return surface_example(n)
            .map(Document::Surface)
            .map_err(|e| e.to_string());
    }
    let bytes = std::fs::read(src).map_err(|e| format!("{src}: {e}"))?;
    io::parse(&bytes).map_err(|e| {
        e.diagnostics
            .iter()
            .map(|d| format!("{src}:{d}"))
            .collect::<Vec<_>>()
            .join("\n")
    })
}

pub fn graph(src: &str) -> Result<FoliationGraph, String> {
    match document(src)? {
        Document::Graph(g) => {
            let report = g.validate();
            if report.is_ok() {
                Ok(g)
            } else {
                let lines: Vec<String> = report
                    .violations
                    .iter()
                    .map(|v| format!("{src}: {v}"))
                    .collect();
                Err(lines.join("\n"))
            }
        }
        Document::Surface(_) => Err(format!("{src}: expected a graph, found a surface model")),
    }
}

pub fn surface(src: &str) -> Result<SurfaceModel, String> {
    match document(src)? {
        Document::Surface(m) => Ok(m),
        Document::Graph(_) => Err(format!("{src}: expected a surface model, found a graph")),
    }
}
