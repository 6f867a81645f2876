use std::fmt::Write;

use crate::graph::{FoliationGraph, Shape};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz text for `g`. Nodes and edges are emitted in id order so the
/// output depends only on the graph, not on declaration order.
pub fn to_dot(g: &FoliationGraph) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(&g.name)).unwrap();
    match &g.shape {
        Shape::FreeCircle { winding } => {
            writeln!(out, "  \"circle\" [label=\"CIRCLE\"];").unwrap();
            writeln!(out, "  \"circle\" -> \"circle\" [label=\"w={winding}\"];").unwrap();
        }
        Shape::Trivalent { vertices, edges } => {
            let mut vs: Vec<_> = vertices.iter().collect();
            vs.sort_by(|a, b| a.id.cmp(&b.id));
            for v in vs {
                writeln!(
                    out,
                    "  {} [label=\"{}@{}\"];",
                    quote(&v.id),
                    v.kind,
                    v.angle
                )
                .unwrap();
            }
            let mut es: Vec<_> = edges.iter().collect();
            es.sort_by(|a, b| a.id.cmp(&b.id));
            for e in es {
                writeln!(
                    out,
                    "  {} -> {} [label=\"w={}\"];",
                    quote(&vertices[e.tail.vertex].id),
                    quote(&vertices[e.head.vertex].id),
                    e.winding
                )
                .unwrap();
            }
        }
    }
    out.push_str("}\n");
    out
}
