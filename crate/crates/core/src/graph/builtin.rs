use super::{Angle, Edge, FoliationGraph, InSlot, OutSlot, Port, Vertex, VertexKind};

/// Named graphs shipped with the library.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    /// Strongly connected: one SPLIT feeding one MERGE twice, closed by a
    /// single return edge. Complexity 1.
    Theta,
    /// Not strongly connected: a SPLIT and a MERGE each carrying a loop,
    /// joined by one edge. Complexity 2.
    Dumbbell,
    /// Vertex-free circle mapping with the given degree.
    FreeCircle(u32),
}

/// Parses `theta`, `dumbbell` or `free-circle(<w>)`.
pub fn parse_builtin_name(name: &str) -> Option<Builtin> {
    match name {
        "theta" => Some(Builtin::Theta),
        "dumbbell" => Some(Builtin::Dumbbell),
        _ => {
            let w = name.strip_prefix("free-circle(")?.strip_suffix(')')?;
            w.parse().ok().filter(|&w| w >= 1).map(Builtin::FreeCircle)
        }
    }
}

fn vertex(id: &str, kind: VertexKind, angle: Angle) -> Vertex {
    Vertex {
        id: id.into(),
        kind,
        angle,
    }
}

fn edge(id: &str, tail: (usize, OutSlot), head: (usize, InSlot), winding: u32) -> Edge {
    Edge {
        id: id.into(),
        tail: Port {
            vertex: tail.0,
            slot: tail.1,
        },
        head: Port {
            vertex: head.0,
            slot: head.1,
        },
        winding,
    }
}

pub fn builtin(which: Builtin) -> FoliationGraph {
    use InSlot::*;
    use OutSlot::*;
    let quarter = Angle::new(1, 4);
    let three_quarters = Angle::new(3, 4);
    match which {
        Builtin::Theta => FoliationGraph::trivalent(
            "theta",
            vec![
                vertex("s", VertexKind::Split, quarter),
                vertex("m", VertexKind::Merge, three_quarters),
            ],
            vec![
                edge("e1", (0, Out0), (1, In0), 0),
                edge("e2", (0, Out1), (1, In1), 0),
                edge("e0", (1, Out0), (0, In0), 0),
            ],
        ),
        Builtin::Dumbbell => FoliationGraph::trivalent(
            "dumbbell",
            vec![
                vertex("s", VertexKind::Split, quarter),
                vertex("m", VertexKind::Merge, three_quarters),
            ],
            vec![
                edge("e1", (0, Out0), (1, In0), 0),
                edge("e2", (0, Out1), (0, In0), 1),
                edge("e3", (1, Out0), (1, In1), 1),
            ],
        ),
        Builtin::FreeCircle(w) => FoliationGraph::free_circle(format!("free-circle-{w}"), w),
    }
}
