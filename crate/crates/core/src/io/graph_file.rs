use std::collections::HashMap;
use std::fmt::Write;

use num_traits::ToPrimitive;

use super::{lex, unexpected, Cursor, Diagnostic, DiagnosticKind, ParseError, Pos};
use crate::graph::{
    Angle, Edge, FoliationGraph, InSlot, OutSlot, Port, Shape, Vertex, VertexKind, Violation,
};
use crate::scalar::parse_rational;

/// Parses a graph file and validates the result.
///
/// ```text
/// graph theta
///   vertex s SPLIT 1/4
///   vertex m MERGE 3/4
///   edge e1 s.out0 -> m.in0 winding 0
///   ...
/// end
/// ```
/// or `graph <name> freecircle <w> end`.
pub fn parse_graph(text: &str) -> Result<FoliationGraph, ParseError> {
    let lines = lex(text)?;
    let mut cur = Cursor::new(&lines);
    if cur.peek().is_none() {
        return Err(ParseError::one(Diagnostic::new(
            cur.pos(),
            DiagnosticKind::Syntactic,
            "empty input: expected `graph`",
        )));
    }
    let header = cur.keyword("graph")?.pos;
    let name = cur.identifier("a graph name")?.text.to_string();

    if cur.peek().is_some_and(|t| t.text == "freecircle") {
        cur.next_token("`freecircle`")?;
        let w = cur.next_token("a winding")?;
        let winding: u32 = w
            .text
            .parse()
            .map_err(|_| unexpected(w, "a natural number"))?;
        cur.keyword("end")?;
        expect_eof(&cur)?;
        let g = FoliationGraph::free_circle(name, winding);
        return check(g, header, &Positions::default());
    }

    let mut vertices = Vec::new();
    let mut pending = Vec::new();
    let mut at = Positions::default();
    loop {
        let t = cur.next_token("`vertex`, `edge` or `end`")?;
        match t.text {
            "vertex" => {
                let id = cur.identifier("a vertex id")?;
                let k = cur.next_token("MERGE or SPLIT")?;
                let kind = match k.text {
                    "MERGE" => VertexKind::Merge,
                    "SPLIT" => VertexKind::Split,
                    _ => return Err(unexpected(k, "MERGE or SPLIT")),
                };
                let a = cur.next_token("an angle")?;
                let angle = parse_angle(a.text)
                    .ok_or_else(|| unexpected(a, "a rational angle such as 3/4"))?;
                at.vertices.insert(id.text.to_string(), t.pos);
                vertices.push(Vertex {
                    id: id.text.to_string(),
                    kind,
                    angle,
                });
            }
            "edge" => {
                let id = cur.identifier("an edge id")?;
                let tail = cur.next_token("a port such as v.out0")?;
                let (tv, ts) = split_port(tail.text)
                    .ok_or_else(|| unexpected(tail, "a port such as v.out0"))?;
                let ts = match ts {
                    "out0" => OutSlot::Out0,
                    "out1" => OutSlot::Out1,
                    _ => return Err(unexpected(tail, "an outgoing port (out0 or out1)")),
                };
                cur.keyword("->")?;
                let head = cur.next_token("a port such as v.in0")?;
                let (hv, hs) = split_port(head.text)
                    .ok_or_else(|| unexpected(head, "a port such as v.in0"))?;
                let hs = match hs {
                    "in0" => InSlot::In0,
                    "in1" => InSlot::In1,
                    _ => return Err(unexpected(head, "an incoming port (in0 or in1)")),
                };
                cur.keyword("winding")?;
                let w = cur.next_token("a winding")?;
                let winding: u32 = w
                    .text
                    .parse()
                    .map_err(|_| unexpected(w, "a natural number"))?;
                at.edges.insert(id.text.to_string(), t.pos);
                pending.push((
                    id.text.to_string(),
                    (tv, tail.pos),
                    ts,
                    (hv, head.pos),
                    hs,
                    winding,
                ));
            }
            "end" => break,
            _ => return Err(unexpected(t, "`vertex`, `edge` or `end`")),
        }
    }
    expect_eof(&cur)?;

    // Resolve endpoints against the first vertex carrying each id.
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, v) in vertices.iter().enumerate() {
        index.entry(v.id.as_str()).or_insert(i);
    }
    let mut diagnostics = Vec::new();
    let mut edges = Vec::new();
    for (id, (tv, tpos), ts, (hv, hpos), hs, winding) in pending {
        let (Some(&t), Some(&h)) = (index.get(tv), index.get(hv)) else {
            for (v, pos) in [(tv, tpos), (hv, hpos)] {
                if !index.contains_key(v) {
                    diagnostics.push(Diagnostic::new(
                        pos,
                        DiagnosticKind::Semantic,
                        format!("edge `{id}` references undeclared vertex `{v}`"),
                    ));
                }
            }
            continue;
        };
        edges.push(Edge {
            id,
            tail: Port {
                vertex: t,
                slot: ts,
            },
            head: Port {
                vertex: h,
                slot: hs,
            },
            winding,
        });
    }
    if !diagnostics.is_empty() {
        return Err(ParseError { diagnostics });
    }
    check(
        FoliationGraph::trivalent(name, vertices, edges),
        header,
        &at,
    )
}

#[derive(Default)]
struct Positions {
    vertices: HashMap<String, Pos>,
    edges: HashMap<String, Pos>,
}

fn check(g: FoliationGraph, header: Pos, at: &Positions) -> Result<FoliationGraph, ParseError> {
    let report = g.validate();
    if report.is_ok() {
        return Ok(g);
    }
    let vertex = |v: &str| at.vertices.get(v).copied().unwrap_or(header);
    let edge = |e: &str| at.edges.get(e).copied().unwrap_or(header);
    let mut diagnostics: Vec<Diagnostic> = report
        .violations
        .iter()
        .map(|v| {
            let pos = match v {
                Violation::DuplicateVertexId(id) | Violation::AngleOutOfRange { vertex: id } => {
                    vertex(id)
                }
                Violation::DuplicateAngle { second, .. } => vertex(second),
                Violation::SlotReused { vertex: id, .. }
                | Violation::SlotUnused { vertex: id, .. } => vertex(id),
                Violation::DuplicateEdgeId(id)
                | Violation::DanglingEndpoint { edge: id }
                | Violation::SlotNotOnKind { edge: id, .. }
                | Violation::NonPositiveArc { edge: id } => edge(id),
                _ => header,
            };
            Diagnostic::new(pos, DiagnosticKind::Semantic, v.to_string())
        })
        .collect();
    diagnostics.sort_by_key(|d| (d.line, d.column));
    Err(ParseError { diagnostics })
}

fn expect_eof(cur: &Cursor<'_, '_>) -> Result<(), ParseError> {
    match cur.peek() {
        Some(t) => Err(unexpected(t, "end of input after `end`")),
        None => Ok(()),
    }
}

fn split_port(text: &str) -> Option<(&str, &str)> {
    let (v, s) = text.rsplit_once('.')?;
    super::is_identifier(v).then_some((v, s))
}

fn parse_angle(text: &str) -> Option<Angle> {
    let q = parse_rational(text).ok()?;
    Some(Angle::new(q.numer().to_i64()?, q.denom().to_i64()?))
}

/// Canonical text for `g`; [`parse_graph`] reads it back unchanged.
pub fn serialize_graph(g: &FoliationGraph) -> String {
    let mut out = String::new();
    match &g.shape {
        Shape::FreeCircle { winding } => {
            writeln!(out, "graph {} freecircle {winding} end", g.name).unwrap();
        }
        Shape::Trivalent { vertices, edges } => {
            writeln!(out, "graph {}", g.name).unwrap();
            for v in vertices {
                writeln!(out, "  vertex {} {} {}", v.id, v.kind, v.angle).unwrap();
            }
            for e in edges {
                writeln!(
                    out,
                    "  edge {} {}.{} -> {}.{} winding {}",
                    e.id,
                    vertices[e.tail.vertex].id,
                    e.tail.slot,
                    vertices[e.head.vertex].id,
                    e.head.slot,
                    e.winding
                )
                .unwrap();
            }
            out.push_str("end\n");
        }
    }
    out
}
