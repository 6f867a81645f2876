//! Oriented trivalent foliation graphs with a circle-valued height.
//!
//! Every vertex is either a MERGE (two incoming strands become one) or a
//! SPLIT (one becomes two) and sits at a rational angle in `[0, 1)` measured
//! in turns. An edge runs upward from its tail to its head, wrapping around
//! the circle `winding` extra times. A graph with no vertices at all is a
//! [`Shape::FreeCircle`] covering the circle `winding` times.

mod builtin;
mod calabi;
mod iso;

use std::collections::VecDeque;
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Zero};
use thiserror::Error;

pub use builtin::{builtin, parse_builtin_name, Builtin};
pub use calabi::{strongly_connected_components, CalabiCertificate, PositivePath};
pub use iso::isomorphic;

/// Angle in turns.
pub type Angle = Rational64;

/// Reduces an angle into `[0, 1)`.
pub fn turn(a: Angle) -> Angle {
    a - a.floor()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexKind {
    Merge,
    Split,
}

impl VertexKind {
    pub fn in_slots(self) -> &'static [InSlot] {
        match self {
            VertexKind::Merge => &[InSlot::In0, InSlot::In1],
            VertexKind::Split => &[InSlot::In0],
        }
    }

    pub fn out_slots(self) -> &'static [OutSlot] {
        match self {
            VertexKind::Merge => &[OutSlot::Out0],
            VertexKind::Split => &[OutSlot::Out0, OutSlot::Out1],
        }
    }
}

impl fmt::Display for VertexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VertexKind::Merge => "MERGE",
            VertexKind::Split => "SPLIT",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InSlot {
    In0,
    In1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OutSlot {
    Out0,
    Out1,
}

impl InSlot {
    pub fn index(self) -> usize {
        self as usize
    }
}

impl OutSlot {
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for InSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "in{}", self.index())
    }
}

impl fmt::Display for OutSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "out{}", self.index())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Port<S> {
    pub vertex: usize,
    pub slot: S,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: String,
    pub kind: VertexKind,
    pub angle: Angle,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub tail: Port<OutSlot>,
    pub head: Port<InSlot>,
    pub winding: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Shape {
    /// No critical points: the circle map is a `winding`-fold covering.
    FreeCircle { winding: u32 },
    Trivalent {
        vertices: Vec<Vertex>,
        edges: Vec<Edge>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoliationGraph {
    pub name: String,
    pub shape: Shape,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("angle {0} is a vertex angle, not a regular level")]
    SingularLevel(Angle),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("graph has no vertices")]
    NoVertices,
}

/// One failed well-formedness rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateVertexId(String),
    DuplicateEdgeId(String),
    AngleOutOfRange {
        vertex: String,
    },
    DanglingEndpoint {
        edge: String,
    },
    SlotNotOnKind {
        edge: String,
        vertex: String,
        slot: String,
    },
    SlotReused {
        vertex: String,
        slot: String,
    },
    SlotUnused {
        vertex: String,
        slot: String,
    },
    DuplicateAngle {
        first: String,
        second: String,
    },
    KindImbalance {
        merges: usize,
        splits: usize,
    },
    EdgeCount {
        edges: usize,
        vertices: usize,
    },
    NonPositiveArc {
        edge: String,
    },
    Disconnected,
    NoVertices,
    ZeroWinding,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateVertexId(v) => write!(f, "duplicate vertex id `{v}`"),
            Violation::DuplicateEdgeId(e) => write!(f, "duplicate edge id `{e}`"),
            Violation::AngleOutOfRange { vertex } => {
                write!(f, "vertex `{vertex}`: angle must lie in [0, 1) turns")
            }
            Violation::DanglingEndpoint { edge } => {
                write!(f, "edge `{edge}` references a missing vertex")
            }
            Violation::SlotNotOnKind { edge, vertex, slot } => {
                write!(f, "edge `{edge}`: vertex `{vertex}` has no slot {slot}")
            }
            Violation::SlotReused { vertex, slot } => write!(f, "slot reused: `{vertex}.{slot}`"),
            Violation::SlotUnused { vertex, slot } => write!(f, "slot unused: `{vertex}.{slot}`"),
            Violation::DuplicateAngle { first, second } => write!(
                f,
                "vertices `{first}` and `{second}` share an angle; critical values must be distinct"
            ),
            Violation::KindImbalance { merges, splits } => {
                write!(f, "#MERGE = {merges} differs from #SPLIT = {splits}")
            }
            Violation::EdgeCount { edges, vertices } => {
                write!(
                    f,
                    "2*#edges = {} differs from 3*#vertices = {}",
                    2 * edges,
                    3 * vertices
                )
            }
            Violation::NonPositiveArc { edge } => {
                write!(
                    f,
                    "edge `{edge}` has zero arc length (a loop needs winding >= 1)"
                )
            }
            Violation::Disconnected => write!(f, "underlying graph is disconnected"),
            Violation::NoVertices => write!(f, "trivalent graph has no vertices; use freecircle"),
            Violation::ZeroWinding => write!(f, "free circle needs winding >= 1"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl FoliationGraph {
    pub fn free_circle(name: impl Into<String>, winding: u32) -> Self {
        FoliationGraph {
            name: name.into(),
            shape: Shape::FreeCircle { winding },
        }
    }

    pub fn trivalent(name: impl Into<String>, vertices: Vec<Vertex>, edges: Vec<Edge>) -> Self {
        FoliationGraph {
            name: name.into(),
            shape: Shape::Trivalent { vertices, edges },
        }
    }

    pub fn vertices(&self) -> &[Vertex] {
        match &self.shape {
            Shape::FreeCircle { .. } => &[],
            Shape::Trivalent { vertices, .. } => vertices,
        }
    }

    pub fn edges(&self) -> &[Edge] {
        match &self.shape {
            Shape::FreeCircle { .. } => &[],
            Shape::Trivalent { edges, .. } => edges,
        }
    }

    pub fn is_free_circle(&self) -> bool {
        matches!(self.shape, Shape::FreeCircle { .. })
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices().iter().position(|v| v.id == id)
    }

    pub fn count_kind(&self, kind: VertexKind) -> usize {
        self.vertices().iter().filter(|v| v.kind == kind).count()
    }

    pub fn merge_count(&self) -> usize {
        self.count_kind(VertexKind::Merge)
    }

    pub fn split_count(&self) -> usize {
        self.count_kind(VertexKind::Split)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut out = Vec::new();
        let (vertices, edges) = match &self.shape {
            Shape::FreeCircle { winding } => {
                if *winding == 0 {
                    out.push(Violation::ZeroWinding);
                }
                return ValidationReport { violations: out };
            }
            Shape::Trivalent { vertices, edges } => (vertices, edges),
        };
        if vertices.is_empty() {
            out.push(Violation::NoVertices);
        }
        for (i, v) in vertices.iter().enumerate() {
            if vertices[..i].iter().any(|w| w.id == v.id) {
                out.push(Violation::DuplicateVertexId(v.id.clone()));
            }
            if v.angle < Angle::zero() || v.angle >= Angle::one() {
                out.push(Violation::AngleOutOfRange {
                    vertex: v.id.clone(),
                });
            }
            if let Some(w) = vertices[..i].iter().find(|w| w.angle == v.angle) {
                out.push(Violation::DuplicateAngle {
                    first: w.id.clone(),
                    second: v.id.clone(),
                });
            }
        }
        for (i, e) in edges.iter().enumerate() {
            if edges[..i].iter().any(|f| f.id == e.id) {
                out.push(Violation::DuplicateEdgeId(e.id.clone()));
            }
        }

        // Slot discipline.
        let mut in_use = vec![[0usize; 2]; vertices.len()];
        let mut out_use = vec![[0usize; 2]; vertices.len()];
        let mut dangling = false;
        for e in edges {
            let (Some(t), Some(h)) = (vertices.get(e.tail.vertex), vertices.get(e.head.vertex))
            else {
                out.push(Violation::DanglingEndpoint { edge: e.id.clone() });
                dangling = true;
                continue;
            };
            if t.kind.out_slots().contains(&e.tail.slot) {
                out_use[e.tail.vertex][e.tail.slot.index()] += 1;
            } else {
                out.push(Violation::SlotNotOnKind {
                    edge: e.id.clone(),
                    vertex: t.id.clone(),
                    slot: e.tail.slot.to_string(),
                });
            }
            if h.kind.in_slots().contains(&e.head.slot) {
                in_use[e.head.vertex][e.head.slot.index()] += 1;
            } else {
                out.push(Violation::SlotNotOnKind {
                    edge: e.id.clone(),
                    vertex: h.id.clone(),
                    slot: e.head.slot.to_string(),
                });
            }
        }
        for (i, v) in vertices.iter().enumerate() {
            let slots = v
                .kind
                .in_slots()
                .iter()
                .map(|s| (s.to_string(), in_use[i][s.index()]))
                .chain(
                    v.kind
                        .out_slots()
                        .iter()
                        .map(|s| (s.to_string(), out_use[i][s.index()])),
                );
            for (slot, uses) in slots {
                if uses > 1 {
                    out.push(Violation::SlotReused {
                        vertex: v.id.clone(),
                        slot,
                    });
                } else if uses == 0 {
                    out.push(Violation::SlotUnused {
                        vertex: v.id.clone(),
                        slot,
                    });
                }
            }
        }

        let merges = self.merge_count();
        let splits = self.split_count();
        if merges != splits {
            out.push(Violation::KindImbalance { merges, splits });
        }
        if 2 * edges.len() != 3 * vertices.len() {
            out.push(Violation::EdgeCount {
                edges: edges.len(),
                vertices: vertices.len(),
            });
        }
        if !dangling {
            for e in edges {
                if self.arc_length(e).is_zero() {
                    out.push(Violation::NonPositiveArc { edge: e.id.clone() });
                }
            }
            if !vertices.is_empty() && !self.is_connected() {
                out.push(Violation::Disconnected);
            }
        }
        ValidationReport { violations: out }
    }

    /// Length in turns of the upward path from tail to head.
    pub fn arc_length(&self, e: &Edge) -> Angle {
        let v = self.vertices();
        turn(v[e.head.vertex].angle - v[e.tail.vertex].angle)
            + Angle::from_integer(e.winding.into())
    }

    /// Connectivity of the underlying undirected graph.
    pub fn is_connected(&self) -> bool {
        let n = self.vertices().len();
        if n == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); n];
        for e in self.edges() {
            adj[e.tail.vertex].push(e.head.vertex);
            adj[e.head.vertex].push(e.tail.vertex);
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// True when `a` (reduced mod 1) coincides with no vertex angle.
    pub fn is_regular(&self, a: Angle) -> bool {
        let a = turn(a);
        self.vertices().iter().all(|v| v.angle != a)
    }

    /// Number of times edge `e` crosses the level `a`. The level must be regular.
    pub fn edge_crossings(&self, e: &Edge, a: Angle) -> u32 {
        let v = self.vertices();
        let tail = v[e.tail.vertex].angle;
        let span = turn(v[e.head.vertex].angle - tail);
        let offset = turn(a - tail);
        let inside = offset > Angle::zero() && offset < span;
        e.winding + u32::from(inside)
    }

    /// Cardinality of the fiber of the circle map over the regular level `a`.
    pub fn crossing_count(&self, a: Angle) -> Result<u32, GraphError> {
        match &self.shape {
            Shape::FreeCircle { winding } => Ok(*winding),
            Shape::Trivalent { edges, .. } => {
                if !self.is_regular(a) {
                    return Err(GraphError::SingularLevel(turn(a)));
                }
                Ok(edges.iter().map(|e| self.edge_crossings(e, a)).sum())
            }
        }
    }

    /// One regular sample per circular gap between consecutive vertex angles,
    /// in increasing order of the sample.
    pub fn regular_samples(&self) -> Vec<Angle> {
        let mut angles: Vec<Angle> = self.vertices().iter().map(|v| v.angle).collect();
        angles.sort();
        angles.dedup();
        let n = angles.len();
        if n == 0 {
            return vec![Angle::zero()];
        }
        let two = Angle::from_integer(2);
        let mut samples: Vec<Angle> = (0..n)
            .map(|i| {
                let lo = angles[i];
                let hi = if i + 1 < n {
                    angles[i + 1]
                } else {
                    angles[0] + Angle::one()
                };
                turn((lo + hi) / two)
            })
            .collect();
        samples.sort();
        samples
    }

    /// Smallest fiber cardinality over regular levels, with the smallest
    /// sample level attaining it.
    pub fn complexity(&self) -> (u32, Angle) {
        if let Shape::FreeCircle { winding } = self.shape {
            return (winding, Angle::zero());
        }
        self.regular_samples()
            .into_iter()
            .map(|a| (self.crossing_count(a).expect("samples are regular"), a))
            .min()
            .expect("at least one sample")
    }

    /// Euler characteristic and genus of the surface carrying this graph.
    pub fn euler_genus(&self) -> (i64, u32) {
        if self.is_free_circle() {
            return (0, 1);
        }
        let v = self.vertices().len();
        let genus = (v as u32 + 2) / 2;
        debug_assert_eq!(
            i64::from(genus),
            self.first_betti(),
            "genus must equal b1 of the graph"
        );
        (-(v as i64), genus)
    }

    /// `#edges - #vertices + 1` (a free circle has b1 = 1).
    pub fn first_betti(&self) -> i64 {
        if self.is_free_circle() {
            return 1;
        }
        self.edges().len() as i64 - self.vertices().len() as i64 + 1
    }

    /// Out-edges of each vertex ordered by slot.
    pub(crate) fn out_edges(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<(OutSlot, usize)>> = vec![Vec::new(); self.vertices().len()];
        for (i, e) in self.edges().iter().enumerate() {
            out[e.tail.vertex].push((e.tail.slot, i));
        }
        out.into_iter()
            .map(|mut v| {
                v.sort();
                v.into_iter().map(|(_, i)| i).collect()
            })
            .collect()
    }
}

/// Critical-point counts agree, so the two forms are contiguous.
///
/// Class preservation is not re-derived here: the reduction only edits the
/// interior of a cut and leaves the regluing untouched.
pub fn contiguous(g1: &FoliationGraph, g2: &FoliationGraph) -> bool {
    g1.merge_count() == g2.merge_count() && g1.split_count() == g2.split_count()
}
