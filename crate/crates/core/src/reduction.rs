//! Complexity reduction: cut a foliation graph open at a level of minimal
//! fiber size, move every MERGE below every SPLIT, and glue back.
//!
//! After reordering, the level separating the MERGE block from the SPLIT
//! block meets `|bottom| - #MERGE` strands, which is strictly less than the
//! complexity whenever the graph has vertices. Iterating until the graph is
//! Calabi gives a graph with the same MERGE/SPLIT counts.
//!
//! A full sort needs `|bottom| > #MERGE`, which fails for many non-Calabi
//! graphs (a bubble on a lone strand cannot be rewritten on a surface). In
//! that case the MERGEs are sunk only as far as the rewriting rules allow.
//! A non-Calabi graph has complexity at least 2, so the first event then
//! becomes a MERGE and the level just above it still meets fewer strands.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::graph::{
    turn, Angle, Edge, FoliationGraph, InSlot, OutSlot, Port, Shape, Vertex, VertexKind,
};

pub use crate::graph::contiguous;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StrandId(pub u32);

impl fmt::Display for StrandId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    Merge {
        inputs: [StrandId; 2],
        output: StrandId,
    },
    Split {
        input: StrandId,
        outputs: [StrandId; 2],
    },
}

impl Event {
    pub fn kind(&self) -> VertexKind {
        match self {
            Event::Merge { .. } => VertexKind::Merge,
            Event::Split { .. } => VertexKind::Split,
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Merge {
                inputs: [a, b],
                output,
            } => write!(f, "MERGE({a},{b}->{output})"),
            Event::Split {
                input,
                outputs: [a, b],
            } => write!(f, "SPLIT({input}->{a},{b})"),
        }
    }
}

/// Where a cut graph came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub graph: String,
    pub angle: Angle,
}

/// A foliation graph cut open along a regular level: strands enter at the
/// bottom, pass through MERGE/SPLIT events in height order, leave at the top,
/// and `glue` maps each top strand to the bottom strand it continues as.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutGraph {
    pub bottom: Vec<StrandId>,
    pub top: Vec<StrandId>,
    pub events: Vec<Event>,
    pub glue: BTreeMap<StrandId, StrandId>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CutError {
    #[error("cannot cut a graph without vertices")]
    NoVertices,
    #[error("level {0} is singular")]
    SingularLevel(Angle),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("bottom strands are not distinct")]
    DuplicateBottom,
    #[error("event {event} consumes {strand}, which is not live")]
    DeadInput { event: usize, strand: StrandId },
    #[error("event {event} consumes {strand} twice")]
    RepeatedInput { event: usize, strand: StrandId },
    #[error("event {event} produces {strand}, which is already live")]
    LiveOutput { event: usize, strand: StrandId },
    #[error("replayed top strands differ from the recorded top")]
    TopMismatch,
    #[error("glue is not a bijection from top strands to bottom strands")]
    BadGlue,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bubble {split}; {merge} at position {position} has no strand to borrow ({live} live)")]
pub struct NotSortable {
    pub position: usize,
    pub split: Event,
    pub merge: Event,
    pub live: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReglueError {
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error("regluing produces a disconnected graph")]
    Disconnected,
    #[error("cut has no strands")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error("graph is already Calabi")]
    AlreadyCalabi,
    #[error("graph has no vertices")]
    NoVertices,
    #[error(transparent)]
    Cut(#[from] CutError),
    #[error("reglue failed: {0}")]
    Reglue(#[from] ReglueError),
    #[error("complexity did not drop ({before} -> {after})")]
    NoProgress { before: u32, after: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionStep {
    pub cut_angle: Angle,
    pub complexity_before: u32,
    pub complexity_after: u32,
    pub rewrites: usize,
    pub sorted_word: Vec<Event>,
    /// Set when a full sort was impossible and MERGEs were only sunk as far
    /// as the rules allow; holds the first blocking bubble.
    pub blocked: Option<NotSortable>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReductionTrace {
    pub steps: Vec<ReductionStep>,
}

impl fmt::Display for ReductionTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, s) in self.steps.iter().enumerate() {
            write!(
                f,
                "step {}: cut@{} complexity {}→{} rewrites {}",
                k + 1,
                s.cut_angle,
                s.complexity_before,
                s.complexity_after,
                s.rewrites
            )?;
            if s.blocked.is_some() {
                write!(f, " (partial sort)")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// A reduction that could not finish, with the steps that did.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("reduction stuck after {} step(s): {cause}", trace.steps.len())]
pub struct Stuck {
    pub trace: ReductionTrace,
    pub cause: ReduceError,
    /// The graph the failing step was applied to.
    pub last: FoliationGraph,
}

pub fn cut(g: &FoliationGraph, a: Angle) -> Result<CutGraph, CutError> {
    let (vertices, edges) = match &g.shape {
        Shape::Trivalent { vertices, edges } if !vertices.is_empty() => (vertices, edges),
        _ => return Err(CutError::NoVertices),
    };
    if !g.is_regular(a) {
        return Err(CutError::SingularLevel(turn(a)));
    }
    let mut order: Vec<usize> = (0..vertices.len()).collect();
    order.sort_by_key(|&v| turn(vertices[v].angle - a));

    let mut next = 0u32;
    let mut fresh = || {
        next += 1;
        StrandId(next - 1)
    };
    let mut leaving: HashMap<(usize, OutSlot), StrandId> = HashMap::new();
    let mut entering: HashMap<(usize, InSlot), StrandId> = HashMap::new();
    let (mut bottom, mut top) = (Vec::new(), Vec::new());
    let mut glue = BTreeMap::new();
    for e in edges {
        let crossings = g.edge_crossings(e, a);
        let pieces: Vec<StrandId> = (0..=crossings).map(|_| fresh()).collect();
        leaving.insert((e.tail.vertex, e.tail.slot), pieces[0]);
        entering.insert((e.head.vertex, e.head.slot), pieces[crossings as usize]);
        for w in pieces.windows(2) {
            top.push(w[0]);
            bottom.push(w[1]);
            glue.insert(w[0], w[1]);
        }
    }
    bottom.sort();
    top.sort();
    let events = order
        .into_iter()
        .map(|v| match vertices[v].kind {
            VertexKind::Merge => Event::Merge {
                inputs: [entering[&(v, InSlot::In0)], entering[&(v, InSlot::In1)]],
                output: leaving[&(v, OutSlot::Out0)],
            },
            VertexKind::Split => Event::Split {
                input: entering[&(v, InSlot::In0)],
                outputs: [leaving[&(v, OutSlot::Out0)], leaving[&(v, OutSlot::Out1)]],
            },
        })
        .collect();
    let c = CutGraph {
        bottom,
        top,
        events,
        glue,
        provenance: Provenance {
            graph: g.name.clone(),
            angle: turn(a),
        },
    };
    debug_assert_eq!(c.replay(), Ok(()));
    Ok(c)
}

impl CutGraph {
    /// Live strands just before event `upto`, starting from the bottom.
    fn live_before(&self, upto: usize) -> Result<BTreeSet<StrandId>, ReplayError> {
        let mut live: BTreeSet<StrandId> = BTreeSet::new();
        for &b in &self.bottom {
            if !live.insert(b) {
                return Err(ReplayError::DuplicateBottom);
            }
        }
        for (k, ev) in self.events[..upto].iter().enumerate() {
            let (ins, outs): (&[StrandId], &[StrandId]) = match ev {
                Event::Merge { inputs, output } => (inputs, std::slice::from_ref(output)),
                Event::Split { input, outputs } => (std::slice::from_ref(input), outputs),
            };
            if ins.len() == 2 && ins[0] == ins[1] {
                return Err(ReplayError::RepeatedInput {
                    event: k,
                    strand: ins[0],
                });
            }
            for &s in ins {
                if !live.remove(&s) {
                    return Err(ReplayError::DeadInput {
                        event: k,
                        strand: s,
                    });
                }
            }
            for &s in outs {
                if !live.insert(s) {
                    return Err(ReplayError::LiveOutput {
                        event: k,
                        strand: s,
                    });
                }
            }
        }
        Ok(live)
    }

    /// Checks the replay invariant and that `glue` is a bijection top → bottom.
    pub fn replay(&self) -> Result<(), ReplayError> {
        let live = self.live_before(self.events.len())?;
        let top: BTreeSet<StrandId> = self.top.iter().copied().collect();
        if top.len() != self.top.len() || live != top {
            return Err(ReplayError::TopMismatch);
        }
        let keys: BTreeSet<StrandId> = self.glue.keys().copied().collect();
        let values: BTreeSet<StrandId> = self.glue.values().copied().collect();
        let bottom: BTreeSet<StrandId> = self.bottom.iter().copied().collect();
        if keys != top || values != bottom || self.glue.len() != values.len() {
            return Err(ReplayError::BadGlue);
        }
        Ok(())
    }

    pub fn merge_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| e.kind() == VertexKind::Merge)
            .count()
    }

    /// Number of (SPLIT, later MERGE) pairs.
    pub fn inversions(&self) -> usize {
        let mut splits_seen = 0;
        let mut inv = 0;
        for e in &self.events {
            match e.kind() {
                VertexKind::Split => splits_seen += 1,
                VertexKind::Merge => inv += splits_seen,
            }
        }
        inv
    }

    pub fn is_sorted(&self) -> bool {
        self.inversions() == 0
    }

    /// Strand count between the last MERGE and the first SPLIT of a sorted word.
    pub fn separator_count(&self) -> usize {
        self.bottom.len() - self.merge_count()
    }

    fn fresh_id(&self) -> StrandId {
        let max = self
            .bottom
            .iter()
            .chain(&self.top)
            .copied()
            .chain(self.events.iter().flat_map(|e| match *e {
                Event::Merge {
                    inputs: [a, b],
                    output,
                } => [a, b, output],
                Event::Split {
                    input,
                    outputs: [a, b],
                } => [input, a, b],
            }))
            .max()
            .map_or(0, |s| s.0 + 1);
        StrandId(max)
    }

    /// Rewrites the event word so that every MERGE precedes every SPLIT,
    /// always fixing the lowest adjacent SPLIT-then-MERGE pair. Returns the
    /// sorted cut and the number of rewrites.
    ///
    /// For `SPLIT(x->x1,x2); MERGE(y1,y2->y)`:
    /// * no shared strand: the two events swap;
    /// * one shared strand: `MERGE(x,y_other->z); SPLIT(z->x_other,y)`;
    /// * both shared (a bubble): borrow the smallest other live strand `w`
    ///   and emit `MERGE(x,w->z); SPLIT(z->y,w)`, or fail if there is none.
    pub fn sort_events(&self) -> Result<(CutGraph, usize), NotSortable> {
        let mut c = self.clone();
        let mut rewrites = 0;
        while let Some(i) = c.first_inversion(0) {
            c.transpose(i)?;
            rewrites += 1;
        }
        Ok((c, rewrites))
    }

    /// Like [`sort_events`](Self::sort_events) but steps over bubbles with
    /// nothing to borrow instead of failing, so MERGEs sink as far as the
    /// rewriting rules allow. Returns the cut, the rewrite count and the
    /// first blocking bubble met, if any.
    ///
    /// When the bottom has at least two strands the result starts with a
    /// MERGE: a blocked bubble needs a level with a single live strand, and
    /// no such level lies below the first MERGE.
    pub fn sink_merges(&self) -> (CutGraph, usize, Option<NotSortable>) {
        let mut c = self.clone();
        let mut rewrites = 0;
        let mut first_block = None;
        let mut from = 0;
        while let Some(i) = c.first_inversion(from) {
            match c.transpose(i) {
                Ok(()) => {
                    rewrites += 1;
                    from = 0;
                }
                Err(block) => {
                    first_block.get_or_insert(block);
                    from = i + 1;
                }
            }
        }
        (c, rewrites, first_block)
    }

    fn first_inversion(&self, from: usize) -> Option<usize> {
        (from..self.events.len().saturating_sub(1)).find(|&i| {
            self.events[i].kind() == VertexKind::Split
                && self.events[i + 1].kind() == VertexKind::Merge
        })
    }

    /// Applies the case table to the SPLIT at `i` and the MERGE at `i + 1`.
    fn transpose(&mut self, i: usize) -> Result<(), NotSortable> {
        let (split, merge) = (self.events[i], self.events[i + 1]);
        let (
            Event::Split {
                input: x,
                outputs: xs,
            },
            Event::Merge {
                inputs: ys,
                output: y,
            },
        ) = (split, merge)
        else {
            unreachable!("caller passes a SPLIT, MERGE pair");
        };
        let shared: Vec<StrandId> = xs.iter().copied().filter(|s| ys.contains(s)).collect();
        let rewritten = match shared.len() {
            0 => [merge, split],
            1 => {
                let x_other = if xs[0] == shared[0] { xs[1] } else { xs[0] };
                let y_other = if ys[0] == shared[0] { ys[1] } else { ys[0] };
                let z = self.fresh_id();
                [
                    Event::Merge {
                        inputs: [x, y_other],
                        output: z,
                    },
                    Event::Split {
                        input: z,
                        outputs: [x_other, y],
                    },
                ]
            }
            _ => {
                let live = self
                    .live_before(i)
                    .expect("cut satisfies the replay invariant");
                let Some(w) = live.iter().copied().find(|&w| w != x) else {
                    return Err(NotSortable {
                        position: i,
                        split,
                        merge,
                        live: live.len(),
                    });
                };
                let z = self.fresh_id();
                [
                    Event::Merge {
                        inputs: [x, w],
                        output: z,
                    },
                    Event::Split {
                        input: z,
                        outputs: [y, w],
                    },
                ]
            }
        };
        self.events[i] = rewritten[0];
        self.events[i + 1] = rewritten[1];
        debug_assert_eq!(self.replay(), Ok(()), "rewrite broke the replay invariant");
        Ok(())
    }

    /// Glues the top back onto the bottom. Event `k` of `n` becomes a vertex
    /// at angle `(k+1)/(n+1)`; for a sorted word this puts every MERGE in
    /// `(0, 1/2)` and every SPLIT in `(1/2, 1)`.
    pub fn reglue(&self) -> Result<FoliationGraph, ReglueError> {
        self.replay()?;
        let name = self.provenance.graph.clone();
        let n = self.events.len();
        if n == 0 {
            return self.reglue_covering(name);
        }

        #[derive(Clone, Copy)]
        enum Source {
            Bottom(StrandId),
            Out(usize, OutSlot),
        }
        #[derive(Clone, Copy)]
        enum Sink {
            Top(StrandId),
            In(usize, InSlot),
        }

        let mut live: HashMap<StrandId, Source> = self
            .bottom
            .iter()
            .map(|&b| (b, Source::Bottom(b)))
            .collect();
        let mut segments: Vec<(Source, Sink)> = Vec::new();
        for (k, ev) in self.events.iter().enumerate() {
            match *ev {
                Event::Merge { inputs, output } => {
                    for (s, slot) in inputs.into_iter().zip([InSlot::In0, InSlot::In1]) {
                        segments.push((live.remove(&s).expect("replayed"), Sink::In(k, slot)));
                    }
                    live.insert(output, Source::Out(k, OutSlot::Out0));
                }
                Event::Split { input, outputs } => {
                    segments.push((
                        live.remove(&input).expect("replayed"),
                        Sink::In(k, InSlot::In0),
                    ));
                    for (s, slot) in outputs.into_iter().zip([OutSlot::Out0, OutSlot::Out1]) {
                        live.insert(s, Source::Out(k, slot));
                    }
                }
            }
        }
        let mut remaining: Vec<_> = live.into_iter().collect();
        remaining.sort_by_key(|(s, _)| *s);
        for (t, src) in remaining {
            segments.push((src, Sink::Top(t)));
        }
        let from_bottom: HashMap<StrandId, usize> = segments
            .iter()
            .enumerate()
            .filter_map(|(i, (src, _))| match src {
                Source::Bottom(b) => Some((*b, i)),
                Source::Out(..) => None,
            })
            .collect();

        let angle = |k: usize| Angle::new(k as i64 + 1, n as i64 + 1);
        let vertices: Vec<Vertex> = self
            .events
            .iter()
            .enumerate()
            .map(|(k, ev)| Vertex {
                id: format!("v{k}"),
                kind: ev.kind(),
                angle: angle(k),
            })
            .collect();

        let mut starts: Vec<(usize, OutSlot, usize)> = segments
            .iter()
            .enumerate()
            .filter_map(|(i, (src, _))| match src {
                Source::Out(k, slot) => Some((*k, *slot, i)),
                Source::Bottom(_) => None,
            })
            .collect();
        starts.sort_by_key(|&(k, slot, _)| (k, slot));
        let mut visited = vec![false; segments.len()];
        let mut edges = Vec::new();
        for (k, slot, first) in starts {
            let mut seg = first;
            let mut crossings = 0u32;
            let head = loop {
                visited[seg] = true;
                match segments[seg].1 {
                    Sink::In(k2, s2) => break (k2, s2),
                    Sink::Top(t) => {
                        crossings += 1;
                        seg = from_bottom[&self.glue[&t]];
                    }
                }
            };
            let (tail_angle, head_angle) = (angle(k), angle(head.0));
            // Crossings of level 0 = winding + [head lies below tail].
            let winding = if head_angle < tail_angle {
                crossings - 1
            } else {
                crossings
            };
            debug_assert!(crossings > 0 || head_angle > tail_angle);
            edges.push(Edge {
                id: format!("e{}", edges.len()),
                tail: Port { vertex: k, slot },
                head: Port {
                    vertex: head.0,
                    slot: head.1,
                },
                winding,
            });
        }
        if visited.iter().any(|v| !v) {
            // Some strands circulate without meeting a vertex.
            return Err(ReglueError::Disconnected);
        }
        let g = FoliationGraph::trivalent(name, vertices, edges);
        if !g.is_connected() {
            return Err(ReglueError::Disconnected);
        }
        Ok(g)
    }

    fn reglue_covering(&self, name: String) -> Result<FoliationGraph, ReglueError> {
        let Some(&start) = self.bottom.first() else {
            return Err(ReglueError::Empty);
        };
        let mut len = 0;
        let mut at = start;
        loop {
            at = self.glue[&at];
            len += 1;
            if at == start {
                break;
            }
        }
        if len != self.bottom.len() {
            return Err(ReglueError::Disconnected);
        }
        Ok(FoliationGraph::free_circle(name, len as u32))
    }
}

/// One reduction step: cut at the complexity witness, sort (or sink MERGEs
/// as far as possible when a full sort is blocked), reglue.
pub fn reduce_once(g: &FoliationGraph) -> Result<(FoliationGraph, ReductionStep), ReduceError> {
    if g.vertices().is_empty() {
        return Err(ReduceError::NoVertices);
    }
    if g.is_calabi().verdict() {
        return Err(ReduceError::AlreadyCalabi);
    }
    let (before, a) = g.complexity();
    let c = cut(g, a)?;
    let (sorted, rewrites, blocked) = match c.sort_events() {
        Ok((sorted, rewrites)) => (sorted, rewrites, None),
        Err(_) => c.sink_merges(),
    };
    let reduced = sorted.reglue()?;
    let (after, _) = reduced.complexity();
    if after >= before {
        return Err(ReduceError::NoProgress { before, after });
    }
    debug_assert!(contiguous(g, &reduced));
    Ok((
        reduced,
        ReductionStep {
            cut_angle: a,
            complexity_before: before,
            complexity_after: after,
            rewrites,
            sorted_word: sorted.events,
            blocked,
        },
    ))
}

/// Reduces until the graph is Calabi.
pub fn harmonize(g: &FoliationGraph) -> Result<(FoliationGraph, ReductionTrace), Box<Stuck>> {
    let mut current = g.clone();
    let mut trace = ReductionTrace::default();
    while !current.is_calabi().verdict() {
        match reduce_once(&current) {
            Ok((next, step)) => {
                trace.steps.push(step);
                current = next;
            }
            Err(cause) => {
                return Err(Box::new(Stuck {
                    trace,
                    cause,
                    last: current,
                }))
            }
        }
    }
    Ok((current, trace))
}

/// Level inside the separator gap of a reglued sorted word, if it has one.
pub fn separator_level(c: &CutGraph) -> Option<Angle> {
    let m = c.merge_count();
    let n = c.events.len();
    if n == 0 || !c.is_sorted() {
        return None;
    }
    let lo = Angle::new(m as i64, n as i64 + 1);
    let hi = Angle::new(m as i64 + 1, n as i64 + 1);
    let mid = (lo + hi) / Angle::from_integer(2);
    debug_assert!(!mid.is_zero());
    Some(mid)
}
