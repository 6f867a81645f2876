//! Transitivity of the graph: the Calabi decision and positive paths.
//!
//! A connected oriented graph is Calabi when every edge lies on a closed
//! path traversed head-ward, which for connected graphs is the same as
//! strong connectivity. The certificate records the evidence either way.

use std::collections::VecDeque;

use super::{FoliationGraph, GraphError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CalabiCertificate {
    /// Directed cycles (edge indices, head-ward order) jointly covering every edge.
    Calabi { cycles: Vec<Vec<usize>> },
    /// No positive path runs from `source` to `target`; `out_set` is every
    /// vertex reachable from `source` and has no edge leaving it.
    NotCalabi {
        source: usize,
        target: usize,
        out_set: Vec<usize>,
    },
}

impl CalabiCertificate {
    pub fn verdict(&self) -> bool {
        matches!(self, CalabiCertificate::Calabi { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PositivePath {
    /// Edge indices from `x` to `y`, tail to head.
    Path(Vec<usize>),
    /// Everything reachable from `x` (including `x`); `y` is not among it.
    NoPath { out_set: Vec<usize> },
}

/// Strongly connected components, Tarjan's algorithm. Components come out in
/// reverse topological order of the condensation, so sinks first.
pub fn strongly_connected_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    struct State<'a> {
        adj: &'a [Vec<usize>],
        counter: usize,
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        stack: Vec<usize>,
        on_stack: Vec<bool>,
        comps: Vec<Vec<usize>>,
    }

    fn visit(v: usize, st: &mut State<'_>) {
        st.index[v] = Some(st.counter);
        st.low[v] = st.counter;
        st.counter += 1;
        st.stack.push(v);
        st.on_stack[v] = true;
        for &w in &st.adj[v] {
            match st.index[w] {
                None => {
                    visit(w, st);
                    st.low[v] = st.low[v].min(st.low[w]);
                }
                Some(iw) if st.on_stack[w] => st.low[v] = st.low[v].min(iw),
                Some(_) => {}
            }
        }
        if Some(st.low[v]) == st.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = st.stack.pop().expect("component root is on the stack");
                st.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            comp.sort_unstable();
            st.comps.push(comp);
        }
    }

    let n = adj.len();
    let mut st = State {
        adj,
        counter: 0,
        index: vec![None; n],
        low: vec![0; n],
        stack: Vec::new(),
        on_stack: vec![false; n],
        comps: Vec::new(),
    };
    for v in 0..n {
        if st.index[v].is_none() {
            visit(v, &mut st);
        }
    }
    st.comps
}

impl FoliationGraph {
    /// Vertex adjacency following edge orientation (with multiplicity).
    pub fn successors(&self) -> Vec<Vec<usize>> {
        let edges = self.edges();
        self.out_edges()
            .into_iter()
            .map(|es| es.into_iter().map(|i| edges[i].head.vertex).collect())
            .collect()
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.is_free_circle() || strongly_connected_components(&self.successors()).len() == 1
    }

    pub fn is_calabi(&self) -> CalabiCertificate {
        if self.is_free_circle() {
            return CalabiCertificate::Calabi { cycles: Vec::new() };
        }
        let succ = self.successors();
        let comps = strongly_connected_components(&succ);
        if comps.len() > 1 {
            let n = succ.len();
            let mut comp_of = vec![0; n];
            for (c, members) in comps.iter().enumerate() {
                for &v in members {
                    comp_of[v] = c;
                }
            }
            let is_sink = |c: usize| {
                comps[c]
                    .iter()
                    .all(|&v| succ[v].iter().all(|&w| comp_of[w] == c))
            };
            let sink = (0..comps.len())
                .filter(|&c| is_sink(c))
                .min_by_key(|&c| comps[c][0])
                .expect("a finite condensation has a sink");
            let source = comps[sink][0];
            let target = (0..n)
                .find(|&v| comp_of[v] != sink)
                .expect("more than one component");
            return CalabiCertificate::NotCalabi {
                source,
                target,
                out_set: comps[sink].clone(),
            };
        }
        let edges = self.edges();
        let mut covered = vec![false; edges.len()];
        let mut cycles = Vec::new();
        for (i, e) in edges.iter().enumerate() {
            if covered[i] {
                continue;
            }
            let mut cycle = vec![i];
            if e.head.vertex != e.tail.vertex {
                match self.path_between(e.head.vertex, e.tail.vertex) {
                    PositivePath::Path(p) => cycle.extend(p),
                    PositivePath::NoPath { .. } => unreachable!("strongly connected"),
                }
            }
            for &j in &cycle {
                covered[j] = true;
            }
            cycles.push(cycle);
        }
        CalabiCertificate::Calabi { cycles }
    }

    /// Shortest head-ward path from `x` to `y`; when `x == y` the path is a
    /// nonempty closed path.
    pub fn positive_path(&self, x: &str, y: &str) -> Result<PositivePath, GraphError> {
        if self.is_free_circle() {
            return Err(GraphError::NoVertices);
        }
        let xi = self
            .vertex_index(x)
            .ok_or_else(|| GraphError::UnknownVertex(x.into()))?;
        let yi = self
            .vertex_index(y)
            .ok_or_else(|| GraphError::UnknownVertex(y.into()))?;
        Ok(self.path_between(xi, yi))
    }

    pub(crate) fn path_between(&self, x: usize, y: usize) -> PositivePath {
        let edges = self.edges();
        let out = self.out_edges();
        let n = out.len();
        // Edge used to first reach each vertex.
        let mut via: Vec<Option<usize>> = vec![None; n];
        let mut reached = vec![false; n];
        let mut queue = VecDeque::from([x]);
        let mut found = false;
        'search: while let Some(u) = queue.pop_front() {
            for &ei in &out[u] {
                let w = edges[ei].head.vertex;
                if w == y {
                    via[w] = Some(ei);
                    found = true;
                    break 'search;
                }
                if !reached[w] && w != x {
                    reached[w] = true;
                    via[w] = Some(ei);
                    queue.push_back(w);
                }
            }
        }
        if !found {
            let mut out_set: Vec<usize> = (0..n).filter(|&v| reached[v] || v == x).collect();
            out_set.sort_unstable();
            return PositivePath::NoPath { out_set };
        }
        let mut path = Vec::new();
        let mut at = y;
        loop {
            let ei = via[at].expect("reached vertices record their edge");
            path.push(ei);
            at = edges[ei].tail.vertex;
            if at == x {
                break;
            }
        }
        path.reverse();
        PositivePath::Path(path)
    }
}
