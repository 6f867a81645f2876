//! Generators and brute-force oracles shared by the integration tests.
//!
//! Nothing here calls into the library's decision procedures: the oracles
//! work from raw edge lists so they stay independent of what they check.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use calabi_core::graph::{Angle, Edge, FoliationGraph, InSlot, OutSlot, Port, Vertex, VertexKind};
use calabi_core::scalar::{ExactScalar, Symbol, SymbolTable};
use calabi_core::surface::{Disk, SurfaceModel, TubeKind};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

/// Builds a graph from kinds and an adjacency matrix `mult[u][w]` = number of
/// edges u -> w. Slots are filled in order; angles are `i / V`; loops get
/// winding 1, other edges `extra` windings from the callback.
pub fn graph_from_matrix(
    kinds: &[VertexKind],
    mult: &[Vec<u8>],
    angles: &[Angle],
    mut winding: impl FnMut(usize, usize) -> u32,
) -> FoliationGraph {
    let n = kinds.len();
    let vertices: Vec<Vertex> = (0..n)
        .map(|i| Vertex {
            id: format!("v{i}"),
            kind: kinds[i],
            angle: angles[i],
        })
        .collect();
    let mut next_out = vec![0usize; n];
    let mut next_in = vec![0usize; n];
    let mut edges = Vec::new();
    for u in 0..n {
        for w in 0..n {
            for _ in 0..mult[u][w] {
                let tail = Port {
                    vertex: u,
                    slot: [OutSlot::Out0, OutSlot::Out1][next_out[u]],
                };
                let head = Port {
                    vertex: w,
                    slot: [InSlot::In0, InSlot::In1][next_in[w]],
                };
                next_out[u] += 1;
                next_in[w] += 1;
                let base = winding(u, w);
                edges.push(Edge {
                    id: format!("e{}", edges.len()),
                    tail,
                    head,
                    winding: if u == w { base.max(1) } else { base },
                });
            }
        }
    }
    FoliationGraph::trivalent("g", vertices, edges)
}

fn undirected_connected(mult: &[Vec<u8>]) -> bool {
    let n = mult.len();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for w in 0..n {
            if !seen[w] && (mult[u][w] > 0 || mult[w][u] > 0) {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Canonical key of (kinds, multiplicity matrix) under kind-preserving
/// vertex permutations: the lexicographically least relabelled matrix.
fn canonical_key(kinds: &[VertexKind], mult: &[Vec<u8>]) -> Vec<u8> {
    let n = kinds.len();
    let merges: Vec<usize> = (0..n).filter(|&i| kinds[i] == VertexKind::Merge).collect();
    let splits: Vec<usize> = (0..n).filter(|&i| kinds[i] == VertexKind::Split).collect();
    let mut best: Option<Vec<u8>> = None;
    for pm in permutations(&merges) {
        for ps in permutations(&splits) {
            // New position i holds old vertex order[i]; merges first.
            let order: Vec<usize> = pm.iter().chain(ps.iter()).copied().collect();
            let key: Vec<u8> = order
                .iter()
                .flat_map(|&a| order.iter().map(move |&b| (a, b)))
                .map(|(a, b)| mult[a][b])
                .collect();
            if best.as_ref().is_none_or(|k| key < *k) {
                best = Some(key);
            }
        }
    }
    best.unwrap_or_default()
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Every connected trivalent oriented multigraph with `v` vertices (v/2 of
/// each kind), one representative per isomorphism class.
pub fn enumerate_graphs(v: usize) -> Vec<FoliationGraph> {
    assert!(v >= 2 && v.is_multiple_of(2));
    let kinds: Vec<VertexKind> = (0..v)
        .map(|i| {
            if i < v / 2 {
                VertexKind::Merge
            } else {
                VertexKind::Split
            }
        })
        .collect();
    let out_deg: Vec<u8> = kinds
        .iter()
        .map(|k| if *k == VertexKind::Merge { 1 } else { 2 })
        .collect();
    let in_deg: Vec<u8> = kinds
        .iter()
        .map(|k| if *k == VertexKind::Merge { 2 } else { 1 })
        .collect();
    let mut found: BTreeSet<Vec<u8>> = BTreeSet::new();
    let mut graphs = Vec::new();
    let mut mult = vec![vec![0u8; v]; v];
    let mut cap = in_deg.clone();

    #[allow(clippy::too_many_arguments)]
    fn fill(
        row: usize,
        col: usize,
        left: u8,
        kinds: &[VertexKind],
        out_deg: &[u8],
        mult: &mut Vec<Vec<u8>>,
        cap: &mut Vec<u8>,
        found: &mut BTreeSet<Vec<u8>>,
        graphs: &mut Vec<FoliationGraph>,
    ) {
        let v = kinds.len();
        if row == v {
            if undirected_connected(mult) && found.insert(canonical_key(kinds, mult)) {
                let angles: Vec<Angle> = (0..v).map(|i| Angle::new(i as i64, v as i64)).collect();
                graphs.push(graph_from_matrix(kinds, mult, &angles, |_, _| 0));
            }
            return;
        }
        if left == 0 {
            let next_left = if row + 1 < v { out_deg[row + 1] } else { 0 };
            fill(
                row + 1,
                0,
                next_left,
                kinds,
                out_deg,
                mult,
                cap,
                found,
                graphs,
            );
            return;
        }
        for c in col..v {
            if cap[c] == 0 {
                continue;
            }
            cap[c] -= 1;
            mult[row][c] += 1;
            fill(row, c, left - 1, kinds, out_deg, mult, cap, found, graphs);
            mult[row][c] -= 1;
            cap[c] += 1;
        }
    }

    fill(
        0,
        0,
        out_deg[0],
        &kinds,
        &out_deg,
        &mut mult,
        &mut cap,
        &mut found,
        &mut graphs,
    );
    graphs
}

/// A random connected valid graph with `v` vertices, random distinct angles
/// and windings in `0..=max_winding`.
pub fn random_graph(rng: &mut impl Rng, v: usize, max_winding: u32) -> FoliationGraph {
    loop {
        let mut kinds: Vec<VertexKind> = (0..v)
            .map(|i| {
                if i < v / 2 {
                    VertexKind::Merge
                } else {
                    VertexKind::Split
                }
            })
            .collect();
        kinds.shuffle(rng);
        let mut outs: Vec<usize> = Vec::new();
        let mut ins: Vec<usize> = Vec::new();
        for (i, k) in kinds.iter().enumerate() {
            let (o, n) = if *k == VertexKind::Merge {
                (1, 2)
            } else {
                (2, 1)
            };
            outs.extend(std::iter::repeat_n(i, o));
            ins.extend(std::iter::repeat_n(i, n));
        }
        ins.shuffle(rng);
        let mut mult = vec![vec![0u8; v]; v];
        for (&u, &w) in outs.iter().zip(&ins) {
            mult[u][w] += 1;
        }
        if !undirected_connected(&mult) {
            continue;
        }
        let denom = 4 * v as i64;
        let mut slots: Vec<i64> = (0..denom).collect();
        slots.shuffle(rng);
        let angles: Vec<Angle> = slots[..v].iter().map(|&n| Angle::new(n, denom)).collect();
        return graph_from_matrix(&kinds, &mult, &angles, |_, _| {
            rng.gen_range(0..=max_winding)
        });
    }
}

/// Raw successor lists (with multiplicity) read straight off the edge list.
pub fn raw_successors(g: &FoliationGraph) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); g.vertices().len()];
    for e in g.edges() {
        adj[e.tail.vertex].push(e.head.vertex);
    }
    adj
}

/// Oracle: `y` is reachable from `x` by a nonempty directed path, decided by
/// enumerating simple paths from `x`.
pub fn enumerated_reachable(adj: &[Vec<usize>], x: usize, y: usize) -> bool {
    fn walk(adj: &[Vec<usize>], at: usize, y: usize, on_path: &mut Vec<bool>) -> bool {
        for &w in &adj[at] {
            if w == y {
                return true;
            }
            if !on_path[w] {
                on_path[w] = true;
                let hit = walk(adj, w, y, on_path);
                on_path[w] = false;
                if hit {
                    return true;
                }
            }
        }
        false
    }
    let mut on_path = vec![false; adj.len()];
    on_path[x] = true;
    walk(adj, x, y, &mut on_path)
}

/// Oracle: every ordered pair (including x = x) has a positive path.
pub fn all_pairs_reachable(g: &FoliationGraph) -> bool {
    let adj = raw_successors(g);
    let n = adj.len();
    (0..n).all(|x| (0..n).all(|y| enumerated_reachable(&adj, x, y)))
}

/// Oracle: every edge closes up into a directed cycle.
pub fn every_edge_on_cycle(g: &FoliationGraph) -> bool {
    let adj = raw_successors(g);
    g.edges().iter().all(|e| {
        e.head.vertex == e.tail.vertex || enumerated_reachable(&adj, e.head.vertex, e.tail.vertex)
    })
}

/// Symbol table of square roots of small primes, refined by bisection.
pub fn sqrt_table(count: usize) -> Arc<SymbolTable> {
    let decls = [
        ("lambda", 2, "1.41", "1.42"),
        ("mu", 3, "1.73", "1.74"),
        ("nu", 5, "2.23", "2.24"),
        ("rho", 7, "2.64", "2.65"),
    ];
    SymbolTable::new(
        decls[..count]
            .iter()
            .map(|(n, p, lo, hi)| Symbol::sqrt(*n, *p, lo, hi).unwrap())
            .collect(),
    )
    .unwrap()
}

pub fn small_rational(rng: &mut impl Rng) -> BigRational {
    BigRational::new(
        BigInt::from(rng.gen_range(-4..=4)),
        BigInt::from(rng.gen_range(1..=3)),
    )
}

/// Random scalar over the first `symbols` entries of `table`; each
/// coefficient is zero with probability one half.
pub fn random_scalar(rng: &mut impl Rng, table: &Arc<SymbolTable>, symbols: usize) -> ExactScalar {
    let mut acc = ExactScalar::zero();
    if rng.gen_bool(0.5) {
        acc = ExactScalar::from(small_rational(rng));
    }
    for s in &table.symbols()[..symbols] {
        if rng.gen_bool(0.5) {
            let term = table.symbol(&s.name).unwrap().scale(&small_rational(rng));
            acc = acc.add(&term).unwrap();
        }
    }
    acc
}

pub fn random_disk(rng: &mut impl Rng) -> Disk {
    if rng.gen_bool(0.5) {
        Disk::Small
    } else {
        Disk::Ribbon(rng.gen_range(1..=3))
    }
}

/// Random tree of up to `max_summands` tori with random tube kinds and disks.
pub fn random_model(
    rng: &mut impl Rng,
    table: &Arc<SymbolTable>,
    max_summands: usize,
) -> SurfaceModel {
    let symbols = rng.gen_range(0..=table.len());
    let n = rng.gen_range(1..=max_summands);
    let torus = |rng: &mut _| loop {
        let p = random_scalar(rng, table, symbols);
        let q = random_scalar(rng, table, symbols);
        if !(p.is_zero() && q.is_zero()) {
            return SurfaceModel::torus_in(table, p, q).unwrap();
        }
    };
    let mut model = torus(rng);
    for _ in 1..n {
        let next = torus(rng);
        let kind = [TubeKind::A, TubeKind::B, TubeKind::C][rng.gen_range(0..3)];
        let at_left = model.summands()[rng.gen_range(0..model.summands().len())]
            .id
            .clone();
        let at_right = next.summands()[0].id.clone();
        let (d1, d2) = (random_disk(rng), random_disk(rng));
        model = model
            .connect_sum(&next, kind, d1, d2, &at_left, &at_right)
            .unwrap();
    }
    model
}

/// Oracle rank: the largest k with a nonzero k x k minor, minors evaluated
/// by cofactor expansion.
pub fn minor_rank(rows: &[Vec<BigRational>]) -> usize {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    for k in (1..=m.min(n)).rev() {
        for rs in subsets(m, k) {
            for cs in subsets(n, k) {
                let sub: Vec<Vec<BigRational>> = rs
                    .iter()
                    .map(|&r| cs.iter().map(|&c| rows[r][c].clone()).collect())
                    .collect();
                if !cofactor_det(&sub).is_zero() {
                    return k;
                }
            }
        }
    }
    0
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

fn cofactor_det(m: &[Vec<BigRational>]) -> BigRational {
    match m.len() {
        0 => BigRational::one(),
        1 => m[0][0].clone(),
        n => (0..n)
            .map(|j| {
                let minor: Vec<Vec<BigRational>> = m[1..]
                    .iter()
                    .map(|r| {
                        r.iter()
                            .enumerate()
                            .filter(|(c, _)| *c != j)
                            .map(|(_, x)| x.clone())
                            .collect()
                    })
                    .collect();
                let term = &m[0][j] * cofactor_det(&minor);
                if j % 2 == 0 {
                    term
                } else {
                    -term
                }
            })
            .fold(BigRational::zero(), |a, b| a + b),
    }
}

/// f64 evaluation of a scalar from the symbol's true value.
pub fn approx_value(s: &ExactScalar, truth: &[f64]) -> f64 {
    let to_f = |q: &BigRational| {
        q.numer().to_string().parse::<f64>().unwrap()
            / q.denom().to_string().parse::<f64>().unwrap()
    };
    let mut v = to_f(s.rational_part());
    for (&k, c) in s.symbol_coeffs() {
        v += to_f(c) * truth[k];
    }
    v
}

pub fn is_negative(q: &BigRational) -> bool {
    q.is_negative()
}
