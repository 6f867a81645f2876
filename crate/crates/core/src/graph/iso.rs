//! Structural isomorphism of oriented trivalent multigraphs.
//!
//! Angles and windings are ignored, and so is the labelling of slots within
//! `{in0, in1}` and `{out0, out1}`: two graphs match when some kind-preserving
//! vertex bijection preserves the number of edges between every ordered pair.

use std::collections::VecDeque;

use super::FoliationGraph;

fn multiplicities(g: &FoliationGraph) -> Vec<Vec<u8>> {
    let n = g.vertices().len();
    let mut m = vec![vec![0u8; n]; n];
    for e in g.edges() {
        m[e.tail.vertex][e.head.vertex] += 1;
    }
    m
}

/// Vertex order in which every vertex after the first of its component
/// touches an earlier one.
fn search_order(mult: &[Vec<u8>]) -> Vec<usize> {
    let n = mult.len();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for w in 0..n {
                if !seen[w] && (mult[u][w] > 0 || mult[w][u] > 0) {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    order
}

pub fn isomorphic(g1: &FoliationGraph, g2: &FoliationGraph) -> bool {
    match (g1.is_free_circle(), g2.is_free_circle()) {
        (true, true) => return true,
        (false, false) => {}
        _ => return false,
    }
    let (v1, v2) = (g1.vertices(), g2.vertices());
    if v1.len() != v2.len()
        || g1.edges().len() != g2.edges().len()
        || g1.merge_count() != g2.merge_count()
    {
        return false;
    }
    let m1 = multiplicities(g1);
    let m2 = multiplicities(g2);
    let order = search_order(&m1);
    let mut image = vec![usize::MAX; v1.len()];
    let mut used = vec![false; v2.len()];

    #[allow(clippy::too_many_arguments)]
    fn extend(
        depth: usize,
        order: &[usize],
        g1: &FoliationGraph,
        g2: &FoliationGraph,
        m1: &[Vec<u8>],
        m2: &[Vec<u8>],
        image: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        let Some(&u) = order.get(depth) else {
            return true;
        };
        let kind = g1.vertices()[u].kind;
        for cand in 0..used.len() {
            if used[cand] || g2.vertices()[cand].kind != kind || m1[u][u] != m2[cand][cand] {
                continue;
            }
            let consistent = order[..depth].iter().all(|&w| {
                let iw = image[w];
                m1[u][w] == m2[cand][iw] && m1[w][u] == m2[iw][cand]
            });
            if !consistent {
                continue;
            }
            image[u] = cand;
            used[cand] = true;
            if extend(depth + 1, order, g1, g2, m1, m2, image, used) {
                return true;
            }
            used[cand] = false;
            image[u] = usize::MAX;
        }
        false
    }

    extend(0, &order, g1, g2, &m1, &m2, &mut image, &mut used)
}
