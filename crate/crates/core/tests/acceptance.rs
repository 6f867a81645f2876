//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line, even under a plain
//! `cargo test`. All randomness is seeded; all comparisons are exact.

mod common;

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use calabi_core::graph::{
    builtin, isomorphic, Angle, Builtin, CalabiCertificate, FoliationGraph, PositivePath,
    VertexKind,
};
use calabi_core::reduction::{contiguous, cut, harmonize, reduce_once};
use calabi_core::scalar::{integer_relation, qrank, substitute, ExactScalar};
use calabi_core::surface::{surface_example, SurfaceModel};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Result of one criterion: pass/fail plus a one-line summary.
struct Verdict {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_size(rng: &mut impl Rng, max: usize) -> usize {
    2 * rng.gen_range(1..=max / 2)
}

// ---------------------------------------------------------------------------
// 1. The dumbbell and theta graphs.

fn dumbbell_theta_pair() -> Verdict {
    let theta = builtin(Builtin::Theta);
    let dumbbell = builtin(Builtin::Dumbbell);
    let mut failures = Vec::new();
    if dumbbell.complexity().0 != 2 {
        failures.push(format!(
            "complexity(dumbbell) = {}",
            dumbbell.complexity().0
        ));
    }
    if theta.complexity().0 != 1 {
        failures.push(format!("complexity(theta) = {}", theta.complexity().0));
    }
    if dumbbell.is_calabi().verdict() || !theta.is_calabi().verdict() {
        failures.push("Calabi verdicts wrong".into());
    }
    match harmonize(&dumbbell) {
        Ok((h, trace)) => {
            if trace.steps.len() != 1 {
                failures.push(format!("{} reduction steps", trace.steps.len()));
            }
            if !isomorphic(&h, &theta) {
                failures.push("harmonized dumbbell is not a theta".into());
            }
        }
        Err(stuck) => failures.push(stuck.to_string()),
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            "complexities 2 and 1, Calabi false/true, one step to theta".to_string()
        } else {
            failures.join("; ")
        },
    )
}

// ---------------------------------------------------------------------------
// 2. Three characterizations of the Calabi condition agree.

/// Checks the certificate against the raw edge list.
fn certificate_sound(g: &FoliationGraph, cert: &CalabiCertificate) -> bool {
    let edges = g.edges();
    match cert {
        CalabiCertificate::Calabi { cycles } => {
            let mut covered = vec![false; edges.len()];
            for c in cycles {
                let closes = (0..c.len())
                    .all(|i| edges[c[i]].head.vertex == edges[c[(i + 1) % c.len()]].tail.vertex);
                if c.is_empty() || !closes {
                    return false;
                }
                for &e in c {
                    covered[e] = true;
                }
            }
            covered.into_iter().all(|b| b)
        }
        CalabiCertificate::NotCalabi {
            source,
            target,
            out_set,
        } => {
            let inside = |v: usize| out_set.contains(&v);
            inside(*source)
                && !inside(*target)
                && edges
                    .iter()
                    .all(|e| !inside(e.tail.vertex) || inside(e.head.vertex))
        }
    }
}

fn characterizations_agree_on(g: &FoliationGraph, check_paths: bool) -> Result<(), String> {
    let cycles = common::every_edge_on_cycle(g);
    let strong = g.is_strongly_connected();
    let pairs = common::all_pairs_reachable(g);
    let cert = g.is_calabi();
    if cycles != strong || strong != pairs || cert.verdict() != strong {
        return Err(format!(
            "{}: edge-cycles {cycles}, strongly connected {strong}, all pairs {pairs}, verdict {}",
            io_text(g),
            cert.verdict()
        ));
    }
    if !certificate_sound(g, &cert) {
        return Err(format!("unsound certificate for {}", io_text(g)));
    }
    if check_paths {
        let adj = common::raw_successors(g);
        let vs = g.vertices();
        for x in 0..vs.len() {
            for y in 0..vs.len() {
                let expect = common::enumerated_reachable(&adj, x, y);
                match g
                    .positive_path(&vs[x].id, &vs[y].id)
                    .map_err(|e| e.to_string())?
                {
                    PositivePath::Path(p) => {
                        let e = g.edges();
                        let ok = !p.is_empty()
                            && e[p[0]].tail.vertex == x
                            && e[*p.last().unwrap()].head.vertex == y
                            && p.windows(2)
                                .all(|w| e[w[0]].head.vertex == e[w[1]].tail.vertex);
                        if !expect || !ok {
                            return Err(format!("bad path {x}->{y} in {}", io_text(g)));
                        }
                    }
                    PositivePath::NoPath { .. } if expect => {
                        return Err(format!("missed path {x}->{y} in {}", io_text(g)));
                    }
                    PositivePath::NoPath { .. } => {}
                }
            }
        }
    }
    Ok(())
}

fn io_text(g: &FoliationGraph) -> String {
    calabi_core::io::serialize_graph(g).replace('\n', " | ")
}

fn characterizations_agree() -> Verdict {
    let mut counts = BTreeMap::new();
    let mut calabi = 0;
    let mut total = 0;
    for v in [2, 4, 6] {
        let graphs = common::enumerate_graphs(v);
        counts.insert(v, graphs.len());
        for g in &graphs {
            total += 1;
            calabi += g.is_calabi().verdict() as usize;
            if let Err(e) = characterizations_agree_on(g, true) {
                return check(false, e);
            }
        }
    }
    let mut r = rng(0x1e33a);
    for _ in 0..500 {
        let v = random_size(&mut r, 12);
        let g = common::random_graph(&mut r, v, 2);
        total += 1;
        calabi += g.is_calabi().verdict() as usize;
        if let Err(e) = characterizations_agree_on(&g, v <= 8) {
            return check(false, e);
        }
    }
    check(
        true,
        format!("{total} graphs (exhaustive classes by V: {counts:?}, plus 500 random), {calabi} Calabi; all three predicates agree"),
    )
}

// ---------------------------------------------------------------------------
// 3. Reduction contract.

fn reduction_contract() -> Verdict {
    let mut r = rng(0x3ed0c);
    let mut tried = 0;
    let mut partial = 0;
    let mut partial_later = 0;
    let mut total_steps = 0;
    let mut stuck = Vec::new();
    let mut steps_hist: BTreeMap<usize, usize> = BTreeMap::new();
    let mut failures = Vec::new();
    while tried < 500 {
        let v = random_size(&mut r, 12);
        let g = common::random_graph(&mut r, v, 2);
        if g.is_calabi().verdict() {
            continue;
        }
        tried += 1;
        for a in g.regular_samples() {
            let back = cut(&g, a).ok().and_then(|c| c.reglue().ok());
            match back {
                Some(h) if isomorphic(&g, &h) => {}
                _ => failures.push(format!("reglue(cut) at {a} differs: {}", io_text(&g))),
            }
        }
        match reduce_once(&g) {
            Ok((h, step)) => {
                partial += step.blocked.is_some() as usize;
                let (before, after) = (g.complexity().0, h.complexity().0);
                if after >= before || step.complexity_after != after {
                    failures.push(format!("complexity {before} -> {after}: {}", io_text(&g)));
                }
                if !contiguous(&g, &h)
                    || h.merge_count() != g.merge_count()
                    || h.split_count() != g.split_count()
                {
                    failures.push(format!("counts changed: {}", io_text(&g)));
                }
                if !h.is_connected() || !h.validate().is_ok() {
                    failures.push(format!("invalid output: {}", io_text(&g)));
                }
            }
            Err(e) => failures.push(format!("reduce_once failed ({e}): {}", io_text(&g))),
        }
        match harmonize(&g) {
            Ok((h, trace)) => {
                *steps_hist.entry(trace.steps.len()).or_default() += 1;
                total_steps += trace.steps.len();
                partial_later += trace.steps.iter().filter(|s| s.blocked.is_some()).count();
                if trace.steps.len() > g.complexity().0 as usize {
                    failures.push(format!(
                        "{} steps for complexity {}",
                        trace.steps.len(),
                        g.complexity().0
                    ));
                }
                if !h.is_calabi().verdict() || !contiguous(&g, &h) {
                    failures.push(format!("harmonize output not Calabi: {}", io_text(&g)));
                }
            }
            Err(s) => stuck.push(format!("STUCK ({}) on {}", s.cause, io_text(&g))),
        }
    }
    for s in &stuck {
        println!("    finding: {s}");
    }
    let pass = failures.is_empty() && stuck.is_empty();
    let mut detail = format!(
        "{tried} non-Calabi graphs, {} stuck, steps histogram {steps_hist:?}; full MERGE-before-SPLIT sort impossible (partial sort used) in {partial} of {tried} first steps and {partial_later} of {total_steps} harmonize steps",
        stuck.len()
    );
    if let Some(f) = failures.first() {
        detail = format!("{} failure(s), first: {f}", failures.len());
    }
    check(pass, detail)
}

// ---------------------------------------------------------------------------
// 4. Structural invariants.

/// Crossings of level `a` counted directly from each edge's angular span.
fn oracle_crossings(g: &FoliationGraph, a: Angle) -> i64 {
    let vs = g.vertices();
    g.edges()
        .iter()
        .map(|e| {
            let t = vs[e.tail.vertex].angle;
            let h = vs[e.head.vertex].angle;
            let mut span = h - t;
            while span <= Angle::zero() {
                span += 1;
            }
            if e.tail.vertex == e.head.vertex {
                span = Angle::zero();
            }
            let span = span + Angle::from_integer(e.winding as i64);
            // Integers k with t < a + k < t + span.
            let lo = (t - a).floor().to_integer() + 1;
            let hi = (t + span - a).ceil().to_integer() - 1;
            (hi - lo + 1).max(0)
        })
        .sum()
}

fn structural(g: &FoliationGraph) -> Result<(), String> {
    if !g.validate().is_ok() {
        return Err(format!("generated graph invalid: {}", io_text(g)));
    }
    let v = g.vertices().len() as i64;
    let e = g.edges().len() as i64;
    let merges = g
        .vertices()
        .iter()
        .filter(|x| x.kind == VertexKind::Merge)
        .count();
    let splits = g.vertices().len() - merges;
    let (_, genus) = g.euler_genus();
    if merges != splits
        || 2 * e != 3 * v
        || genus as i64 != (v + 2) / 2
        || genus as i64 != e - v + 1
    {
        return Err(format!("counting identities fail: {}", io_text(g)));
    }
    let samples = g.regular_samples();
    for &a in &samples {
        let lib = g.crossing_count(a).map_err(|e| e.to_string())? as i64;
        if lib != oracle_crossings(g, a) {
            return Err(format!(
                "crossings at {a}: {lib} vs {}",
                oracle_crossings(g, a)
            ));
        }
    }
    let mut by_angle: Vec<_> = g.vertices().iter().collect();
    by_angle.sort_by_key(|x| x.angle);
    let n = by_angle.len();
    for (i, x) in by_angle.iter().enumerate() {
        let prev = if i == 0 {
            by_angle[n - 1].angle - 1
        } else {
            by_angle[i - 1].angle
        };
        let next = if i + 1 == n {
            by_angle[0].angle + 1
        } else {
            by_angle[i + 1].angle
        };
        let wrap = |q: Angle| q - q.floor();
        let below = g.crossing_count(wrap((prev + x.angle) / 2)).unwrap() as i64;
        let above = g.crossing_count(wrap((x.angle + next) / 2)).unwrap() as i64;
        let step = if x.kind == VertexKind::Merge { -1 } else { 1 };
        if above - below != step {
            return Err(format!(
                "step {below}->{above} across {} in {}",
                x.id,
                io_text(g)
            ));
        }
    }
    Ok(())
}

fn structural_invariants() -> Verdict {
    let mut r = rng(0x57a7);
    let mut total = 0;
    for v in [2, 4, 6] {
        for g in common::enumerate_graphs(v) {
            // Same structure under several angle assignments and windings.
            for k in 0..4 {
                let h = if k == 0 {
                    g.clone()
                } else {
                    reangle(&g, &mut r)
                };
                total += 1;
                if let Err(e) = structural(&h) {
                    return check(false, e);
                }
            }
        }
    }
    for _ in 0..300 {
        let v = 2 * r.gen_range(4..=10);
        let g = common::random_graph(&mut r, v, 3);
        total += 1;
        if let Err(e) = structural(&g) {
            return check(false, e);
        }
    }
    check(
        true,
        format!("{total} graphs: counts, genus identities and ±1 crossing steps hold"),
    )
}

fn reangle(g: &FoliationGraph, r: &mut impl Rng) -> FoliationGraph {
    use rand::seq::SliceRandom;
    let mut h = g.clone();
    if let calabi_core::graph::Shape::Trivalent { vertices, edges } = &mut h.shape {
        let denom = 5 * vertices.len() as i64;
        let mut slots: Vec<i64> = (0..denom).collect();
        slots.shuffle(r);
        for (v, s) in vertices.iter_mut().zip(slots) {
            v.angle = Angle::new(s, denom);
        }
        for e in edges.iter_mut() {
            e.winding = r.gen_range(0..=2);
            if e.tail.vertex == e.head.vertex {
                e.winding = e.winding.max(1);
            }
        }
    }
    h
}

// ---------------------------------------------------------------------------
// 5. The four surface examples.

fn example_matrix() -> Verdict {
    let mut failures = Vec::new();
    let mut expect = |n: u32, ok: bool, what: &str| {
        if !ok {
            failures.push(format!("example {n}: {what}"));
        }
    };
    for n in 1..=4 {
        let m = match surface_example(n) {
            Ok(m) => m,
            Err(e) => return check(false, format!("example {n}: {e}")),
        };
        let class = m.class_report();
        let leaves = m.classify_leaves();
        let calabi = m.calabi_status();
        let g = m.genus();
        match n {
            1 => {
                expect(n, class.rank == 2 * g - 1, "rank 2g-1");
                expect(n, calabi, "Calabi");
                expect(n, leaves.has_compact_regular_leaf, "compact leaves");
            }
            2 => {
                expect(n, class.rank == 2, "rank 2");
                expect(n, class.split, "split");
                expect(n, calabi, "Calabi");
                expect(
                    n,
                    leaves.all_regular_leaves_noncompact,
                    "all regular leaves non-compact",
                );
            }
            3 => {
                expect(n, class.completely_irrational, "completely irrational");
                expect(n, !calabi, "not Calabi");
                expect(n, leaves.has_compact_regular_leaf, "compact leaves");
            }
            _ => {
                expect(n, !calabi, "not Calabi");
                expect(n, !leaves.generic, "not generic");
                expect(
                    n,
                    leaves.all_regular_leaves_noncompact,
                    "all regular leaves non-compact",
                );
                expect(
                    n,
                    leaves.compact_singular_components == 1,
                    "one compact singular component",
                );
            }
        }
        expect(n, m.consistency_check().passed(), "consistency check");
    }
    let pass = failures.is_empty();
    check(
        pass,
        if pass {
            "examples 1-4 match the roster; consistency checks pass".to_string()
        } else {
            failures.join("; ")
        },
    )
}

// ---------------------------------------------------------------------------
// 6. Implications over random surface models.

fn surface_properties() -> Verdict {
    let mut r = rng(0x5afe);
    let table = common::sqrt_table(3);
    let mut premises = [0usize; 6];
    let mut vanishers = 0;
    for i in 0..1000 {
        let m: SurfaceModel = common::random_model(&mut r, &table, 3);
        let report = m.consistency_check();
        if let Some(bad) = report.violations().next() {
            return check(
                false,
                format!("model {i}: {} violated: {}", bad.code, bad.statement),
            );
        }
        for (k, c) in report.checks.iter().enumerate() {
            premises[k] += c.premise as usize;
        }
        let periods = m.periods();
        let rank = qrank(&periods).unwrap();
        let rows: Vec<_> = periods
            .iter()
            .map(|p| p.coefficient_row(table.len()))
            .collect();
        if rank != common::minor_rank(&rows) {
            return check(
                false,
                format!("model {i}: qrank {rank} disagrees with minor rank"),
            );
        }
        match m.cup_vanisher() {
            Some(theta) => {
                vanishers += 1;
                if rank >= 2 * m.genus() {
                    return check(false, format!("model {i}: vanisher with full rank"));
                }
                if theta.iter().all(|x| x.is_zero()) || !m.cup_product(&theta).unwrap().is_zero() {
                    return check(
                        false,
                        format!("model {i}: relation {theta:?} does not vanish"),
                    );
                }
            }
            None if rank < 2 * m.genus() => {
                return check(
                    false,
                    format!("model {i}: rank {rank} < 2g but no vanisher"),
                );
            }
            None => {}
        }
    }
    check(
        true,
        format!("1000 models; I1-I6 hold (non-vacuous premises {premises:?}); {vanishers} with a cup vanisher, all exact zeros"),
    )
}

// ---------------------------------------------------------------------------
// 7. Exact arithmetic against brute force.

fn exact_arithmetic() -> Verdict {
    let mut r = rng(0xa217);
    let table = common::sqrt_table(3);
    let truth = [2f64.sqrt(), 3f64.sqrt(), 5f64.sqrt()];
    let mut relations = 0;
    let mut signs = 0;
    for i in 0..1000 {
        let symbols = r.gen_range(0..=3);
        let n = r.gen_range(1..=6);
        let values: Vec<ExactScalar> = (0..n)
            .map(|_| common::random_scalar(&mut r, &table, symbols))
            .collect();
        let rows: Vec<Vec<BigRational>> = values
            .iter()
            .map(|v| v.coefficient_row(table.len()))
            .collect();
        let oracle = common::minor_rank(&rows);
        let rank = qrank(&values).unwrap();
        if rank != oracle {
            return check(
                false,
                format!("instance {i}: qrank {rank}, oracle {oracle}"),
            );
        }
        match integer_relation(&values).unwrap() {
            Some(rel) => {
                relations += 1;
                let gcd = rel.iter().fold(num_bigint::BigInt::zero(), |g, x| g.gcd(x));
                let first = rel.iter().find(|x| !x.is_zero());
                if rank == n
                    || !substitute(&rel, &values).unwrap().is_zero()
                    || gcd != 1.into()
                    || first.is_none_or(|x| x.is_negative())
                {
                    return check(false, format!("instance {i}: bad relation {rel:?}"));
                }
            }
            None if rank < n => {
                return check(false, format!("instance {i}: dependent but no relation"))
            }
            None => {}
        }
        for v in &values {
            let s = match v.sign() {
                Ok(s) => s,
                Err(e) => return check(false, format!("instance {i}: sign of {v}: {e}")),
            };
            signs += 1;
            let (lo, hi) = v.declared_enclosure();
            let approx = common::approx_value(v, &truth);
            let contradicts = (lo.is_positive() && s != 1)
                || (hi.is_negative() && s != -1)
                || (v.is_zero() != (s == 0))
                || (approx.abs() > 1e-9 && (approx > 0.0) != (s > 0));
            if contradicts {
                return check(false, format!("instance {i}: sign {s} of {v} ~ {approx}"));
            }
        }
    }
    check(
        true,
        format!("1000 instances: qrank and relations match the minor oracle ({relations} relations); {signs} signs consistent"),
    )
}

type Criterion = (u32, &'static str, fn() -> Verdict, Duration);

fn main() {
    let criteria: [Criterion; 7] = [
        (
            1,
            "dumbbell/theta pair",
            dumbbell_theta_pair,
            Duration::from_secs(1),
        ),
        (
            2,
            "Calabi characterizations agree",
            characterizations_agree,
            Duration::from_secs(30),
        ),
        (
            3,
            "reduction contract",
            reduction_contract,
            Duration::from_secs(60),
        ),
        (
            4,
            "structural invariants",
            structural_invariants,
            Duration::from_secs(10),
        ),
        (
            5,
            "surface example matrix",
            example_matrix,
            Duration::from_secs(1),
        ),
        (
            6,
            "surface implications",
            surface_properties,
            Duration::from_secs(60),
        ),
        (
            7,
            "exact arithmetic oracle",
            exact_arithmetic,
            Duration::from_secs(30),
        ),
    ];
    let only: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (n, name, f, budget) in criteria {
        if only.is_some_and(|o| o != n) {
            continue;
        }
        let start = Instant::now();
        let verdict = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            check(false, format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let status = if verdict.pass { "PASS" } else { "FAIL" };
        failed += !verdict.pass as usize;
        let over = if elapsed > budget {
            format!(" (over the {}s budget)", budget.as_secs())
        } else {
            String::new()
        };
        println!(
            "criterion {n} {status}: {name}: {} [{:.2}s]{over}",
            verdict.detail,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criterion/criteria failed");
        std::process::exit(1);
    }
}
