//! Randomized suites that report failures instead of panicking, shared by
//! the per-module tests and the acceptance run.

use super::*;
use hyplat::cone::{d_short_vectors, minimal_vectors};
use hyplat::linalg::{int, vec_mat};
use hyplat::pdlat::{automorphism_group, close_vectors, short_vectors, PDLattice};
use hyplat::polycone::extreme_rays;
use hyplat::voronoi::{traverse, verify, GeneratorSet, ResidueGraph};
use hyplat::watson::{
    det_ratio, exact_sqrt, has_squarefree_exponent, in_recovered_group, in_traversal_group, prime_support, recover_aut, watson,
    LatticeInSpace, LatticeOrbit, Traversal,
};
use hyplat::UnimodularMap;
use num_traits::One;
use rand::seq::SliceRandom;

/// Number of cases run and a description of each failure.
#[derive(Debug, Default)]
pub struct SuiteResult {
    pub cases: usize,
    pub failures: Vec<String>,
}

impl SuiteResult {
    pub fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn assert_passed(&self) {
        assert!(self.passed(), "{} of {} cases failed: {:#?}", self.failures.len(), self.cases, self.failures);
    }
}

fn f64_of(v: &BigInt) -> f64 {
    v.to_f64().unwrap_or(f64::INFINITY)
}

fn cone_box_volume(frame: &ConeFrame, x: &[BigInt], c: &BigInt) -> f64 {
    let a = frame.gram();
    let norm = -frame.lattice().norm(x);
    let xa = vec_mat(x, a);
    (0..frame.dim())
        .map(|i| {
            let r2 =
                2.0 * f64_of(c) * f64_of(c) / f64_of(&norm) * (f64_of(&a[(i, i)]) + 2.0 * f64_of(&xa[i]) * f64_of(&xa[i]) / f64_of(&norm));
            2.0 * r2.sqrt() + 3.0
        })
        .product()
}

/// Minimal and short `D` vectors against exhaustive box search on random
/// 3×3 hyperbolic forms with entries in `[-20, 20]`.
pub fn cone_oracle(seed: u64, count: usize) -> SuiteResult {
    let mut r = rng(seed);
    let mut out = SuiteResult::default();
    while out.cases < count {
        let (a, f) = random_hyperbolic(&mut r, 3, 20);
        let x = random_point(&mut r, &f, 2);
        let m = minimal_vectors(&f, &x).unwrap();
        let c = &m.minimum * int(2) + int(3);
        if cone_box_volume(&f, &x, &c) > 3.0e5 {
            continue;
        }
        out.cases += 1;
        let oracle = d_box_oracle(&f, &x, &c);
        let want_min = oracle.first().map(|(_, p)| p.clone()).expect("D meets the pairing bound");
        out.check(m.minimum == want_min, || format!("minimum for {a} at {x:?}"));
        let want: Vec<_> = oracle.iter().filter(|(_, p)| *p == want_min).map(|(d, _)| d.clone()).collect();
        out.check(m.minvecs == want, || format!("minimal vectors for {a} at {x:?}"));
        out.check(d_short_vectors(&f, &x, &c).unwrap() == oracle, || format!("short vectors for {a} at {x:?}"));
    }
    out
}

fn pd_box_volume(g: &IntMatrix, bound: &Rat) -> f64 {
    let inv = g.to_rat().inverse().unwrap();
    (0..g.rows())
        .map(|i| {
            let q = bound * &inv[(i, i)];
            2.0 * ((f64_of(q.numer()) / f64_of(q.denom())).sqrt() + 2.0) + 1.0
        })
        .product()
}

/// Short and close vectors against box search on random positive definite
/// Gram matrices of rank at most 4.
pub fn pdlat_vectors(seed: u64, count: usize) -> SuiteResult {
    let mut r = rng(seed);
    let mut out = SuiteResult::default();
    while out.cases < count {
        let n = r.gen_range(1..=4);
        let g = random_pd(&mut r, n, 3);
        let max = (0..n).map(|i| g[(i, i)].clone()).max().unwrap();
        let bound = Rat::new(max * int(r.gen_range(1..=6)), int(r.gen_range(1..=3)));
        if pd_box_volume(&g, &bound) > 1.0e5 {
            continue;
        }
        out.cases += 1;
        let lat = PDLattice::from_int(&g).unwrap();
        let zero = vec![Rat::zero(); n];
        let want: Vec<_> = pd_box(&g, &zero, &bound)
            .into_iter()
            .filter(|(v, _)| v.iter().find(|c| !c.is_zero()).is_some_and(|c| c.is_positive()))
            .collect();
        out.check(short_vectors(&lat, &bound).unwrap() == want, || format!("short vectors of {g}"));
        let target: Vec<Rat> = (0..n).map(|_| Rat::new(int(r.gen_range(-20..=20)), int(r.gen_range(1..=7)))).collect();
        let want = pd_box(&g, &target, &bound);
        out.check(close_vectors(&lat, &target, &bound).unwrap() == want, || format!("close vectors of {g}"));
    }
    out
}

/// Automorphism group orders against exhaustive search at rank at most 3.
pub fn pdlat_automorphisms(seed: u64, count: usize) -> SuiteResult {
    let mut r = rng(seed);
    let mut out = SuiteResult::default();
    while out.cases < count {
        let n = r.gen_range(1..=3);
        let g = random_pd(&mut r, n, 2);
        out.cases += 1;
        let group = automorphism_group(&PDLattice::from_int(&g).unwrap()).unwrap();
        out.check(group.order() == Some(brute_force_aut_order(&g) as u128), || format!("order for {g}"));
        out.check(group.generators().iter().all(|s| s.matrix().congruence(&g) == g), || format!("generators for {g}"));
    }
    out
}

/// Extreme rays against the subset oracle on random pointed cones.
pub fn polycone_oracle(seed: u64, count: usize) -> SuiteResult {
    let mut r = rng(seed);
    let mut out = SuiteResult::default();
    while out.cases < count {
        let n = r.gen_range(2..=4);
        let m = r.gen_range(n..=n + 6);
        // inequalities in an open half space, so that the cone is full dimensional
        let ineqs: Vec<IntVector> = (0..m)
            .map(|_| {
                let mut d: IntVector = (0..n).map(|_| int(r.gen_range(-4..=4))).collect();
                d[0] = int(r.gen_range(1..=4));
                d
            })
            .collect();
        if IntMatrix::from_rows(&ineqs, n).rank() < n {
            continue;
        }
        out.cases += 1;
        let got = extreme_rays(&ineqs, n).unwrap();
        let want = rays_by_subsets(&ineqs, n);
        out.check(!want.is_empty(), || format!("empty oracle for {ineqs:?}"));
        out.check(got.vectors().cloned().collect::<Vec<_>>() == want, || format!("rays of {ineqs:?}"));
        for ray in &got.rays {
            let tight: Vec<usize> = (0..m).filter(|&i| dot(&ray.vector, &ineqs[i]).is_zero()).collect();
            out.check(ray.annihilated == tight, || format!("annihilated set of {:?} in {ineqs:?}", ray.vector));
        }
    }
    out
}

pub fn run_traversal(a: &IntMatrix) -> (ConeFrame, ResidueGraph, GeneratorSet) {
    let frame = make_frame(a).unwrap();
    let (graph, gens) = traverse(&frame).unwrap();
    (frame, graph, gens)
}

/// Fixed forms whose traversals are cheap.
pub fn named_forms() -> Vec<(String, IntMatrix)> {
    let mut out = vec![
        ("A".to_string(), first_example()),
        ("K4".to_string(), complete_graph(4)),
        ("K5".to_string(), complete_graph(5)),
        ("six-vertex graph".to_string(), graph_gram(6, &SIX_VERTEX_EDGES)),
    ];
    out.extend((3..=6).map(|n| (format!("H{n}"), standard_form(n))));
    out
}

/// `verify` on the named forms and on random 3×3 forms.
pub fn verify_clean(seed: u64, random: usize) -> SuiteResult {
    let mut out = SuiteResult::default();
    let mut r = rng(seed);
    let mut forms = named_forms();
    forms.extend((0..random).map(|i| (format!("random {i}"), random_hyperbolic(&mut r, 3, 6).0)));
    for (name, a) in forms {
        out.cases += 1;
        let (frame, graph, gens) = run_traversal(&a);
        let report = verify(&frame, &graph, &gens);
        out.check(report.is_ok(), || format!("{name}: {report:?}"));
    }
    out
}

fn bump(m: &IntMatrix, i: usize, j: usize, by: i64) -> UnimodularMap {
    let mut m = m.clone();
    m[(i, j)] += int(by);
    UnimodularMap::new_unchecked(m)
}

/// Single-entry changes of generators, connecting elements and stabilizer
/// generators, `per_object` random entries each, plus every deleted edge,
/// are all reported by `verify`.
pub fn fault_injection(a: &IntMatrix, seed: u64, per_object: usize) -> SuiteResult {
    let (frame, graph, gens) = run_traversal(a);
    let n = a.rows();
    let mut r = rng(seed);
    let mut out = SuiteResult::default();
    let entries = |r: &mut ChaCha8Rng| -> Vec<(usize, usize, i64)> {
        (0..per_object).map(|_| (r.gen_range(0..n), r.gen_range(0..n), if r.gen_bool(0.5) { 1 } else { -1 })).collect()
    };
    for (k, g) in gens.generators.iter().enumerate() {
        for (i, j, by) in entries(&mut r) {
            let mut bad = gens.clone();
            bad.generators[k] = bump(g.matrix(), i, j, by);
            out.cases += 1;
            out.check(!verify(&frame, &graph, &bad).is_ok(), || format!("generator {k} entry ({i}, {j}) {by:+}"));
        }
    }
    for (e_idx, e) in graph.edges.iter().enumerate() {
        let base = e.connecting.as_ref().map_or_else(|| IntMatrix::identity(n), |c| c.matrix().clone());
        for (i, j, by) in entries(&mut r) {
            let mut bad = graph.clone();
            bad.edges[e_idx].connecting = Some(bump(&base, i, j, by));
            out.cases += 1;
            out.check(!verify(&frame, &bad, &gens).is_ok(), || format!("edge {e_idx} entry ({i}, {j}) {by:+}"));
        }
    }
    for (c, s) in graph.stabilizers.iter().enumerate() {
        for (k, g) in s.generators().iter().enumerate() {
            for (i, j, by) in entries(&mut r) {
                let mut gs = s.generators().to_vec();
                gs[k] = bump(g.matrix(), i, j, by);
                let mut bad = graph.clone();
                bad.stabilizers[c] = hyplat::pdlat::FiniteMatrixGroup::new(n, gs, s.order());
                out.cases += 1;
                out.check(!verify(&frame, &bad, &gens).is_ok(), || format!("stabilizer {c} generator {k} entry ({i}, {j}) {by:+}"));
            }
        }
    }
    for e_idx in 0..graph.edges.len() {
        let mut bad = graph.clone();
        bad.edges.remove(e_idx);
        out.cases += 1;
        out.check(!verify(&frame, &bad, &gens).is_ok(), || format!("deleted edge {e_idx}"));
    }
    out
}

/// Repeated traversals give identical debug output.
pub fn determinism(runs: usize) -> SuiteResult {
    let mut out = SuiteResult::default();
    for (name, a) in named_forms() {
        out.cases += 1;
        let render = || {
            let (_, graph, gens) = run_traversal(&a);
            format!("{graph:?}{gens:?}")
        };
        let first = render();
        out.check((1..runs).all(|_| render() == first), || name.clone());
    }
    out
}

const NEGATIVE: [i64; 6] = [1, 2, 3, 4, 8, 9];
const POSITIVE: [i64; 9] = [1, 1, 1, 2, 3, 4, 8, 9, 18];

/// A hyperbolic form with a fillable prime, disguised by a small unimodular
/// change of basis.
pub fn fillable_form(rng: &mut ChaCha8Rng, n: usize) -> IntMatrix {
    loop {
        let mut d = vec![int(-*NEGATIVE.choose(rng).unwrap())];
        d.extend((1..n).map(|_| int(*POSITIVE.choose(rng).unwrap())));
        let mut u = IntMatrix::identity(n);
        for _ in 0..n {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if a != b {
                u.add_row_multiple(a, b, &int(rng.gen_range(-1..=1)));
            }
        }
        let a = u.congruence(&IntMatrix::diagonal(&d));
        let l = LatticeInSpace::new(&a).unwrap();
        if !hyplat::watson::fillable_primes(&l).unwrap().is_empty() {
            return a;
        }
    }
}

/// Random 3×3 and 4×4 forms: half with a fillable prime, half arbitrary.
pub fn watson_cases(seed: u64, count: usize) -> Vec<IntMatrix> {
    let mut r = rng(seed);
    (0..count)
        .map(|i| {
            let n = if i % 3 == 2 { 4 } else { 3 };
            if i % 2 == 0 {
                fillable_form(&mut r, n)
            } else {
                random_hyperbolic(&mut r, n, 3).0
            }
        })
        .collect()
}

/// Determinant and exponent invariants of the Watson lattice, and mutual
/// generator membership of the direct and recovered groups when `|det| ≤ 64`.
/// Returns the suite result and the number of membership checks.
pub fn watson_invariants(seed: u64, count: usize) -> (SuiteResult, usize) {
    let mut out = SuiteResult::default();
    let mut membership = 0;
    for a in watson_cases(seed, count) {
        out.cases += 1;
        let l = LatticeInSpace::new(&a).unwrap();
        let (w, chain) = watson(&l).unwrap();
        let ratio = det_ratio(&l, &w);
        let square = ratio.as_ref().is_some_and(|r| exact_sqrt(r).is_some());
        out.check(square, || format!("{a}: ratio {ratio:?} is not a square"));
        let supported =
            ratio.as_ref().is_some_and(|r| r.is_one() == chain.is_empty() && prime_support(r).iter().all(|p| chain.contains(p)));
        out.check(supported, || format!("{a}: ratio {ratio:?} not supported on {chain:?}"));
        out.check(has_squarefree_exponent(&w).unwrap(), || format!("{a}: exponent of the Watson lattice"));
        if a.det().abs() > BigInt::from(64) {
            continue;
        }
        membership += 1;
        let gw = w.integral_gram().unwrap();
        let (fw, graph_w, gens_w) = run_traversal(&gw);
        let (fl, graph_l, gens_l) = run_traversal(&a);
        let recovered = recover_aut(&l, &w, &gens_w, Some(200_000)).unwrap();
        out.check(recovered.generators.iter().all(|g| g.preserves(&a)), || format!("{a}: recovered generators preserve the form"));
        let direct = Traversal { frame: &fl, graph: &graph_l, generators: &gens_l };
        let via_w = Traversal { frame: &fw, graph: &graph_w, generators: &gens_w };
        let orbit = LatticeOrbit::new(&l, &w, &gens_w, Some(200_000)).unwrap();
        let rec_in_direct = recovered.generators.iter().all(|g| in_traversal_group(&direct, g.matrix()).unwrap());
        out.check(rec_in_direct, || format!("{a}: recovered generator outside the direct group"));
        let direct_in_rec = gens_l.generators.iter().all(|g| in_recovered_group(&orbit, &via_w, &recovered, g.matrix()).unwrap());
        out.check(direct_in_rec, || format!("{a}: direct generator outside the recovered group"));
    }
    (out, membership)
}
