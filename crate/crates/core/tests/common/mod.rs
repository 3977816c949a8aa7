//! Brute-force oracles and random instance generators shared by the
//! integration tests.

#![allow(dead_code)]

pub mod suites;

use hyplat::cone::{make_frame, ConeFrame, ConeMembership};
use hyplat::linalg::{dot, int, is_zero_vec, vec_mat, IntVector};
use hyplat::{IntMatrix, Rat};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn first_example() -> IntMatrix {
    IntMatrix::from_i64_rows(&[&[-1, -3, -1], &[-3, 14, 8], &[-1, 8, 11]])
}

pub fn watson_example() -> IntMatrix {
    IntMatrix::from_i64_rows(&[&[17, -17, 20, -9], &[-17, -25, 15, -6], &[20, 15, 4, -2], &[-9, -6, -2, 1]])
}

/// `diag(-1, 1, ..., 1)`
pub fn standard_form(n: usize) -> IntMatrix {
    let mut d = vec![int(1); n];
    d[0] = int(-1);
    IntMatrix::diagonal(&d)
}

/// `2 I` with `-1` at adjacent pairs, vertices numbered from 1.
pub fn graph_gram(n: usize, edges: &[(usize, usize)]) -> IntMatrix {
    let mut m = IntMatrix::identity(n).scale(&int(2));
    for &(a, b) in edges {
        m[(a - 1, b - 1)] = int(-1);
        m[(b - 1, a - 1)] = int(-1);
    }
    m
}

pub fn complete_graph(n: usize) -> IntMatrix {
    let edges: Vec<(usize, usize)> = (1..=n).flat_map(|a| (a + 1..=n).map(move |b| (a, b))).collect();
    graph_gram(n, &edges)
}

pub const SIX_VERTEX_EDGES: [(usize, usize); 12] =
    [(1, 2), (1, 3), (1, 6), (1, 5), (2, 3), (2, 4), (2, 6), (3, 4), (3, 5), (4, 5), (4, 6), (5, 6)];

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, bound: i64) -> IntMatrix {
    let mut m = IntMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = int(rng.gen_range(-bound..=bound));
            m[(i, j)] = v.clone();
            m[(j, i)] = v;
        }
    }
    m
}

/// A random symmetric matrix of hyperbolic signature with its frame.
pub fn random_hyperbolic(rng: &mut ChaCha8Rng, n: usize, bound: i64) -> (IntMatrix, ConeFrame) {
    loop {
        let m = random_symmetric(rng, n, bound);
        if let Ok(f) = make_frame(&m) {
            return (m, f);
        }
    }
}

/// A random integral point of the open cone `V1`.
pub fn random_point(rng: &mut ChaCha8Rng, frame: &ConeFrame, spread: i64) -> IntVector {
    loop {
        let mult = int(rng.gen_range(1..=3));
        let x: IntVector = frame.anchor1().iter().map(|a| a * &mult + int(rng.gen_range(-spread..=spread))).collect();
        if frame.in_v1_int(&x) == ConeMembership::Interior {
            return x;
        }
    }
}

/// A random positive definite Gram matrix `B B^tr`.
pub fn random_pd(rng: &mut ChaCha8Rng, n: usize, bound: i64) -> IntMatrix {
    loop {
        let b = IntMatrix::new(n, n, (0..n * n).map(|_| int(rng.gen_range(-bound..=bound))).collect());
        if !b.det().is_zero() {
            return b.congruence(&IntMatrix::identity(n));
        }
    }
}

pub fn floor_sqrt_rat(r: &Rat) -> BigInt {
    if !r.is_positive() {
        return BigInt::zero();
    }
    (r.numer() / r.denom()).sqrt() + 1
}

/// Every integer vector in the box `|v_i| ≤ radius_i`.
pub fn box_points(radius: &[i64]) -> Vec<IntVector> {
    let mut out = vec![Vec::new()];
    for &r in radius {
        let mut next = Vec::with_capacity(out.len() * (2 * r as usize + 1));
        for v in &out {
            for c in -r..=r {
                let mut w: IntVector = v.clone();
                w.push(int(c));
                next.push(w);
            }
        }
        out = next;
    }
    out
}

/// `D` vectors with `x · d ≤ c` by exhaustive search in a box large enough
/// to contain them: `d_i^2 ≤ 2c^2/N (A_ii + 2 (xA)_i^2 / N)`.
pub fn d_box_oracle(frame: &ConeFrame, x: &[BigInt], c: &BigInt) -> Vec<(IntVector, BigInt)> {
    let a = frame.gram();
    let n = frame.dim();
    let norm = -frame.lattice().norm(x);
    let xa = vec_mat(x, a);
    let nq = Rat::from_integer(norm.clone());
    let cq = Rat::from_integer(c.clone());
    let radius: Vec<i64> = (0..n)
        .map(|i| {
            let xi = Rat::from_integer(xa[i].clone());
            let aii = Rat::from_integer(a[(i, i)].clone());
            let r2 = Rat::from_integer(int(2)) * &cq * &cq / &nq * (aii + Rat::from_integer(int(2)) * &xi * &xi / &nq);
            floor_sqrt_rat(&r2).to_i64().expect("small box")
        })
        .collect();
    let mut out: Vec<(IntVector, BigInt)> = box_points(&radius)
        .into_iter()
        .filter(|d| !is_zero_vec(d) && frame.in_v2_int(d).in_closure())
        .map(|d| {
            let p = dot(x, &d);
            (d, p)
        })
        .filter(|(_, p)| p <= c)
        .collect();
    out.sort_by(|u, v| (&u.1, &u.0).cmp(&(&v.1, &v.0)));
    out
}

/// Box radii `sqrt(b (G^-1)_ii)` around `t` for the quadratic form `G`,
/// evaluated in machine integers after clearing denominators.
pub fn pd_box(g: &IntMatrix, target: &[Rat], bound: &Rat) -> Vec<(IntVector, Rat)> {
    let n = g.rows();
    let inv = g.to_rat().inverse().expect("nonsingular");
    let den = target.iter().fold(BigInt::from(1), |acc, t| num_integer::Integer::lcm(&acc, t.denom()));
    let d = den.to_i128().expect("small denominator");
    let scaled: Vec<i128> = target.iter().map(|t| (t * Rat::from_integer(den.clone())).to_integer().to_i128().expect("small")).collect();
    let gi: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| g[(i, j)].to_i128().expect("small")).collect()).collect();
    let (bn, bd) = (bound.numer().to_i128().expect("small"), bound.denom().to_i128().expect("small"));
    let centers: Vec<i64> = target.iter().map(|t| t.round().to_integer().to_i64().expect("small")).collect();
    let radius: Vec<i64> = (0..n).map(|i| floor_sqrt_rat(&(bound * &inv[(i, i)])).to_i64().expect("small box") + 1).collect();
    let mut out = Vec::new();
    let mut off = vec![0i64; n];
    for (k, r) in radius.iter().enumerate() {
        off[k] = -r;
    }
    loop {
        let v: Vec<i64> = off.iter().zip(&centers).map(|(o, c)| o + c).collect();
        let diff: Vec<i128> = v.iter().zip(&scaled).map(|(a, t)| *a as i128 * d - t).collect();
        let mut q = 0i128;
        for i in 0..n {
            for j in 0..n {
                q += diff[i] * gi[i][j] * diff[j];
            }
        }
        if q * bd <= bn * d * d {
            out.push((v.iter().map(|&c| int(c)).collect(), Rat::new(BigInt::from(q), BigInt::from(d * d))));
        }
        // next point of the box
        let mut k = 0;
        loop {
            if k == n {
                out.sort();
                return out;
            }
            if off[k] < radius[k] {
                off[k] += 1;
                break;
            }
            off[k] = -radius[k];
            k += 1;
        }
    }
}

/// `|{g : g G g^tr = G}|` by backtracking over rows of the right norms.
pub fn brute_force_aut_order(g: &IntMatrix) -> u64 {
    let n = g.rows();
    let max = (0..n).map(|i| g[(i, i)].clone()).max().expect("nonempty");
    let zero = vec![Rat::zero(); n];
    let cands: Vec<IntVector> = pd_box(g, &zero, &Rat::from_integer(max)).into_iter().map(|(v, _)| v).collect();
    let prod = |u: &IntVector, v: &IntVector| -> BigInt {
        let mut s = BigInt::zero();
        for i in 0..n {
            for j in 0..n {
                s += &u[i] * &g[(i, j)] * &v[j];
            }
        }
        s
    };
    fn rec(
        k: usize,
        n: usize,
        rows: &mut Vec<IntVector>,
        cands: &[IntVector],
        g: &IntMatrix,
        prod: &dyn Fn(&IntVector, &IntVector) -> BigInt,
    ) -> u64 {
        if k == n {
            return 1;
        }
        let mut count = 0;
        for c in cands {
            if prod(c, c) != g[(k, k)] {
                continue;
            }
            if (0..k).all(|i| prod(&rows[i], c) == g[(i, k)]) {
                rows.push(c.clone());
                count += rec(k + 1, n, rows, cands, g, prod);
                rows.pop();
            }
        }
        count
    }
    rec(0, n, &mut Vec::new(), &cands, g, &prod)
}

/// Extreme rays of `{r : r · d ≥ 0}` from all `(n-1)`-subsets of the
/// inequalities, primitive and sorted.
pub fn rays_by_subsets(ineqs: &[IntVector], n: usize) -> Vec<IntVector> {
    let mut out: Vec<IntVector> = Vec::new();
    let m = ineqs.len();
    let mut idx: Vec<usize> = (0..n - 1).collect();
    if m < n - 1 {
        return out;
    }
    loop {
        let rows: Vec<IntVector> = idx.iter().map(|&i| ineqs[i].clone()).collect();
        let mat = IntMatrix::from_rows(&rows, n);
        if mat.rank() == n - 1 {
            let k = hyplat::linalg::kernel_saturated(&mat.transpose());
            let r = k.row(0).to_vec();
            for s in [1i64, -1] {
                let v: IntVector = r.iter().map(|c| c * s).collect();
                if ineqs.iter().all(|d| !dot(&v, d).is_negative()) && !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        // next combination
        let mut i = n - 1;
        loop {
            if i == 0 {
                out.sort();
                return out;
            }
            i -= 1;
            if idx[i] < m - (n - 1 - i) {
                idx[i] += 1;
                for j in i + 1..n - 1 {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}
