//! Positive definite lattices: exact Fincke–Pohst enumeration, automorphism
//! groups and isometries (Plesken–Souvignier style backtracking).

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{
    is_positive_definite, lll_reduce, rat_dot, rat_vec_mat, to_rat_vec, unimodular_inverse, vec_mat, IntMatrix, IntVector, Rat, RatMatrix,
    UnimodularMap,
};

/// A lattice `Z^k` with a positive definite rational Gram matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PDLattice {
    gram: RatMatrix,
}

impl PDLattice {
    pub fn new(gram: RatMatrix) -> Result<Self> {
        if gram.rows() != gram.cols() || !gram.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        if !is_positive_definite(&gram) {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(PDLattice { gram })
    }

    pub fn from_int(gram: &IntMatrix) -> Result<Self> {
        PDLattice::new(gram.to_rat())
    }

    pub fn gram(&self) -> &RatMatrix {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn norm(&self, v: &[BigInt]) -> Rat {
        let r = to_rat_vec(v);
        rat_dot(&rat_vec_mat(&r, &self.gram), &r)
    }

    /// The Gram matrix scaled by the least common denominator.
    pub fn integral_gram(&self) -> IntMatrix {
        self.gram.scale_to_int(&self.gram.denominator())
    }
}

/// A finite group of integral matrices given by generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteMatrixGroup {
    dim: usize,
    generators: Vec<UnimodularMap>,
    order: Option<u128>,
}

impl FiniteMatrixGroup {
    pub fn new(dim: usize, generators: Vec<UnimodularMap>, order: Option<u128>) -> Self {
        FiniteMatrixGroup { dim, generators, order }
    }

    pub fn trivial(dim: usize) -> Self {
        FiniteMatrixGroup { dim, generators: Vec::new(), order: Some(1) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[UnimodularMap] {
        &self.generators
    }

    pub fn order(&self) -> Option<u128> {
        self.order
    }

    /// All elements by closure, or `None` if there are more than `cap`.
    pub fn elements(&self, cap: usize) -> Option<Vec<IntMatrix>> {
        let id = IntMatrix::identity(self.dim);
        let mut seen: HashSet<IntMatrix> = HashSet::from([id.clone()]);
        let mut out = vec![id];
        let mut i = 0;
        while i < out.len() {
            for g in &self.generators {
                let h = &out[i] * g.matrix();
                if seen.insert(h.clone()) {
                    if out.len() >= cap {
                        return None;
                    }
                    out.push(h);
                }
            }
            i += 1;
        }
        out.sort();
        Some(out)
    }
}

/// Fincke–Pohst enumerator with the LLL reduction and the Cholesky data
/// computed once, so repeated queries with different centers and bounds
/// are cheap to set up.
#[derive(Clone, Debug)]
pub struct Enumerator {
    n: usize,
    // reduced basis = u · standard basis
    u: IntMatrix,
    u_inv_rat: RatMatrix,
    // Q(x) = sum_i q[i] (x_i + sum_{j>i} r[i][j] x_j)^2 in reduced coordinates
    q: Vec<Rat>,
    r: Vec<Vec<Rat>>,
}

impl Enumerator {
    pub fn new(lattice: &PDLattice) -> Result<Self> {
        let n = lattice.rank();
        let (g, u) = lll_reduce(lattice.gram())?;
        let mut q = vec![Rat::zero(); n];
        let mut r = vec![vec![Rat::zero(); n]; n];
        for i in 0..n {
            let mut qi = g[(i, i)].clone();
            for k in 0..i {
                qi -= &q[k] * &r[k][i] * &r[k][i];
            }
            for j in i + 1..n {
                let mut s = g[(i, j)].clone();
                for k in 0..i {
                    s -= &q[k] * &r[k][i] * &r[k][j];
                }
                r[i][j] = s / &qi;
            }
            r[i][i] = Rat::one();
            q[i] = qi;
        }
        let u_inv_rat = u.to_rat().inverse()?;
        Ok(Enumerator { n, u, u_inv_rat, q, r })
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    /// Visit every `v` with `(v - target) G (v - target)^tr ≤ bound`, passing
    /// `v` in the original coordinates and the exact distance.
    pub fn for_each_close<F: FnMut(IntVector, Rat)>(&self, target: &[Rat], bound: &Rat, mut visit: F) -> Result<()> {
        if bound.is_negative() {
            return Err(Error::NegativeBound);
        }
        if target.len() != self.n {
            return Err(Error::Dimension("target length differs from lattice rank".into()));
        }
        let n = self.n;
        if n == 0 {
            visit(Vec::new(), Rat::zero());
            return Ok(());
        }
        let t = rat_vec_mat(target, &self.u_inv_rat);
        let mut x: Vec<BigInt> = vec![BigInt::zero(); n];
        let mut hi: Vec<BigInt> = vec![BigInt::zero(); n];
        let mut rem: Vec<Rat> = vec![Rat::zero(); n + 1];
        let mut center: Vec<Rat> = vec![Rat::zero(); n];
        rem[n] = bound.clone();
        let mut level = n - 1;
        let mut fresh = true;
        loop {
            if fresh {
                // center c_i = t_i - sum_{j>i} r_ij (x_j - t_j)
                let mut c = t[level].clone();
                for j in level + 1..n {
                    if !self.r[level][j].is_zero() {
                        c -= &self.r[level][j] * (Rat::from_integer(x[j].clone()) - &t[j]);
                    }
                }
                match interval(&c, &rem[level + 1], &self.q[level]) {
                    Some((lo, h)) => {
                        x[level] = lo;
                        hi[level] = h;
                        center[level] = c;
                    }
                    None => {
                        if level == n - 1 {
                            return Ok(());
                        }
                        level += 1;
                        fresh = false;
                        continue;
                    }
                }
            } else {
                x[level] += 1;
                if x[level] > hi[level] {
                    if level == n - 1 {
                        return Ok(());
                    }
                    level += 1;
                    continue;
                }
            }
            let d = Rat::from_integer(x[level].clone()) - &center[level];
            rem[level] = &rem[level + 1] - &self.q[level] * &d * &d;
            if level == 0 {
                let dist = bound - &rem[0];
                visit(vec_mat(&x, &self.u), dist);
                fresh = false;
            } else {
                level -= 1;
                fresh = true;
            }
        }
    }

    pub fn close_vectors(&self, target: &[Rat], bound: &Rat) -> Result<Vec<(IntVector, Rat)>> {
        let mut out = Vec::new();
        self.for_each_close(target, bound, |v, d| out.push((v, d)))?;
        out.sort();
        Ok(out)
    }

    /// Nonzero vectors of norm at most `bound`, one per `±` pair.
    pub fn short_vectors(&self, bound: &Rat) -> Result<Vec<(IntVector, Rat)>> {
        let zero = vec![Rat::zero(); self.n];
        let mut out = Vec::new();
        self.for_each_close(&zero, bound, |v, d| {
            if let Some(first) = v.iter().find(|c| !c.is_zero()) {
                if first.is_positive() {
                    out.push((v, d));
                }
            }
        })?;
        out.sort();
        Ok(out)
    }
}

/// Integers `v` with `q (v - c)^2 ≤ rem`, as a closed interval.
fn interval(c: &Rat, rem: &Rat, q: &Rat) -> Option<(BigInt, BigInt)> {
    if rem.is_negative() {
        return None;
    }
    // (v·cd - cn)^2 ≤ (rem/q)·cd^2 =: T ; integer left side, so compare with floor(T)
    let s = rem / q;
    let (cn, cd) = (c.numer(), c.denom());
    let t = (s.numer() * cd * cd) / s.denom();
    let root = t.sqrt();
    let lo = ceil_div(&(cn - &root), cd);
    let hi = floor_div(&(cn + &root), cd);
    if lo > hi {
        None
    } else {
        Some((lo, hi))
    }
}

fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    num_integer::Integer::div_floor(a, b)
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -num_integer::Integer::div_floor(&-a, b)
}

pub fn short_vectors(lattice: &PDLattice, bound: &Rat) -> Result<Vec<(IntVector, Rat)>> {
    if bound.is_negative() {
        return Err(Error::NegativeBound);
    }
    Enumerator::new(lattice)?.short_vectors(bound)
}

pub fn close_vectors(lattice: &PDLattice, target: &[Rat], bound: &Rat) -> Result<Vec<(IntVector, Rat)>> {
    if bound.is_negative() {
        return Err(Error::NegativeBound);
    }
    Enumerator::new(lattice)?.close_vectors(target, bound)
}

// ---------------------------------------------------------------------------
// automorphisms and isometries

/// Short vectors and inner product tables of one reduced lattice, in
/// machine integers.
struct VectorSystem {
    n: usize,
    gram: Vec<Vec<i128>>,
    vecs: Vec<Vec<i64>>,
    // vecs[k] · gram, cached
    vg: Vec<Vec<i128>>,
    norms: Vec<i128>,
    index: HashMap<Vec<i64>, usize>,
}

fn to_i128(x: &BigInt) -> Result<i128> {
    let v = x.to_i128().ok_or_else(|| Error::Overflow(x.to_string()))?;
    if v.unsigned_abs() > 1 << 60 {
        return Err(Error::Overflow(x.to_string()));
    }
    Ok(v)
}

impl VectorSystem {
    fn new(gram: &IntMatrix, bound: &BigInt) -> Result<Self> {
        let n = gram.rows();
        let g: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| to_i128(&gram[(i, j)])).collect::<Result<_>>()).collect::<Result<_>>()?;
        let lat = PDLattice::from_int(gram)?;
        let short = Enumerator::new(&lat)?.short_vectors(&Rat::from_integer(bound.clone()))?;
        let mut vecs = Vec::with_capacity(2 * short.len());
        for (v, _) in short {
            let w: Vec<i64> = v
                .iter()
                .map(|c| c.to_i64().filter(|c| c.unsigned_abs() < 1 << 20).ok_or_else(|| Error::Overflow(c.to_string())))
                .collect::<Result<_>>()?;
            vecs.push(w.iter().map(|c| -c).collect());
            vecs.push(w);
        }
        vecs.sort();
        let vg: Vec<Vec<i128>> = vecs.iter().map(|v| (0..n).map(|j| (0..n).map(|i| v[i] as i128 * g[i][j]).sum()).collect()).collect();
        let norms = vecs.iter().zip(&vg).map(|(v, w)| dot_i(v, w)).collect();
        let index = vecs.iter().enumerate().map(|(k, v)| (v.clone(), k)).collect();
        Ok(VectorSystem { n, gram: g, vecs, vg, norms, index })
    }

    fn ip(&self, a: usize, b: usize) -> i128 {
        dot_i(&self.vecs[b], &self.vg[a])
    }

    fn unit(&self, i: usize) -> Option<usize> {
        let mut e = vec![0i64; self.n];
        e[i] = 1;
        self.index.get(&e).copied()
    }

    /// For a candidate image `v` of basis vector `i` of a lattice with Gram
    /// `target`: counts of vectors `w` of norm `target[j][j]` with
    /// `v·w = target[i][j]`, over all `j`.
    fn fingerprint(&self, v: usize, i: usize, target: &[Vec<i128>]) -> Vec<u32> {
        let mut fp = vec![0u32; self.n];
        for w in 0..self.vecs.len() {
            let p = self.ip(v, w);
            for j in 0..self.n {
                if self.norms[w] == target[j][j] && p == target[i][j] {
                    fp[j] += 1;
                }
            }
        }
        fp
    }

    fn act(&self, v: usize, g: &[Vec<i64>]) -> Option<usize> {
        let x = &self.vecs[v];
        let img: Vec<i64> = (0..self.n).map(|j| (0..self.n).map(|i| x[i] * g[i][j]).sum()).collect();
        self.index.get(&img).copied()
    }
}

fn dot_i(a: &[i64], b: &[i128]) -> i128 {
    a.iter().zip(b).map(|(&x, y)| x as i128 * y).sum()
}

/// Backtracking search for matrices whose rows (vectors of `sys`) have the
/// inner products of `target`.
struct Backtrack<'a> {
    sys: &'a VectorSystem,
    target: &'a [Vec<i128>],
    // candidates for row i: right norm and fingerprint
    cands: Vec<Vec<usize>>,
}

impl<'a> Backtrack<'a> {
    fn new(sys: &'a VectorSystem, target: &'a [Vec<i128>], target_fps: &[Vec<u32>]) -> Self {
        let n = sys.n;
        let cands = (0..n)
            .map(|i| {
                (0..sys.vecs.len()).filter(|&v| sys.norms[v] == target[i][i] && sys.fingerprint(v, i, target) == target_fps[i]).collect()
            })
            .collect();
        Backtrack { sys, target, cands }
    }

    fn compatible(&self, rows: &[usize], level: usize, v: usize) -> bool {
        rows[..level].iter().enumerate().all(|(j, &w)| self.sys.ip(w, v) == self.target[j][level])
    }

    /// Extend `rows[..level]` to a full solution.
    fn complete(&self, rows: &mut Vec<usize>, level: usize) -> bool {
        if level == self.sys.n {
            return true;
        }
        for &v in &self.cands[level] {
            if self.compatible(rows, level, v) {
                rows.push(v);
                if self.complete(rows, level + 1) {
                    return true;
                }
                rows.pop();
            }
        }
        false
    }
}

fn rows_to_matrix(sys: &VectorSystem, rows: &[usize]) -> Vec<Vec<i64>> {
    rows.iter().map(|&r| sys.vecs[r].clone()).collect()
}

fn small_to_int(m: &[Vec<i64>]) -> IntMatrix {
    let n = m.len();
    IntMatrix::new(n, n, m.iter().flatten().map(|&x| BigInt::from(x)).collect())
}

fn max_diag(g: &IntMatrix) -> BigInt {
    (0..g.rows()).map(|i| g[(i, i)].clone()).max().unwrap_or_default()
}

/// Full automorphism group `{g : g G g^tr = G}` with its order.
pub fn automorphism_group(lattice: &PDLattice) -> Result<FiniteMatrixGroup> {
    let n = lattice.rank();
    if n == 0 {
        return Ok(FiniteMatrixGroup::trivial(0));
    }
    let (reduced, u) = lll_reduce(&lattice.integral_gram().to_rat())?;
    let g = reduced.to_int().expect("integral");
    let sys = VectorSystem::new(&g, &max_diag(&g))?;
    let target = sys.gram.clone();
    let basis: Vec<usize> = (0..n).map(|i| sys.unit(i).expect("basis vector is short")).collect();
    let fps: Vec<Vec<u32>> = (0..n).map(|i| sys.fingerprint(basis[i], i, &target)).collect();
    let bt = Backtrack::new(&sys, &target, &fps);

    let mut gens: Vec<Vec<Vec<i64>>> = Vec::new();
    let mut order: u128 = 1;
    for level in (0..n).rev() {
        // generators found so far fix basis[..level] pointwise
        let mut orbit = orbit_of(&sys, basis[level], &gens);
        let mut failed: HashSet<usize> = HashSet::new();
        for &c in &bt.cands[level] {
            if orbit.contains(&c) || failed.contains(&c) {
                continue;
            }
            let mut rows: Vec<usize> = basis[..level].to_vec();
            if !bt.compatible(&rows, level, c) {
                failed.insert(c);
                continue;
            }
            rows.push(c);
            if bt.complete(&mut rows, level + 1) {
                gens.push(rows_to_matrix(&sys, &rows));
                orbit = orbit_of(&sys, basis[level], &gens);
            } else {
                failed.extend(orbit_of(&sys, c, &gens));
            }
        }
        order = order.checked_mul(orbit.len() as u128).ok_or_else(|| Error::Overflow("group order".into()))?;
    }
    let u_inv = unimodular_inverse(&u)?;
    let generators = gens.iter().map(|m| UnimodularMap::new_unchecked(&(&u_inv * &small_to_int(m)) * &u)).collect();
    Ok(FiniteMatrixGroup::new(n, generators, Some(order)))
}

fn orbit_of(sys: &VectorSystem, start: usize, gens: &[Vec<Vec<i64>>]) -> HashSet<usize> {
    let mut seen = HashSet::from([start]);
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for g in gens {
            let w = sys.act(v, g).expect("automorphism permutes short vectors");
            if seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen
}

/// Some integral `h` with `h G2 h^tr = G1`, if the lattices are isometric.
pub fn isometry(l1: &PDLattice, l2: &PDLattice) -> Result<Option<UnimodularMap>> {
    let n = l1.rank();
    if n != l2.rank() {
        return Err(Error::Dimension("isometry between lattices of different rank".into()));
    }
    if n == 0 {
        return Ok(Some(UnimodularMap::identity(0)));
    }
    if l1.gram().det() != l2.gram().det() {
        return Ok(None);
    }
    // common integral scale
    let den = num_integer::Integer::lcm(&l1.gram().denominator(), &l2.gram().denominator());
    let g1 = l1.gram().scale_to_int(&den);
    let g2 = l2.gram().scale_to_int(&den);
    let (r1, u1) = lll_reduce(&g1.to_rat())?;
    let (r2, u2) = lll_reduce(&g2.to_rat())?;
    let r1 = r1.to_int().expect("integral");
    let r2 = r2.to_int().expect("integral");
    let bound = max_diag(&r1);
    let sys1 = VectorSystem::new(&r1, &bound)?;
    let sys2 = VectorSystem::new(&r2, &bound)?;
    if sys1.vecs.len() != sys2.vecs.len() {
        return Ok(None);
    }
    let mut norms1 = sys1.norms.clone();
    let mut norms2 = sys2.norms.clone();
    norms1.sort();
    norms2.sort();
    if norms1 != norms2 {
        return Ok(None);
    }
    let target = sys1.gram.clone();
    let fps: Vec<Vec<u32>> = (0..n).map(|i| sys1.fingerprint(sys1.unit(i).expect("basis vector is short"), i, &target)).collect();
    let bt = Backtrack::new(&sys2, &target, &fps);
    let mut rows = Vec::with_capacity(n);
    if !bt.complete(&mut rows, 0) {
        return Ok(None);
    }
    let x = small_to_int(&rows_to_matrix(&sys2, &rows));
    let h = &(&unimodular_inverse(&u1)? * &x) * &u2;
    debug_assert_eq!(h.congruence(&g2), g1);
    Ok(Some(UnimodularMap::new_unchecked(h)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{int_vec, rat};

    fn lat(rows: &[&[i64]]) -> PDLattice {
        PDLattice::from_int(&IntMatrix::from_i64_rows(rows)).unwrap()
    }

    fn r(n: i64) -> Rat {
        Rat::from_integer(BigInt::from(n))
    }

    #[test]
    fn short_vectors_examples() {
        let z2 = lat(&[&[1, 0], &[0, 1]]);
        let sv = short_vectors(&z2, &r(1)).unwrap();
        assert_eq!(sv, vec![(int_vec(&[0, 1]), r(1)), (int_vec(&[1, 0]), r(1))]);
        let a2 = lat(&[&[2, 1], &[1, 2]]);
        let sv = short_vectors(&a2, &r(2)).unwrap();
        assert_eq!(sv.len(), 3);
        assert!(sv.iter().all(|(_, n)| *n == r(2)));
        assert!(short_vectors(&z2, &r(0)).unwrap().is_empty());
        assert_eq!(short_vectors(&z2, &r(-1)).unwrap_err(), Error::NegativeBound);
    }

    #[test]
    fn close_vectors_examples() {
        let z2 = lat(&[&[1, 0], &[0, 1]]);
        let cv = close_vectors(&z2, &[r(0), r(0)], &r(1)).unwrap();
        assert_eq!(cv.len(), 5);
        let z1 = lat(&[&[1]]);
        let cv = close_vectors(&z1, &[rat(1, 2)], &rat(1, 4)).unwrap();
        assert_eq!(cv, vec![(int_vec(&[0]), rat(1, 4)), (int_vec(&[1]), rat(1, 4))]);
    }

    #[test]
    fn automorphism_orders() {
        let z3 = lat(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        assert_eq!(automorphism_group(&z3).unwrap().order(), Some(48));
        let a2 = lat(&[&[2, 1], &[1, 2]]);
        let g = automorphism_group(&a2).unwrap();
        assert_eq!(g.order(), Some(12));
        assert_eq!(g.elements(100).unwrap().len(), 12);
        assert_eq!(automorphism_group(&lat(&[&[1]])).unwrap().order(), Some(2));
        let z4 = lat(&[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1]]);
        assert_eq!(automorphism_group(&z4).unwrap().order(), Some(384));
    }

    #[test]
    fn generators_preserve_gram() {
        let l = lat(&[&[4, 1, 0], &[1, 6, 2], &[0, 2, 10]]);
        let g = automorphism_group(&l).unwrap();
        let gram = l.integral_gram();
        for h in g.generators() {
            assert!(h.preserves(&gram));
            assert!(h.matrix().det().abs().is_one());
        }
    }

    #[test]
    fn isometry_examples() {
        let a2 = lat(&[&[2, 1], &[1, 2]]);
        let h = isometry(&a2, &a2).unwrap().unwrap();
        assert!(h.preserves(&a2.integral_gram()));
        let z2 = lat(&[&[1, 0], &[0, 1]]);
        assert!(isometry(&z2, &a2).unwrap().is_none());
        let l1 = lat(&[&[2, 0], &[0, 2]]);
        let l2 = lat(&[&[4, 2], &[2, 2]]);
        let h = isometry(&l1, &l2).unwrap().unwrap();
        assert_eq!(h.matrix().congruence(&l2.integral_gram()), l1.integral_gram());
    }
}
