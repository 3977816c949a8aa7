//! Hyperbolic dual cones, the admissible set `D = Z^n ∩ closure(V2) \ {0}`
//! and its minimal vectors.
//!
//! `V1 = {x : x A x^tr < 0, x A x0^tr < 0}` for an integral anchor `x0` of
//! negative norm, and `V2 = {d : d A^-1 d^tr < 0, d · x0^tr > 0} = -V1 · A`.
//! The pairing between the two is the standard scalar product.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{
    bilinear, content, dot, hnf, kernel_saturated, primitive, primitive_from_rat, rat_dot, rat_vec_mat, rational_diagonalize, solve_left,
    to_rat_vec, vec_mat, IntMatrix, IntVector, Rat,
};
use crate::pdlat::{Enumerator, PDLattice};

/// An integral symmetric matrix of signature `(n-1, 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramLattice {
    a: IntMatrix,
    adj: IntMatrix,
    det: BigInt,
}

impl GramLattice {
    pub fn new(a: IntMatrix) -> Result<Self> {
        if !a.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        let det = a.det();
        if det.is_zero() {
            return Err(Error::Singular);
        }
        let (_, diag) = rational_diagonalize(&a)?;
        let negative = diag.iter().filter(|d| d.is_negative()).count();
        if negative != 1 || a.rows() < 2 {
            return Err(Error::Signature { positive: diag.len() - negative, negative });
        }
        let adj = a.adjugate();
        Ok(GramLattice { a, adj, det })
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn adjugate(&self) -> &IntMatrix {
        &self.adj
    }

    pub fn det(&self) -> &BigInt {
        &self.det
    }

    /// `x A x^tr`
    pub fn norm(&self, x: &[BigInt]) -> BigInt {
        bilinear(x, &self.a, x)
    }

    /// `d A^-1 d^tr` scaled by `|det A|`, an integer with the same sign.
    pub fn dual_norm_scaled(&self, d: &[BigInt]) -> BigInt {
        let v = bilinear(d, &self.adj, d);
        if self.det.is_negative() {
            -v
        } else {
            v
        }
    }
}

/// Position of a vector relative to an open cone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConeMembership {
    Interior,
    Boundary,
    Outside,
}

impl ConeMembership {
    /// Interior or boundary.
    pub fn in_closure(self) -> bool {
        self != ConeMembership::Outside
    }
}

/// The lattice together with the anchor that fixes one component of each
/// cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeFrame {
    lattice: GramLattice,
    anchor1: IntVector,
    anchor2: IntVector,
}

pub fn make_frame(a: &IntMatrix) -> Result<ConeFrame> {
    let lattice = GramLattice::new(a.clone())?;
    let n = lattice.dim();
    let anchor1 = match (0..n).find(|&i| a[(i, i)].is_negative()) {
        Some(i) => {
            let mut e = vec![BigInt::zero(); n];
            e[i] = BigInt::one();
            e
        }
        None => {
            let (t, diag) = rational_diagonalize(a)?;
            let i = diag.iter().position(|d| d.is_negative()).expect("signature checked");
            let mut v = primitive_from_rat(t.row(i));
            if v.iter().find(|c| !c.is_zero()).is_some_and(|c| c.is_negative()) {
                v = v.iter().map(|c| -c).collect();
            }
            v
        }
    };
    ConeFrame::with_anchor(lattice, anchor1)
}

impl ConeFrame {
    pub fn with_anchor(lattice: GramLattice, anchor1: IntVector) -> Result<Self> {
        if anchor1.len() != lattice.dim() {
            return Err(Error::Dimension("anchor length".into()));
        }
        if !lattice.norm(&anchor1).is_negative() {
            return Err(Error::NotInCone);
        }
        let anchor2 = vec_mat(&anchor1, lattice.matrix()).into_iter().map(|c| -c).collect();
        Ok(ConeFrame { lattice, anchor1, anchor2 })
    }

    pub fn lattice(&self) -> &GramLattice {
        &self.lattice
    }

    pub fn gram(&self) -> &IntMatrix {
        self.lattice.matrix()
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn anchor1(&self) -> &IntVector {
        &self.anchor1
    }

    pub fn anchor2(&self) -> &IntVector {
        &self.anchor2
    }

    pub fn in_v1(&self, x: &[Rat]) -> ConeMembership {
        let ax = rat_vec_mat(x, &self.lattice.a.to_rat());
        let q = rat_dot(&ax, x);
        let s = rat_dot(&ax, &to_rat_vec(&self.anchor1));
        classify(q.is_negative(), q.is_zero(), x.iter().all(Zero::is_zero), s.is_negative())
    }

    pub fn in_v1_int(&self, x: &[BigInt]) -> ConeMembership {
        let ax = vec_mat(x, self.lattice.matrix());
        let q = dot(&ax, x);
        let s = dot(&ax, &self.anchor1);
        classify(q.is_negative(), q.is_zero(), x.iter().all(Zero::is_zero), s.is_negative())
    }

    pub fn in_v2(&self, d: &[Rat]) -> ConeMembership {
        let den = d.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
        let scaled: IntVector = d.iter().map(|x| (x * Rat::from_integer(den.clone())).to_integer()).collect();
        self.in_v2_int(&scaled)
    }

    pub fn in_v2_int(&self, d: &[BigInt]) -> ConeMembership {
        let q = self.lattice.dual_norm_scaled(d);
        let t = dot(d, &self.anchor1);
        classify(q.is_negative(), q.is_zero(), d.iter().all(Zero::is_zero), t.is_positive())
    }

    /// `-x A`, the canonical image of `V1` in `V2`.
    pub fn dual_image(&self, x: &[BigInt]) -> IntVector {
        vec_mat(x, self.gram()).into_iter().map(|c| -c).collect()
    }
}

fn classify(negative: bool, zero: bool, is_zero_vec: bool, right_side: bool) -> ConeMembership {
    if negative && right_side {
        ConeMembership::Interior
    } else if zero && (is_zero_vec || right_side) {
        ConeMembership::Boundary
    } else {
        ConeMembership::Outside
    }
}

/// Minimal vectors of a point of `V1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalVectorData {
    pub point: IntVector,
    /// `N(x) = -x A x^tr`
    pub norm: BigInt,
    /// The raw minimum `min {x · d^tr : d ∈ D}`.
    pub minimum: BigInt,
    /// Lexicographically sorted.
    pub minvecs: Vec<IntVector>,
    pub rank_of_span: usize,
}

impl MinimalVectorData {
    pub fn is_perfect(&self) -> bool {
        self.rank_of_span == self.point.len()
    }
}

/// Enumeration of `D` sliced by the pairing with a fixed point `x`.
///
/// With `y = x / content(x)`, the vectors of `D` with `y · d^tr = k` are
/// `d = k b0 + c K` where `K` is a basis of `y^⊥`. Writing
/// `d = -(k/N) y A + p` with `p ∈ y^⊥ ⊗ Q` turns `d A^-1 d^tr ≤ 0` into
/// `p A^-1 p^tr ≤ k^2 / N`, a close vector problem in the positive definite
/// lattice `K` around `-k τ`, where `τ K = b0 + y A / N`.
#[derive(Clone, Debug)]
pub struct PairingSlices {
    scale: BigInt,
    norm_y: BigInt,
    b0: IntVector,
    kernel: IntMatrix,
    tau: Vec<Rat>,
    abs_det: BigInt,
    enumerator: Enumerator,
}

impl PairingSlices {
    pub fn new(frame: &ConeFrame, x: &[BigInt]) -> Result<Self> {
        let n = frame.dim();
        if x.len() != n {
            return Err(Error::Dimension("point length".into()));
        }
        if frame.in_v1_int(x) != ConeMembership::Interior {
            return Err(Error::NotInCone);
        }
        let scale = content(x);
        let y = primitive(x);
        let lat = frame.lattice();
        let norm_y = -lat.norm(&y);
        let col = IntMatrix::from_rows(std::slice::from_ref(&y), n).transpose();
        let kernel = kernel_saturated(&col);
        debug_assert_eq!(kernel.rows(), n - 1);
        // b0 with y · b0 = 1: last row of a basis completing the kernel
        // u · col = (0,…,0,1)^tr, so the last row of u pairs to 1 with y
        let (h, u) = hnf(&col);
        debug_assert!(h[(n - 1, 0)].is_one());
        let b0 = u.row(n - 1).to_vec();
        debug_assert!(dot(&y, &b0).is_one());
        let ya = vec_mat(&y, lat.matrix());
        let nq = Rat::from_integer(norm_y.clone());
        let rhs: Vec<Rat> = b0.iter().zip(&ya).map(|(b, a)| Rat::from_integer(b.clone()) + Rat::from_integer(a.clone()) / &nq).collect();
        let tau = solve_left(&kernel.to_rat(), &rhs).ok_or_else(|| Error::Internal("kernel coordinates".into()))?;
        let sign = if lat.det().is_negative() { -BigInt::one() } else { BigInt::one() };
        let gram = kernel.congruence(lat.adjugate()).scale(&sign);
        let enumerator = Enumerator::new(&PDLattice::from_int(&gram)?)?;
        Ok(PairingSlices { scale, norm_y, b0, kernel, tau, abs_det: lat.det().abs(), enumerator })
    }

    /// The content of `x`; pairings of `x` with integral vectors are its multiples.
    pub fn scale(&self) -> &BigInt {
        &self.scale
    }

    /// All `d ∈ D` with `y · d^tr = k` (for the primitive `y`), unsorted.
    pub fn slice(&self, frame: &ConeFrame, k: &BigInt) -> Result<Vec<IntVector>> {
        let kr = Rat::from_integer(k.clone());
        let center: Vec<Rat> = self.tau.iter().map(|t| -(t * &kr)).collect();
        let bound = Rat::new(k * k * &self.abs_det, self.norm_y.clone());
        let mut out = Vec::new();
        let mut err = None;
        self.enumerator.for_each_close(&center, &bound, |c, _| {
            let mut d = vec_mat(&c, &self.kernel);
            for (di, bi) in d.iter_mut().zip(&self.b0) {
                *di += k * bi;
            }
            match frame.in_v2_int(&d) {
                ConeMembership::Outside => err = Some(Error::Internal(format!("enumerated vector outside V2: {d:?}"))),
                _ => out.push(d),
            }
        })?;
        match err {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }

    /// `N(y)` of the primitive point.
    pub fn primitive_norm(&self) -> &BigInt {
        &self.norm_y
    }
}

pub fn minimal_vectors(frame: &ConeFrame, x: &[BigInt]) -> Result<MinimalVectorData> {
    let slices = PairingSlices::new(frame, x)?;
    let mut k = BigInt::one();
    while &k <= slices.primitive_norm() {
        let mut found = slices.slice(frame, &k)?;
        if !found.is_empty() {
            found.sort();
            let rank = IntMatrix::from_rows(&found, frame.dim()).rank();
            return Ok(MinimalVectorData {
                point: x.to_vec(),
                norm: -frame.lattice().norm(x),
                minimum: &k * slices.scale(),
                minvecs: found,
                rank_of_span: rank,
            });
        }
        k += 1;
    }
    Err(Error::Internal("no vector of D found up to the pairing of -xA".into()))
}

/// All `d ∈ D` with `x · d^tr ≤ c`, ordered by pairing and then
/// lexicographically.
pub fn d_short_vectors(frame: &ConeFrame, x: &[BigInt], c: &BigInt) -> Result<Vec<(IntVector, BigInt)>> {
    let slices = PairingSlices::new(frame, x)?;
    let top = c.div_floor(slices.scale());
    let mut out = Vec::new();
    let mut k = BigInt::one();
    while k <= top {
        let mut found = slices.slice(frame, &k)?;
        found.sort();
        let pairing = &k * slices.scale();
        out.extend(found.into_iter().map(|d| (d, pairing.clone())));
        k += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{int, int_vec};

    fn h(n: usize) -> IntMatrix {
        let mut d = vec![int(1); n];
        d[0] = int(-1);
        IntMatrix::diagonal(&d)
    }

    fn first_example() -> IntMatrix {
        IntMatrix::from_i64_rows(&[&[-1, -3, -1], &[-3, 14, 8], &[-1, 8, 11]])
    }

    #[test]
    fn frames() {
        assert_eq!(make_frame(&h(3)).unwrap().anchor1(), &int_vec(&[1, 0, 0]));
        assert_eq!(make_frame(&first_example()).unwrap().anchor1(), &int_vec(&[1, 0, 0]));
        assert!(matches!(make_frame(&IntMatrix::identity(2)), Err(Error::Signature { .. })));
        let hyp = IntMatrix::from_i64_rows(&[&[0, 1], &[1, 0]]);
        let f = make_frame(&hyp).unwrap();
        assert!(f.lattice().norm(f.anchor1()).is_negative());
        let sing = IntMatrix::from_i64_rows(&[&[1, 1], &[1, 1]]);
        assert_eq!(make_frame(&sing).unwrap_err(), Error::Singular);
    }

    #[test]
    fn memberships() {
        let f = make_frame(&h(3)).unwrap();
        assert_eq!(f.in_v1_int(&int_vec(&[1, 0, 0])), ConeMembership::Interior);
        assert_eq!(f.in_v1_int(&int_vec(&[1, 1, 0])), ConeMembership::Boundary);
        assert_eq!(f.in_v1_int(&int_vec(&[-1, 0, 0])), ConeMembership::Outside);
        assert_eq!(f.in_v2_int(&int_vec(&[1, 0, 0])), ConeMembership::Interior);
        assert_eq!(f.in_v2_int(&int_vec(&[1, 1, 0])), ConeMembership::Boundary);
        let fa = make_frame(&first_example()).unwrap();
        let x = int_vec(&[2, 1, 0]);
        assert_eq!(fa.in_v1_int(&x), ConeMembership::Interior);
        assert_eq!(fa.in_v2_int(&fa.dual_image(&x)), ConeMembership::Interior);
    }

    #[test]
    fn h2_minimal_vectors() {
        let f = make_frame(&h(2)).unwrap();
        let m = minimal_vectors(&f, &int_vec(&[1, 0])).unwrap();
        assert_eq!(m.minimum, int(1));
        assert_eq!(m.minvecs, vec![int_vec(&[1, -1]), int_vec(&[1, 0]), int_vec(&[1, 1])]);
        assert!(m.is_perfect());
        assert!(d_short_vectors(&f, &int_vec(&[1, 0]), &int(0)).unwrap().is_empty());
        assert_eq!(d_short_vectors(&f, &int_vec(&[1, 0]), &int(1)).unwrap().len(), 3);
    }

    #[test]
    fn h3_and_listed_points_are_perfect() {
        let f = make_frame(&h(3)).unwrap();
        let m = minimal_vectors(&f, &int_vec(&[1, 0, 0])).unwrap();
        assert_eq!(m.minvecs.len(), 5);
        assert!(m.is_perfect());
        let fa = make_frame(&first_example()).unwrap();
        assert!(minimal_vectors(&fa, &int_vec(&[2, 1, 0])).unwrap().is_perfect());
    }

    #[test]
    fn scaling_the_point() {
        let fa = make_frame(&first_example()).unwrap();
        let x = int_vec(&[2, 1, -1]);
        let base = minimal_vectors(&fa, &x).unwrap();
        for c in [2, 3] {
            let cx: IntVector = x.iter().map(|v| v * c).collect();
            let m = minimal_vectors(&fa, &cx).unwrap();
            assert_eq!(m.minvecs, base.minvecs);
            assert_eq!(m.minimum, &base.minimum * c);
        }
    }
}
