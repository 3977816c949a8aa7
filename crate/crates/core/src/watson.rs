//! Discriminant reduction by `p`-fillings, and recovery of `Aut(L)` inside
//! the automorphism group of the Watson lattice.
//!
//! All lattices live in the ambient space of the input lattice `Z^n` with
//! form `A`. A filling replaces `L` by `pL + (L ∩ p^2 L^#)` with the form
//! divided by `p^2`, which lowers every `p`-adic Jordan level of at least 2 by
//! two. The filled lattice is canonical in `L`, so `Aut(L)` is literally a
//! subgroup of its automorphism group.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::cone::ConeFrame;
use crate::error::{Error, Result};
use crate::linalg::{elementary_divisors, kernel_saturated, lattice_basis, unimodular_inverse, IntMatrix, Rat, RatMatrix, UnimodularMap};
use crate::orbit::{Letter, Orbit};
use crate::voronoi::{express, GeneratorSet, ResidueGraph};

/// A full-rank lattice in the ambient space, with the ambient form scaled by
/// `scale`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeInSpace {
    form: IntMatrix,
    basis: IntMatrix,
    scale: Rat,
    gram: RatMatrix,
}

impl LatticeInSpace {
    /// `Z^n` with the form `a`.
    pub fn new(a: &IntMatrix) -> Result<Self> {
        if !a.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        if a.det().is_zero() {
            return Err(Error::Singular);
        }
        Ok(LatticeInSpace { form: a.clone(), basis: IntMatrix::identity(a.rows()), scale: Rat::one(), gram: a.to_rat() })
    }

    fn with_basis(form: &IntMatrix, basis: IntMatrix, scale: Rat) -> Self {
        let gram = scale_rat(&basis.congruence(form).to_rat(), &scale);
        LatticeInSpace { form: form.clone(), basis, scale, gram }
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    /// Rows in ambient coordinates.
    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    pub fn scale(&self) -> &Rat {
        &self.scale
    }

    pub fn gram(&self) -> &RatMatrix {
        &self.gram
    }

    pub fn is_integral(&self) -> bool {
        self.gram.is_integral()
    }

    pub fn integral_gram(&self) -> Result<IntMatrix> {
        self.gram.to_int().ok_or_else(|| Error::Internal("gram matrix is not integral".into()))
    }

    pub fn det(&self) -> Rat {
        self.gram.det()
    }

    /// The form on the ambient `Z^n`.
    pub fn form(&self) -> &IntMatrix {
        &self.form
    }

    /// Basis of `self` in the coordinates of `other`.
    pub fn coordinates_in(&self, other: &LatticeInSpace) -> Result<RatMatrix> {
        Ok(&self.basis.to_rat() * &other.basis.to_rat().inverse()?)
    }
}

fn scale_rat(m: &RatMatrix, f: &Rat) -> RatMatrix {
    RatMatrix::new(m.rows(), m.cols(), m.data().iter().map(|v| v * f).collect())
}

/// The largest elementary divisor of the gram matrix, i.e. the exponent of
/// the discriminant group.
fn exponent(l: &LatticeInSpace) -> Result<BigInt> {
    let d = elementary_divisors(&l.integral_gram()?);
    Ok(d.into_iter().map(|v| v.abs()).max().unwrap_or_else(BigInt::one))
}

/// Prime factorization by trial division, ascending.
fn factor(m: &BigInt) -> Vec<(BigInt, u32)> {
    let mut m = m.abs();
    let mut out = Vec::new();
    let mut p = BigInt::from(2);
    while &p * &p <= m {
        let mut e = 0;
        while (&m % &p).is_zero() {
            m /= &p;
            e += 1;
        }
        if e > 0 {
            out.push((p.clone(), e));
        }
        p += if p == BigInt::from(2) { 1 } else { 2 };
    }
    if m > BigInt::one() {
        out.push((m, 1));
    }
    out
}

/// Primes `p` for which the discriminant group has an element of order `p^2`,
/// ascending.
pub fn fillable_primes(l: &LatticeInSpace) -> Result<Vec<BigInt>> {
    Ok(factor(&exponent(l)?).into_iter().filter(|(_, e)| *e >= 2).map(|(p, _)| p).collect())
}

/// `Fill_p(L) = pL + (L ∩ p^2 L^#)` with the form divided by `p^2`.
pub fn p_filling(l: &LatticeInSpace, p: &BigInt) -> Result<LatticeInSpace> {
    let n = l.dim();
    let g = l.integral_gram()?;
    let p2 = p * p;
    if !(exponent(l)? % &p2).is_zero() {
        return Err(Error::NotFillable { p: p.to_u64().unwrap_or(u64::MAX) });
    }
    // v with v G ≡ 0 mod p^2, as the first n coordinates of the kernel of [G; p^2 I]
    let stacked = g.stack(&IntMatrix::identity(n).scale(&p2));
    let k = kernel_saturated(&stacked);
    let mut rows: Vec<Vec<BigInt>> = k.to_rows().into_iter().map(|r| r[..n].to_vec()).collect();
    rows.extend(IntMatrix::identity(n).scale(p).to_rows());
    let coords = lattice_basis(&IntMatrix::from_rows(&rows, n));
    let basis = &coords * &l.basis;
    let filled = LatticeInSpace::with_basis(&l.form, basis, &l.scale / Rat::from_integer(p2));
    if !filled.is_integral() {
        return Err(Error::Internal("filling is not integral".into()));
    }
    Ok(filled)
}

/// Repeated fillings, smallest prime first, until the discriminant group has
/// squarefree exponent. Returns the primes used, in order.
pub fn watson(l: &LatticeInSpace) -> Result<(LatticeInSpace, Vec<BigInt>)> {
    let mut w = l.clone();
    let mut chain = Vec::new();
    while let Some(p) = fillable_primes(&w)?.into_iter().next() {
        w = p_filling(&w, &p)?;
        chain.push(p);
    }
    Ok((w, chain))
}

/// The orbit of `L` under a group of automorphisms of a finite index
/// sublattice `W`, in the coordinates of `W`.
#[derive(Clone, Debug)]
pub struct LatticeOrbit {
    orbit: Orbit<IntMatrix>,
    // basis of L in W coordinates, and its inverse
    relative: RatMatrix,
    relative_inv: RatMatrix,
    denom: BigInt,
    gens: Vec<IntMatrix>,
    inverses: Vec<IntMatrix>,
}

impl LatticeOrbit {
    pub fn new(l: &LatticeInSpace, w: &LatticeInSpace, gens_w: &GeneratorSet, budget: Option<usize>) -> Result<Self> {
        let n = l.dim();
        let relative = l.coordinates_in(w)?;
        let relative_inv = relative.inverse()?;
        let denom = relative.denominator();
        let base = lattice_basis(&relative.scale_to_int(&denom));
        let gens = gens_w.matrices();
        let inverses: Vec<IntMatrix> = gens.iter().map(unimodular_inverse).collect::<Result<_>>()?;
        let orbit = Orbit::enumerate(base, &gens, n, act, budget)?;
        Ok(LatticeOrbit { orbit, relative, relative_inv, denom, gens, inverses })
    }

    pub fn len(&self) -> usize {
        self.orbit.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbit.is_empty()
    }

    /// `R g R^-1`, the matrix of `g` in the coordinates of `L`.
    fn to_l(&self, g: &IntMatrix) -> Result<IntMatrix> {
        (&(&self.relative * &g.to_rat()) * &self.relative_inv)
            .to_int()
            .ok_or_else(|| Error::Internal("stabilizer element is not integral on L".into()))
    }

    /// `R^-1 g R`, the matrix of an automorphism of `L` in the coordinates of `W`.
    pub fn to_w(&self, g: &IntMatrix) -> Option<IntMatrix> {
        (&(&self.relative_inv * &g.to_rat()) * &self.relative).to_int()
    }

    /// Schreier generators of the stabilizer of `L`, in `L` coordinates.
    pub fn stabilizer_generators(&self) -> Result<Vec<IntMatrix>> {
        let mut out: Vec<IntMatrix> =
            self.orbit.schreier_generators(&self.gens, act).iter().map(|s| self.to_l(s)).collect::<Result<_>>()?;
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// Rewrite a word in the generators of `W` whose product fixes `L` into
    /// Schreier generators in `L` coordinates, each with an inversion flag.
    pub fn rewrite(&self, word: &[Letter]) -> Result<Option<Vec<(IntMatrix, bool)>>> {
        match self.orbit.rewrite(word, &self.gens, &self.inverses, act) {
            Some(factors) => Ok(Some(factors.into_iter().map(|(s, inv)| self.to_l(&s).map(|m| (m, inv))).collect::<Result<_>>()?)),
            None => Ok(None),
        }
    }

    pub fn denominator(&self) -> &BigInt {
        &self.denom
    }
}

fn act(key: &IntMatrix, g: &IntMatrix) -> IntMatrix {
    lattice_basis(&(key * g))
}

/// Generators of `Aut(L)` from generators of `Aut(W)` for the Watson lattice
/// `W` of `L`, as Schreier generators of the stabilizer of `L`, in `L`
/// coordinates. `budget` caps the orbit length.
pub fn recover_aut(l: &LatticeInSpace, w: &LatticeInSpace, gens_w: &GeneratorSet, budget: Option<usize>) -> Result<GeneratorSet> {
    LatticeOrbit::new(l, w, gens_w, budget)?.recovered_group(l)
}

impl LatticeOrbit {
    /// The stabilizer generators as automorphisms of `l`, checked against
    /// its form.
    pub fn recovered_group(&self, l: &LatticeInSpace) -> Result<GeneratorSet> {
        let ambient = l.integral_gram()?;
        let minus = -&IntMatrix::identity(l.dim());
        let mut generators = Vec::new();
        let mut includes_minus_identity = false;
        for g in self.stabilizer_generators()? {
            let u = UnimodularMap::new(g)?;
            if !u.preserves(&ambient) {
                return Err(Error::Internal("recovered element does not preserve the form".into()));
            }
            includes_minus_identity |= u.matrix() == &minus;
            generators.push(u);
        }
        Ok(GeneratorSet::new(generators, includes_minus_identity))
    }
}

/// The result of a traversal: frame, residue graph and generators.
#[derive(Clone, Debug)]
pub struct Traversal<'a> {
    pub frame: &'a ConeFrame,
    pub graph: &'a ResidueGraph,
    pub generators: &'a GeneratorSet,
}

/// Decide whether `g` (in `L` coordinates) lies in the group generated by
/// `recovered`, by writing it as a word in the generators of `W` and
/// rewriting into Schreier generators of the stabilizer of `L`.
pub fn in_recovered_group(orbit: &LatticeOrbit, w: &Traversal<'_>, recovered: &GeneratorSet, g: &IntMatrix) -> Result<bool> {
    let Some(gw) = orbit.to_w(g) else {
        return Ok(false);
    };
    let Some(word) = express(w.frame, w.graph, w.generators, &UnimodularMap::new_unchecked(gw))? else {
        return Ok(false);
    };
    let Some(factors) = orbit.rewrite(&word)? else {
        return Ok(false);
    };
    let members: HashMap<&IntMatrix, ()> = recovered.generators.iter().map(|u| (u.matrix(), ())).collect();
    let n = g.rows();
    let mut product = IntMatrix::identity(n);
    for (s, inv) in &factors {
        if !members.contains_key(s) {
            return Ok(false);
        }
        product = if *inv { &product * &unimodular_inverse(s)? } else { &product * s };
    }
    Ok(&product == g)
}

/// Whether `g` lies in the group generated by the output of a traversal of
/// `L` itself.
pub fn in_traversal_group(t: &Traversal<'_>, g: &IntMatrix) -> Result<bool> {
    Ok(express(t.frame, t.graph, t.generators, &UnimodularMap::new_unchecked(g.clone()))?.is_some())
}

/// `|det L| / |det W|` as an integer, when it is one.
pub fn det_ratio(l: &LatticeInSpace, w: &LatticeInSpace) -> Option<BigInt> {
    let r = (l.det() / w.det()).abs();
    r.is_integer().then(|| r.to_integer())
}

/// Whether every elementary divisor of the gram matrix is squarefree.
pub fn has_squarefree_exponent(l: &LatticeInSpace) -> Result<bool> {
    Ok(factor(&exponent(l)?).iter().all(|(_, e)| *e == 1))
}

/// Integer square root when `m` is a perfect square.
pub fn exact_sqrt(m: &BigInt) -> Option<BigInt> {
    if m.is_negative() {
        return None;
    }
    let r = m.sqrt();
    (&r * &r == *m).then_some(r)
}

/// Prime support of a positive integer.
pub fn prime_support(m: &BigInt) -> Vec<BigInt> {
    factor(m).into_iter().map(|(p, _)| p).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::int;

    fn watson_example() -> IntMatrix {
        IntMatrix::from_i64_rows(&[&[17, -17, 20, -9], &[-17, -25, 15, -6], &[20, 15, 4, -2], &[-9, -6, -2, 1]])
    }

    #[test]
    fn filling_diag_1_4() {
        let l = LatticeInSpace::new(&IntMatrix::diagonal(&[int(1), int(4)])).unwrap();
        assert_eq!(fillable_primes(&l).unwrap(), vec![int(2)]);
        let f = p_filling(&l, &int(2)).unwrap();
        assert!(f.is_integral());
        assert_eq!(f.det(), Rat::one());
    }

    #[test]
    fn not_fillable() {
        let l = LatticeInSpace::new(&IntMatrix::diagonal(&[int(-1), int(6), int(3)])).unwrap();
        assert!(fillable_primes(&l).unwrap().is_empty());
        assert_eq!(p_filling(&l, &int(3)).unwrap_err(), Error::NotFillable { p: 3 });
        let (w, chain) = watson(&l).unwrap();
        assert_eq!(w, l);
        assert!(chain.is_empty());
    }

    #[test]
    fn four_by_four_example() {
        let l = LatticeInSpace::new(&watson_example()).unwrap();
        assert_eq!(l.det(), Rat::from_integer(int(-32)));
        let first = p_filling(&l, &int(2)).unwrap();
        assert_eq!(first.det(), Rat::from_integer(int(-8)));
        assert!(!has_squarefree_exponent(&first).unwrap());
        let (w, chain) = watson(&l).unwrap();
        assert_eq!(chain, vec![int(2), int(2)]);
        assert_eq!(w.det(), Rat::from_integer(int(-2)));
        assert!(has_squarefree_exponent(&w).unwrap());
        assert_eq!(det_ratio(&l, &w), Some(int(16)));
    }

    #[test]
    fn factorization() {
        assert_eq!(factor(&int(360)), vec![(int(2), 3), (int(3), 2), (int(5), 1)]);
        assert_eq!(factor(&int(97)), vec![(int(97), 1)]);
        assert_eq!(exact_sqrt(&int(49)), Some(int(7)));
        assert_eq!(exact_sqrt(&int(50)), None);
    }
}
