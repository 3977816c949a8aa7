//! Extreme rays of `{r : r · d^tr ≥ 0 for all d}` by double description.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::cone::ConeFrame;
use crate::error::{Error, Result};
use crate::linalg::{dot, primitive, IntMatrix, IntVector};

/// An extreme ray and the indices of the inequalities it makes tight.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ray {
    pub vector: IntVector,
    pub annihilated: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RayList {
    pub rays: Vec<Ray>,
}

impl RayList {
    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    pub fn vectors(&self) -> impl Iterator<Item = &IntVector> {
        self.rays.iter().map(|r| &r.vector)
    }

    pub fn position(&self, v: &[BigInt]) -> Option<usize> {
        self.rays.iter().position(|r| r.vector == v)
    }
}

struct Work {
    vector: IntVector,
    tight: BTreeSet<usize>,
}

fn rank_of(rows: &[&IntVector], n: usize) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let owned: Vec<IntVector> = rows.iter().map(|r| (*r).clone()).collect();
    IntMatrix::from_rows(&owned, n).rank()
}

/// Extreme rays of the pointed cone dual to the given vectors, primitive and
/// lexicographically sorted.
pub fn extreme_rays(ineqs: &[IntVector], n: usize) -> Result<RayList> {
    if ineqs.iter().any(|d| d.len() != n) {
        return Err(Error::Dimension("inequality length".into()));
    }
    let all = if ineqs.is_empty() { 0 } else { IntMatrix::from_rows(ineqs, n).rank() };
    if all < n {
        return Err(Error::Rank { rank: all, dim: n });
    }
    // greedy choice of n independent inequalities, in input order
    let mut basis_idx: Vec<usize> = Vec::with_capacity(n);
    for (i, d) in ineqs.iter().enumerate() {
        let mut trial: Vec<&IntVector> = basis_idx.iter().map(|&j| &ineqs[j]).collect();
        trial.push(d);
        if rank_of(&trial, n) == trial.len() {
            basis_idx.push(i);
            if basis_idx.len() == n {
                break;
            }
        }
    }
    let rows: Vec<IntVector> = basis_idx.iter().map(|&i| ineqs[i].clone()).collect();
    let inv = IntMatrix::from_rows(&rows, n).to_rat().inverse()?;
    // ray j is column j of the inverse: positive on basis inequality j, zero on the others
    let mut rays: Vec<Work> = (0..n)
        .map(|j| {
            let col: Vec<_> = (0..n).map(|i| inv[(i, j)].clone()).collect();
            let vector = crate::linalg::primitive_from_rat(&col);
            let tight = basis_idx.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &i)| i).collect();
            Work { vector, tight }
        })
        .collect();
    let mut processed: BTreeSet<usize> = basis_idx.iter().copied().collect();
    for (h_idx, h) in ineqs.iter().enumerate() {
        if processed.contains(&h_idx) {
            continue;
        }
        let vals: Vec<BigInt> = rays.iter().map(|r| dot(&r.vector, h)).collect();
        let plus: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        let minus: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
        let mut fresh: Vec<Work> = Vec::new();
        for &p in &plus {
            for &q in &minus {
                let common: BTreeSet<usize> = rays[p].tight.intersection(&rays[q].tight).copied().collect();
                if common.len() + 2 < n {
                    continue;
                }
                let common_rows: Vec<&IntVector> = common.iter().map(|&i| &ineqs[i]).collect();
                if rank_of(&common_rows, n) != n - 2 {
                    continue;
                }
                let v: IntVector = rays[q].vector.iter().zip(&rays[p].vector).map(|(qv, pv)| &vals[p] * qv - &vals[q] * pv).collect();
                let mut tight = common;
                tight.insert(h_idx);
                fresh.push(Work { vector: primitive(&v), tight });
            }
        }
        for (i, r) in rays.iter_mut().enumerate() {
            if vals[i].is_zero() {
                r.tight.insert(h_idx);
            }
        }
        let mut keep: Vec<Work> = rays.into_iter().zip(&vals).filter(|(_, v)| !v.is_negative()).map(|(r, _)| r).collect();
        keep.extend(fresh);
        rays = keep;
        processed.insert(h_idx);
    }
    let mut out: Vec<Ray> = rays
        .into_iter()
        .map(|r| {
            let annihilated = ineqs.iter().enumerate().filter(|(_, d)| dot(&r.vector, d).is_zero()).map(|(i, _)| i).collect();
            Ray { vector: r.vector, annihilated }
        })
        .collect();
    out.sort();
    out.dedup_by(|a, b| a.vector == b.vector);
    Ok(RayList { rays: out })
}

/// A direction is blind when it lies in the closed cone `V1`.
pub fn is_blind(frame: &ConeFrame, r: &[BigInt]) -> bool {
    frame.in_v1_int(r).in_closure()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::make_frame;
    use crate::linalg::{int, int_vec};

    fn vecs(v: &[&[i64]]) -> Vec<IntVector> {
        v.iter().map(|x| int_vec(x)).collect()
    }

    #[test]
    fn orthant_is_self_dual() {
        let e = vecs(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let rays = extreme_rays(&e, 3).unwrap();
        assert_eq!(rays.vectors().cloned().collect::<Vec<_>>(), vecs(&[&[0, 0, 1], &[0, 1, 0], &[1, 0, 0]]));
    }

    #[test]
    fn h2_rays() {
        let m = vecs(&[&[1, -1], &[1, 0], &[1, 1]]);
        let rays = extreme_rays(&m, 2).unwrap();
        assert_eq!(rays.vectors().cloned().collect::<Vec<_>>(), vecs(&[&[1, -1], &[1, 1]]));
        for r in &rays.rays {
            assert_eq!(r.annihilated.len(), 1);
        }
    }

    #[test]
    fn h3_rays() {
        let m = vecs(&[&[1, -1, 0], &[1, 0, -1], &[1, 0, 0], &[1, 0, 1], &[1, 1, 0]]);
        let rays = extreme_rays(&m, 3).unwrap();
        assert_eq!(rays.len(), 4);
        let f = make_frame(&IntMatrix::diagonal(&[int(-1), int(1), int(1)])).unwrap();
        assert!(rays.vectors().all(|r| !is_blind(&f, r)));
    }

    #[test]
    fn rank_error() {
        let m = vecs(&[&[1, 0, 0], &[0, 1, 0]]);
        assert_eq!(extreme_rays(&m, 3).unwrap_err(), Error::Rank { rank: 2, dim: 3 });
    }

    #[test]
    fn blindness() {
        let f2 = make_frame(&IntMatrix::diagonal(&[int(-1), int(1)])).unwrap();
        assert!(is_blind(&f2, &int_vec(&[1, 1])));
        assert!(!is_blind(&f2, &int_vec(&[-1, 1])));
        let f3 = make_frame(&IntMatrix::diagonal(&[int(-1), int(1), int(1)])).unwrap();
        assert!(!is_blind(&f3, &int_vec(&[0, 1, 0])));
    }
}
