//! Orbits of matrix groups acting from the right, with transversals and
//! Schreier generators of point stabilizers.

use std::collections::{HashMap, HashSet};
use std::hash::Hash;

use crate::error::{Error, Result};
use crate::linalg::{unimodular_inverse, IntMatrix};

/// A generator index in a word, possibly inverted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Letter { generator, inverse }
    }
}

/// The product of a word, left to right.
pub fn evaluate(word: &[Letter], gens: &[IntMatrix], inverses: &[IntMatrix], dim: usize) -> IntMatrix {
    word.iter().fold(IntMatrix::identity(dim), |acc, l| {
        let m = if l.inverse { &inverses[l.generator] } else { &gens[l.generator] };
        &acc * m
    })
}

/// An orbit `base · G` together with a transversal: `base · t_i = points[i]`.
#[derive(Clone, Debug)]
pub struct Orbit<P> {
    points: Vec<P>,
    index: HashMap<P, usize>,
    transversal: Vec<IntMatrix>,
    transversal_inv: Vec<IntMatrix>,
}

impl<P: Clone + Eq + Hash> Orbit<P> {
    /// Breadth-first orbit enumeration. `budget` caps the number of points.
    pub fn enumerate<F>(base: P, gens: &[IntMatrix], dim: usize, act: F, budget: Option<usize>) -> Result<Self>
    where
        F: Fn(&P, &IntMatrix) -> P,
    {
        let inverses: Vec<IntMatrix> = gens.iter().map(unimodular_inverse).collect::<Result<_>>()?;
        let id = IntMatrix::identity(dim);
        let mut orbit = Orbit {
            points: vec![base.clone()],
            index: HashMap::from([(base, 0)]),
            transversal: vec![id.clone()],
            transversal_inv: vec![id],
        };
        let mut i = 0;
        while i < orbit.points.len() {
            for (g, g_inv) in gens.iter().zip(&inverses) {
                let image = act(&orbit.points[i], g);
                if orbit.index.contains_key(&image) {
                    continue;
                }
                if budget.is_some_and(|b| orbit.points.len() >= b) {
                    return Err(Error::OrbitBudget(budget.unwrap_or_default()));
                }
                let t = &orbit.transversal[i] * g;
                let t_inv = g_inv * &orbit.transversal_inv[i];
                orbit.index.insert(image.clone(), orbit.points.len());
                orbit.points.push(image);
                orbit.transversal.push(t);
                orbit.transversal_inv.push(t_inv);
            }
            i += 1;
        }
        Ok(orbit)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn position(&self, p: &P) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// `t` with `base · t = points[i]`.
    pub fn transversal(&self, i: usize) -> &IntMatrix {
        &self.transversal[i]
    }

    pub fn transversal_inverse(&self, i: usize) -> &IntMatrix {
        &self.transversal_inv[i]
    }

    /// Distinct non-identity Schreier generators `t_i g t_j^-1` of the
    /// stabilizer of the base point, sorted.
    pub fn schreier_generators<F>(&self, gens: &[IntMatrix], act: F) -> Vec<IntMatrix>
    where
        F: Fn(&P, &IntMatrix) -> P,
    {
        let mut seen = HashSet::new();
        for (i, p) in self.points.iter().enumerate() {
            for g in gens {
                let j = self.index[&act(p, g)];
                let s = &(&self.transversal[i] * g) * &self.transversal_inv[j];
                if !s.is_identity() {
                    seen.insert(s);
                }
            }
        }
        let mut out: Vec<IntMatrix> = seen.into_iter().collect();
        out.sort();
        out
    }
}

impl<P: Clone + Eq + Hash> Orbit<P> {
    /// Rewrite a word in `gens` whose product fixes the base point as a
    /// product of Schreier generators `t_i g t_j^-1`, each paired with a flag
    /// telling whether it enters inverted. Identity factors are dropped.
    /// `None` if the word leaves the orbit or does not fix the base point.
    pub fn rewrite<F>(&self, word: &[Letter], gens: &[IntMatrix], inverses: &[IntMatrix], act: F) -> Option<Vec<(IntMatrix, bool)>>
    where
        F: Fn(&P, &IntMatrix) -> P,
    {
        let mut i = 0;
        let mut out = Vec::new();
        for l in word {
            let g = &gens[l.generator];
            let j = if l.inverse {
                let j = self.position(&act(&self.points[i], &inverses[l.generator]))?;
                let s = &(&self.transversal[j] * g) * &self.transversal_inv[i];
                if !s.is_identity() {
                    out.push((s, true));
                }
                j
            } else {
                let j = self.position(&act(&self.points[i], g))?;
                let s = &(&self.transversal[i] * g) * &self.transversal_inv[j];
                if !s.is_identity() {
                    out.push((s, false));
                }
                j
            };
            i = j;
        }
        (i == 0).then_some(out)
    }
}

/// Greedily keep generators that enlarge the group until it reaches
/// `order`, tracking the group by closure. Returns the input unchanged
/// when the order exceeds `cap`.
pub fn reduce_generators(gens: Vec<IntMatrix>, dim: usize, order: u128, cap: u128) -> Vec<IntMatrix> {
    if order > cap {
        return gens;
    }
    let mut kept: Vec<IntMatrix> = Vec::new();
    let mut elements: HashSet<IntMatrix> = HashSet::from([IntMatrix::identity(dim)]);
    for g in gens {
        if elements.len() as u128 >= order {
            break;
        }
        if elements.contains(&g) {
            continue;
        }
        kept.push(g);
        elements = closure(&kept, dim);
    }
    kept
}

fn closure(gens: &[IntMatrix], dim: usize) -> HashSet<IntMatrix> {
    let id = IntMatrix::identity(dim);
    let mut seen = HashSet::from([id.clone()]);
    let mut queue = vec![id];
    while let Some(x) = queue.pop() {
        for g in gens {
            let y = &x * g;
            if seen.insert(y.clone()) {
                queue.push(y);
            }
        }
    }
    seen
}
