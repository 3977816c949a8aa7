//! The Voronoi algorithm on `D`-perfect points: neighbours, stabilizers,
//! equivalence tests, the traversal of the residue graph and its
//! verification.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::cone::{minimal_vectors, ConeFrame, ConeMembership, MinimalVectorData, PairingSlices};
use crate::error::{Error, Result};
use crate::linalg::{
    content, dot, kernel_saturated, lattice_basis, lll_reduce, primitive, unimodular_inverse, vec_mat, IntMatrix, IntVector, Rat,
    RatMatrix, UnimodularMap,
};
use crate::orbit::{evaluate, reduce_generators, Letter, Orbit};
use crate::pdlat::{automorphism_group, isometry, FiniteMatrixGroup, PDLattice};
use crate::polycone::{extreme_rays, is_blind, RayList};

/// Stabilizers up to this order get a minimal-ish generating set by closure.
const REDUCE_CAP: u128 = 20_000;

/// A primitive `D`-perfect point with its minimal vectors and directions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerfectPoint {
    /// Position in the residue graph; 0 for points built outside a traversal.
    pub id: usize,
    pub vector: IntVector,
    pub data: MinimalVectorData,
    pub rays: RayList,
}

impl PerfectPoint {
    /// Compute minimal vectors and directions of a point; fails with a rank
    /// error if the point is not perfect.
    pub fn new(frame: &ConeFrame, vector: &[BigInt]) -> Result<Self> {
        let data = minimal_vectors(frame, &primitive(vector))?;
        PerfectPoint::from_data(frame, data)
    }

    fn from_data(frame: &ConeFrame, data: MinimalVectorData) -> Result<Self> {
        let n = frame.dim();
        if data.rank_of_span < n {
            return Err(Error::Rank { rank: data.rank_of_span, dim: n });
        }
        let rays = extreme_rays(&data.minvecs, n)?;
        Ok(PerfectPoint { id: 0, vector: data.point.clone(), data, rays })
    }

    pub fn norm(&self) -> &BigInt {
        &self.data.norm
    }

    pub fn minimum(&self) -> &BigInt {
        &self.data.minimum
    }

    pub fn minvecs(&self) -> &[IntVector] {
        &self.data.minvecs
    }

    pub fn ray(&self, i: usize) -> &IntVector {
        &self.rays.rays[i].vector
    }

    pub fn non_blind_rays(&self, frame: &ConeFrame) -> Vec<usize> {
        (0..self.rays.len()).filter(|&i| !is_blind(frame, self.ray(i))).collect()
    }
}

// ---------------------------------------------------------------------------
// moving along a direction

struct Advance {
    point: IntVector,
    minimum: BigInt,
    new_vectors: Vec<IntVector>,
}

/// `q x + p r` made primitive, with its content.
fn scaled_point(x: &[BigInt], r: &[BigInt], rho: &Rat) -> (IntVector, BigInt) {
    let (p, q) = (rho.numer(), rho.denom());
    let v: IntVector = x.iter().zip(r).map(|(a, b)| q * a + p * b).collect();
    let g = content(&v);
    (v.iter().map(|c| c / &g).collect(), g)
}

/// The simplest rational strictly between `lo` and `hi` (`None` = infinity).
fn simplest_between(lo: &Rat, hi: Option<&Rat>) -> Rat {
    let fl = lo.floor();
    let next = &fl + Rat::one();
    if hi.is_none_or(|h| &next < h) {
        return next;
    }
    let hi = hi.expect("bounded");
    let frac_lo = lo - &fl;
    let inv_hi = (hi - &fl).recip();
    let inv_lo = if frac_lo.is_zero() { None } else { Some(frac_lo.recip()) };
    fl + simplest_between(&inv_hi, inv_lo.as_ref()).recip()
}

/// Move `x` (primitive, raw minimum `mu`) along `r` until a vector of `D`
/// with `r · d^tr < 0` attains the minimum. Every `d` in the minimal vectors
/// of `x` must satisfy `r · d^tr ≥ 0`.
fn advance(frame: &ConeFrame, x: &[BigInt], mu: &BigInt, r: &[BigInt]) -> Result<Advance> {
    if is_blind(frame, r) {
        return Err(Error::BlindDirection);
    }
    let rho_of = |d: &IntVector| -> Option<Rat> {
        let rd = dot(r, d);
        if rd.is_negative() {
            Some(Rat::new(dot(x, d) - mu, -rd))
        } else {
            None
        }
    };
    let inside = |rho: &Rat| {
        let (y, _) = scaled_point(x, r, rho);
        frame.in_v1_int(&y) == ConeMembership::Interior
    };

    // an upper bound for the step: a candidate from the next few pairing levels
    // of x, or else a point where the ray has left V1
    let mut up: Option<Rat> = None;
    let slices = PairingSlices::new(frame, x)?;
    let mut k = mu + 1;
    let top = mu * 2 + 2;
    while up.is_none() && k <= top {
        for d in slices.slice(frame, &k)? {
            if let Some(rho) = rho_of(&d) {
                if up.as_ref().is_none_or(|u| &rho < u) {
                    up = Some(rho);
                }
            }
        }
        k += 1;
    }
    let mut up = match up {
        Some(u) => u,
        None => {
            let mut rho = Rat::one();
            while inside(&rho) {
                rho *= Rat::from_integer(BigInt::from(2));
            }
            rho
        }
    };

    let mut lo = Rat::zero();
    let mut trial = up.clone();
    for _ in 0..4096 {
        if !inside(&trial) {
            up = trial;
            trial = simplest_between(&lo, Some(&up));
            continue;
        }
        let (y, g) = scaled_point(x, r, &trial);
        let bound = (mu * trial.denom()).div_floor(&g);
        let slices = PairingSlices::new(frame, &y)?;
        let mut best: Option<Rat> = None;
        let mut hits: Vec<(IntVector, Rat)> = Vec::new();
        let mut k = BigInt::one();
        while k <= bound {
            for d in slices.slice(frame, &k)? {
                if let Some(rho) = rho_of(&d) {
                    if best.as_ref().is_none_or(|b| &rho < b) {
                        best = Some(rho.clone());
                    }
                    hits.push((d, rho));
                }
            }
            k += 1;
        }
        match best {
            Some(rho) => {
                let mut new_vectors: Vec<IntVector> = hits.into_iter().filter(|(_, h)| *h == rho).map(|(d, _)| d).collect();
                new_vectors.sort();
                let (point, g) = scaled_point(x, r, &rho);
                let minimum = mu * rho.denom() / g;
                return Ok(Advance { point, minimum, new_vectors });
            }
            None => {
                lo = trial;
                trial = simplest_between(&lo, Some(&up));
            }
        }
    }
    Err(Error::Internal("step search along a direction did not terminate".into()))
}

fn merged_data(frame: &ConeFrame, adv: Advance, kept: impl Iterator<Item = IntVector>) -> MinimalVectorData {
    let mut minvecs: Vec<IntVector> = kept.chain(adv.new_vectors).collect();
    minvecs.sort();
    minvecs.dedup();
    let rank = IntMatrix::from_rows(&minvecs, frame.dim()).rank();
    MinimalVectorData { norm: -frame.lattice().norm(&adv.point), point: adv.point, minimum: adv.minimum, minvecs, rank_of_span: rank }
}

/// A perfect point reached from the anchor by repeatedly raising the rank
/// of the minimal vectors.
pub fn initial_perfect_point(frame: &ConeFrame) -> Result<PerfectPoint> {
    let n = frame.dim();
    let mut data = minimal_vectors(frame, frame.anchor1())?;
    for _ in 0..=n {
        if data.rank_of_span == n {
            return PerfectPoint::from_data(frame, data);
        }
        let mt = IntMatrix::from_rows(&data.minvecs, n).transpose();
        let kernel = kernel_saturated(&mt);
        let mut r = kernel.row(0).to_vec();
        if is_blind(frame, &r) {
            r = r.iter().map(|c| -c).collect();
        }
        let adv = advance(frame, &data.point, &data.minimum, &r)?;
        let old = std::mem::take(&mut data.minvecs);
        data = merged_data(frame, adv, old.into_iter());
    }
    Err(Error::Internal("rank of the minimal vectors did not increase".into()))
}

/// The neighbour of `p` across the wall orthogonal to ray `ray_index`.
pub fn neighbour(frame: &ConeFrame, p: &PerfectPoint, ray_index: usize) -> Result<PerfectPoint> {
    let r = p.ray(ray_index).clone();
    let adv = advance(frame, &p.vector, p.minimum(), &r)?;
    let wall = p.minvecs().iter().filter(|d| dot(&r, d).is_zero()).cloned();
    let data = merged_data(frame, adv, wall);
    PerfectPoint::from_data(frame, data)
}

// ---------------------------------------------------------------------------
// the complement lattice L(x) and stabilizers

/// `L(x) = {v ∈ Z^n : v A x^tr = 0}` with an LLL-reduced basis, and the
/// basis `B = [L(x); x]` of a finite index sublattice of `Z^n`.
#[derive(Clone, Debug)]
struct PointLattice {
    basis: IntMatrix,
    gram: IntMatrix,
    b_inv: RatMatrix,
    index: BigInt,
    b: IntMatrix,
}

impl PointLattice {
    fn new(frame: &ConeFrame, x: &[BigInt]) -> Result<Self> {
        let n = frame.dim();
        let ax = vec_mat(x, frame.gram());
        let col = IntMatrix::from_rows(&[ax], n).transpose();
        let k = kernel_saturated(&col);
        let (_, u) = lll_reduce(&k.congruence(frame.gram()).to_rat())?;
        let basis = &u * &k;
        let gram = basis.congruence(frame.gram());
        let b = basis.stack(&IntMatrix::from_rows(&[x.to_vec()], n));
        let index = b.det().abs();
        let b_inv = b.to_rat().inverse()?;
        Ok(PointLattice { basis, gram, b_inv, index, b })
    }

    fn rank(&self) -> usize {
        self.basis.rows()
    }

    /// `diag(h, 1)`
    fn extend(&self, h: &IntMatrix) -> IntMatrix {
        let k = self.rank();
        let mut m = IntMatrix::identity(k + 1);
        for i in 0..k {
            for j in 0..k {
                m[(i, j)] = h[(i, j)].clone();
            }
        }
        m
    }

    /// Key of the lattice `Z^n B^-1 diag(h, 1)` in these coordinates.
    fn glue_key(&self, h: &IntMatrix) -> IntMatrix {
        let scaled = self.b_inv.scale_to_int(&self.index);
        lattice_basis(&(&scaled * &self.extend(h)))
    }

    /// `B_from^-1 diag(h, 1) B_to`
    fn rebase(from: &PointLattice, h: &IntMatrix, to: &PointLattice) -> Option<IntMatrix> {
        let m = &(&from.b_inv * &from.extend(h).to_rat()) * &to.b.to_rat();
        m.to_int()
    }
}

fn act_on_key(key: &IntMatrix, h: &IntMatrix, pl: &PointLattice) -> IntMatrix {
    lattice_basis(&(key * &pl.extend(h)))
}

/// Everything needed to test other points for equivalence with a
/// representative.
#[derive(Clone, Debug)]
pub struct StabilizerData {
    lattice: PointLattice,
    orbit: Orbit<IntMatrix>,
    group: FiniteMatrixGroup,
    invariants: Invariants,
}

impl StabilizerData {
    pub fn group(&self) -> &FiniteMatrixGroup {
        &self.group
    }
}

pub fn stabilizer_data(frame: &ConeFrame, p: &PerfectPoint) -> Result<StabilizerData> {
    let n = frame.dim();
    let lattice = PointLattice::new(frame, &p.vector)?;
    let aut = automorphism_group(&PDLattice::from_int(&lattice.gram)?)?;
    let aut_gens: Vec<IntMatrix> = aut.generators().iter().map(|g| g.matrix().clone()).collect();
    let base = lattice.glue_key(&IntMatrix::identity(lattice.rank()));
    let act = |key: &IntMatrix, h: &IntMatrix| act_on_key(key, h, &lattice);
    let orbit = Orbit::enumerate(base, &aut_gens, lattice.rank(), act, None)?;
    let schreier = orbit.schreier_generators(&aut_gens, act);
    let order = aut.order().map(|o| o / orbit.len() as u128);
    let mut gens: Vec<IntMatrix> = schreier
        .iter()
        .map(|s| PointLattice::rebase(&lattice, s, &lattice).ok_or_else(|| Error::Internal("stabilizer element is not integral".into())))
        .collect::<Result<_>>()?;
    gens.sort();
    gens.dedup();
    if let Some(o) = order {
        gens = reduce_generators(gens, n, o, REDUCE_CAP);
    }
    let group = FiniteMatrixGroup::new(n, gens.into_iter().map(UnimodularMap::new_unchecked).collect(), order);
    let invariants = Invariants::new(frame, p, &lattice.index);
    Ok(StabilizerData { lattice, orbit, group, invariants })
}

/// `Stab(x)` inside the reduced automorphism group.
pub fn stabilizer(frame: &ConeFrame, p: &PerfectPoint) -> Result<FiniteMatrixGroup> {
    Ok(stabilizer_data(frame, p)?.group)
}

/// Cheap invariants of a perfect point under the reduced group.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Invariants {
    norm: BigInt,
    minimum: BigInt,
    num_minvecs: usize,
    num_rays: usize,
    index: BigInt,
    products: Vec<BigInt>,
}

impl Invariants {
    fn new(frame: &ConeFrame, p: &PerfectPoint, index: &BigInt) -> Self {
        let adj = frame.lattice().adjugate();
        let m = p.minvecs();
        let images: Vec<IntVector> = m.iter().map(|d| vec_mat(d, adj)).collect();
        let mut products = Vec::with_capacity(m.len() * (m.len() + 1) / 2);
        for (i, img) in images.iter().enumerate() {
            products.extend(m[i..].iter().map(|d| dot(img, d)));
        }
        products.sort();
        Invariants {
            norm: p.norm().clone(),
            minimum: p.minimum().clone(),
            num_minvecs: m.len(),
            num_rays: p.rays.len(),
            index: index.clone(),
            products,
        }
    }
}

/// `ω` with `p ω = q` against precomputed data of `q`.
fn equivalent_to(frame: &ConeFrame, p: &PerfectPoint, q: &PerfectPoint, qd: &StabilizerData) -> Result<Option<IntMatrix>> {
    if p.vector == q.vector {
        return Ok(Some(IntMatrix::identity(frame.dim())));
    }
    if p.norm() != q.norm() || p.minvecs().len() != q.minvecs().len() || p.rays.len() != q.rays.len() {
        return Ok(None);
    }
    let pl = PointLattice::new(frame, &p.vector)?;
    if pl.index != qd.lattice.index {
        return Ok(None);
    }
    if Invariants::new(frame, p, &pl.index) != qd.invariants {
        return Ok(None);
    }
    let lp = PDLattice::from_int(&pl.gram)?;
    let lq = PDLattice::from_int(&qd.lattice.gram)?;
    let Some(h0) = isometry(&lp, &lq)? else {
        return Ok(None);
    };
    let key = pl.glue_key(h0.matrix());
    let Some(j) = qd.orbit.position(&key) else {
        return Ok(None);
    };
    let h = h0.matrix() * qd.orbit.transversal_inverse(j);
    let omega = PointLattice::rebase(&pl, &h, &qd.lattice)
        .ok_or_else(|| Error::Internal("glue orbit match did not give an integral map".into()))?;
    debug_assert_eq!(vec_mat(&p.vector, &omega), q.vector);
    debug_assert_eq!(omega.congruence(frame.gram()), *frame.gram());
    Ok(Some(omega))
}

/// Some `ω` in the reduced group with `p.vector · ω = q.vector`.
pub fn equivalent(frame: &ConeFrame, p: &PerfectPoint, q: &PerfectPoint) -> Result<Option<UnimodularMap>> {
    if p.vector == q.vector {
        return Ok(Some(UnimodularMap::identity(frame.dim())));
    }
    let qd = stabilizer_data(frame, q)?;
    Ok(equivalent_to(frame, p, q, &qd)?.map(UnimodularMap::new_unchecked))
}

// ---------------------------------------------------------------------------
// traversal

/// A directed edge of the residue graph, one per stabilizer orbit of
/// non-blind directions of `points[from]`: the neighbour across `ray`, mapped
/// by `connecting` (identity when absent), is `points[to]`, and
/// `reverse_ray = -primitive(ray · c)` is the direction of `points[to]` leading
/// back.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub ray: IntVector,
    pub reverse_ray: IntVector,
    /// Absent on both directions of spanning tree edges.
    pub connecting: Option<UnimodularMap>,
}

impl Edge {
    pub fn is_tree(&self) -> bool {
        self.connecting.is_none()
    }
}

/// Per-class summary numbers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassSummary {
    pub num_directions: usize,
    pub num_non_blind: usize,
    /// Orbits of non-blind directions under the stabilizer.
    pub num_direction_orbits: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueGraph {
    pub points: Vec<PerfectPoint>,
    pub stabilizers: Vec<FiniteMatrixGroup>,
    pub edges: Vec<Edge>,
    pub summaries: Vec<ClassSummary>,
}

impl ResidueGraph {
    pub fn num_classes(&self) -> usize {
        self.points.len()
    }

    pub fn connecting_elements(&self) -> impl Iterator<Item = (usize, &Edge, &UnimodularMap)> {
        self.edges.iter().enumerate().filter_map(|(i, e)| e.connecting.as_ref().map(|c| (i, e, c)))
    }

    /// The half-edge leaving `edges[e].to` along the stabilizer orbit of its
    /// reverse direction; `e` itself for a loop that is its own reverse.
    pub fn partner(&self, e: usize) -> Option<usize> {
        let edge = self.edges.get(e)?;
        let gens = self.stabilizers.get(edge.to)?.generators();
        let mut orbit = BTreeSet::from([edge.reverse_ray.clone()]);
        let mut queue = vec![edge.reverse_ray.clone()];
        while let Some(r) = queue.pop() {
            for g in gens {
                let img = primitive(&g.apply(&r));
                if orbit.insert(img.clone()) {
                    queue.push(img);
                }
            }
        }
        self.edges.iter().position(|f| f.from == edge.to && f.to == edge.from && orbit.contains(&f.ray))
    }
}

/// Generators of the full group `Aut(A)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSet {
    pub generators: Vec<UnimodularMap>,
    pub includes_minus_identity: bool,
}

impl GeneratorSet {
    pub fn new(generators: Vec<UnimodularMap>, includes_minus_identity: bool) -> Self {
        GeneratorSet { generators, includes_minus_identity }
    }

    pub fn matrices(&self) -> Vec<IntMatrix> {
        self.generators.iter().map(|g| g.matrix().clone()).collect()
    }
}

#[derive(Clone, Debug, Default)]
pub struct TraverseOptions {
    pub max_classes: Option<usize>,
}

struct HalfEdge {
    from: usize,
    ray: usize,
    to: usize,
    omega: IntMatrix,
    tree: bool,
}

/// Orbits of the ray indices of `p` under the stabilizer generators, each
/// sorted; orbits ordered by their smallest element.
fn ray_orbits(p: &PerfectPoint, gens: &[UnimodularMap]) -> Result<Vec<Vec<usize>>> {
    let mut seen = vec![false; p.rays.len()];
    let mut orbits = Vec::new();
    for start in 0..p.rays.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut orbit = vec![start];
        let mut i = 0;
        while i < orbit.len() {
            for g in gens {
                let img = primitive(&g.apply(p.ray(orbit[i])));
                let j = p.rays.position(&img).ok_or_else(|| Error::Internal("stabilizer does not permute directions".into()))?;
                if !seen[j] {
                    seen[j] = true;
                    orbit.push(j);
                }
            }
            i += 1;
        }
        orbit.sort();
        orbits.push(orbit);
    }
    Ok(orbits)
}

pub fn traverse(frame: &ConeFrame) -> Result<(ResidueGraph, GeneratorSet)> {
    traverse_with(frame, &TraverseOptions::default())
}

pub fn traverse_with(frame: &ConeFrame, options: &TraverseOptions) -> Result<(ResidueGraph, GeneratorSet)> {
    let n = frame.dim();
    let first = initial_perfect_point(frame)?;
    let mut data: Vec<StabilizerData> = vec![stabilizer_data(frame, &first)?];
    let mut points = vec![first];
    // (parent, ray of the parent) for every point but the first
    let mut parent: Vec<Option<(usize, IntVector)>> = vec![None];
    let mut half: Vec<HalfEdge> = Vec::new();
    let mut summaries = Vec::new();

    let mut i = 0;
    while i < points.len() {
        let mut orbs = ray_orbits(&points[i], data[i].group().generators())?;
        let back = parent[i].as_ref().map(|(_, r)| {
            let neg: IntVector = r.iter().map(|c| -c).collect();
            points[i].rays.position(&neg).expect("reverse direction is a direction")
        });
        let non_blind: Vec<bool> = (0..points[i].rays.len()).map(|k| !is_blind(frame, points[i].ray(k))).collect();
        summaries.push(ClassSummary {
            num_directions: points[i].rays.len(),
            num_non_blind: non_blind.iter().filter(|&&b| b).count(),
            num_direction_orbits: orbs.iter().filter(|o| non_blind[o[0]]).count(),
        });
        for orb in orbs.iter_mut() {
            // the reverse of the tree edge leads orbit representatives
            if let Some(b) = back.filter(|b| orb.contains(b)) {
                orb.retain(|&k| k != b);
                orb.insert(0, b);
            }
        }
        for orb in &orbs {
            let rep = orb[0];
            if !non_blind[rep] {
                continue;
            }
            if Some(rep) == back {
                let (pi, _) = parent[i].clone().expect("has parent");
                half.push(HalfEdge { from: i, ray: rep, to: pi, omega: IntMatrix::identity(n), tree: true });
                continue;
            }
            let y = neighbour(frame, &points[i], rep)?;
            let mut matched = None;
            for (k, (q, qd)) in points.iter().zip(&data).enumerate() {
                if let Some(w) = equivalent_to(frame, &y, q, qd)? {
                    matched = Some((k, w));
                    break;
                }
            }
            match matched {
                Some((k, w)) => half.push(HalfEdge { from: i, ray: rep, to: k, omega: w, tree: false }),
                None => {
                    let k = points.len();
                    if options.max_classes.is_some_and(|m| k >= m) {
                        return Err(Error::ClassBudget(k));
                    }
                    let mut y = y;
                    y.id = k;
                    data.push(stabilizer_data(frame, &y)?);
                    points.push(y);
                    parent.push(Some((i, points[i].ray(rep).clone())));
                    half.push(HalfEdge { from: i, ray: rep, to: k, omega: IntMatrix::identity(n), tree: true });
                }
            }
        }
        i += 1;
    }

    let edges = build_edges(&points, &half)?;
    let stabilizers: Vec<FiniteMatrixGroup> = data.iter().map(|d| d.group.clone()).collect();
    let graph = ResidueGraph { points, stabilizers, edges, summaries };
    let gens = assemble_generators(&graph, n);
    Ok((graph, gens))
}

fn build_edges(points: &[PerfectPoint], half: &[HalfEdge]) -> Result<Vec<Edge>> {
    half.iter()
        .map(|h| {
            let ray = points[h.from].ray(h.ray).clone();
            let reverse_ray: IntVector = primitive(&vec_mat(&ray, &h.omega)).into_iter().map(|c| -c).collect();
            if points[h.to].rays.position(&reverse_ray).is_none() {
                return Err(Error::Internal("reverse of an edge is not a direction".into()));
            }
            let connecting = (!h.tree).then(|| UnimodularMap::new_unchecked(h.omega.clone()));
            Ok(Edge { from: h.from, to: h.to, ray, reverse_ray, connecting })
        })
        .collect()
}

fn assemble_generators(graph: &ResidueGraph, n: usize) -> GeneratorSet {
    let mut seen: HashSet<IntMatrix> = HashSet::new();
    let mut generators = Vec::new();
    let stab = graph.stabilizers.iter().flat_map(|s| s.generators().iter().map(|g| g.matrix().clone()));
    let conn = graph.connecting_elements().map(|(_, _, c)| c.matrix().clone());
    let minus = (-&IntMatrix::identity(n)).clone();
    for g in stab.chain(conn).chain(std::iter::once(minus)) {
        if !g.is_identity() && seen.insert(g.clone()) {
            generators.push(UnimodularMap::new_unchecked(g));
        }
    }
    GeneratorSet { generators, includes_minus_identity: true }
}

// ---------------------------------------------------------------------------
// words in the generators

/// For every non-blind direction of a class: the edge leaving through its
/// orbit, and a stabilizer element (with its word) taking the edge's
/// direction to it.
type DirectionIndex = HashMap<IntVector, (usize, Vec<Letter>, IntMatrix)>;

fn direction_index(graph: &ResidueGraph, class: usize, letters: &HashMap<IntMatrix, usize>) -> Result<DirectionIndex> {
    let n = graph.points[class].vector.len();
    let stab: Vec<(Letter, &IntMatrix)> = graph.stabilizers[class]
        .generators()
        .iter()
        .filter(|g| !g.matrix().is_identity())
        .map(|g| letter_of(letters, g.matrix()).map(|l| (l, g.matrix())))
        .collect::<Result<_>>()?;
    let mut index: DirectionIndex = HashMap::new();
    for (e_idx, e) in graph.edges.iter().enumerate().filter(|(_, e)| e.from == class) {
        let mut queue = vec![e.ray.clone()];
        index.entry(e.ray.clone()).or_insert((e_idx, Vec::new(), IntMatrix::identity(n)));
        let mut i = 0;
        while i < queue.len() {
            let (_, word, m) = index[&queue[i]].clone();
            for (l, g) in &stab {
                let img = primitive(&vec_mat(&queue[i], g));
                if !index.contains_key(&img) {
                    let mut w = word.clone();
                    w.push(*l);
                    index.insert(img.clone(), (e_idx, w, &m * *g));
                    queue.push(img);
                }
            }
            i += 1;
        }
    }
    Ok(index)
}

fn letter_of(letters: &HashMap<IntMatrix, usize>, m: &IntMatrix) -> Result<Letter> {
    letters.get(m).map(|&i| Letter::new(i, false)).ok_or_else(|| Error::Internal("graph element missing from the generator set".into()))
}

/// A word for an element of the stabilizer of a class.
fn stabilizer_word(
    graph: &ResidueGraph,
    class: usize,
    s: &IntMatrix,
    letters: &HashMap<IntMatrix, usize>,
    cap: usize,
) -> Result<Option<Vec<Letter>>> {
    let n = s.rows();
    if s.is_identity() {
        return Ok(Some(Vec::new()));
    }
    let stab: Vec<(Letter, &IntMatrix)> = graph.stabilizers[class]
        .generators()
        .iter()
        .filter(|g| !g.matrix().is_identity())
        .map(|g| letter_of(letters, g.matrix()).map(|l| (l, g.matrix())))
        .collect::<Result<_>>()?;
    let mut words: HashMap<IntMatrix, Vec<Letter>> = HashMap::from([(IntMatrix::identity(n), Vec::new())]);
    let mut queue = vec![IntMatrix::identity(n)];
    let mut i = 0;
    while i < queue.len() && queue.len() <= cap {
        for (l, g) in &stab {
            let h = &queue[i] * *g;
            if !words.contains_key(&h) {
                let mut w = words[&queue[i]].clone();
                w.push(*l);
                if &h == s {
                    return Ok(Some(w));
                }
                words.insert(h.clone(), w);
                queue.push(h);
            }
        }
        i += 1;
    }
    Ok(None)
}

/// Write an automorphism of the form as a word in the generators returned by
/// the traversal, by walking the Voronoi graph from the first representative
/// to its image with a descending linear objective. `None` if `g` does not
/// preserve the form or is not reached.
pub fn express(frame: &ConeFrame, graph: &ResidueGraph, gens: &GeneratorSet, g: &UnimodularMap) -> Result<Option<Vec<Letter>>> {
    const STEPS: usize = 100_000;
    const STAB_CAP: usize = 1_000_000;
    let n = frame.dim();
    if !g.preserves(frame.gram()) || graph.points.is_empty() {
        return Ok(None);
    }
    let mats = gens.matrices();
    let letters: HashMap<IntMatrix, usize> = mats.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
    let x1 = &graph.points[0];
    let mut prefix = Vec::new();
    let mut target = g.matrix().clone();
    if !frame.in_v1_int(&vec_mat(&x1.vector, &target)).in_closure() {
        let minus = -&IntMatrix::identity(n);
        match letters.get(&minus) {
            Some(&i) => prefix.push(Letter::new(i, false)),
            None => return Ok(None),
        }
        target = -&target;
    }
    let y = vec_mat(&x1.vector, &target);
    let target_inv_tr = unimodular_inverse(&target)?.transpose();
    let mut c = vec![BigInt::zero(); n];
    for d in x1.minvecs() {
        for (ci, v) in c.iter_mut().zip(vec_mat(d, &target_inv_tr)) {
            *ci += v;
        }
    }

    let mut indices: HashMap<usize, DirectionIndex> = HashMap::new();
    let mut class = 0;
    let mut h = IntMatrix::identity(n);
    // the word of h, reversed
    let mut rev: Vec<Letter> = Vec::new();
    let mut steps = 0;
    while vec_mat(&graph.points[class].vector, &h) != y {
        steps += 1;
        if steps > STEPS {
            return Err(Error::Internal("walk towards the target did not terminate".into()));
        }
        let p = &graph.points[class];
        let Some(k) = (0..p.rays.len()).find(|&k| dot(&vec_mat(p.ray(k), &h), &c).is_negative()) else {
            return Err(Error::Internal("walk stopped away from the target".into()));
        };
        if let std::collections::hash_map::Entry::Vacant(e) = indices.entry(class) {
            e.insert(direction_index(graph, class, &letters)?);
        }
        let (e_idx, sword, s) =
            indices[&class].get(p.ray(k)).cloned().ok_or_else(|| Error::Internal("direction not covered by an edge".into()))?;
        let e = &graph.edges[e_idx];
        rev.extend(sword.iter().rev());
        let omega_inv = match &e.connecting {
            Some(w) if !w.matrix().is_identity() => {
                let l = letter_of(&letters, w.matrix())?;
                rev.push(Letter::new(l.generator, true));
                unimodular_inverse(w.matrix())?
            }
            _ => IntMatrix::identity(n),
        };
        h = &(&omega_inv * &s) * &h;
        class = e.to;
    }
    if class != 0 {
        return Err(Error::Internal("target reached at another class".into()));
    }
    let s = &target * &unimodular_inverse(&h)?;
    let Some(sword) = stabilizer_word(graph, 0, &s, &letters, STAB_CAP)? else {
        return Ok(None);
    };
    let mut word = prefix;
    word.extend(sword);
    word.extend(rev.into_iter().rev());
    let inverses: Vec<IntMatrix> = mats.iter().map(unimodular_inverse).collect::<Result<_>>()?;
    if &evaluate(&word, &mats, &inverses, n) != g.matrix() {
        return Err(Error::Internal("word does not evaluate to the element".into()));
    }
    Ok(Some(word))
}

// ---------------------------------------------------------------------------
// verification

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    FormNotPreserved,
    NotUnimodular,
    NotPerfect,
    MinimalVectorsMismatch,
    StabilizerMovesPoint,
    EdgeMismatch,
    NotContiguous,
    DirectionNotCovered,
    Disconnected,
    Internal,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::FormNotPreserved => "form not preserved",
            ViolationKind::NotUnimodular => "determinant is not ±1",
            ViolationKind::NotPerfect => "representative is not perfect",
            ViolationKind::MinimalVectorsMismatch => "minimal vectors differ from recomputation",
            ViolationKind::StabilizerMovesPoint => "stabilizer element moves its point",
            ViolationKind::EdgeMismatch => "edge does not lead to its target",
            ViolationKind::NotContiguous => "connected points are not contiguous",
            ViolationKind::DirectionNotCovered => "direction not covered",
            ViolationKind::Disconnected => "graph is not connected",
            ViolationKind::Internal => "internal error during verification",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.detail)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerificationReport {
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, kind: ViolationKind, detail: String) {
        self.violations.push(Violation { kind, detail });
    }
}

fn check_map(report: &mut VerificationReport, a: &IntMatrix, g: &IntMatrix, what: &str) {
    if !g.det().abs().is_one() {
        report.push(ViolationKind::NotUnimodular, what.to_string());
    }
    if &g.congruence(a) != a {
        report.push(ViolationKind::FormNotPreserved, what.to_string());
    }
}

/// Re-check the traversal output from scratch.
pub fn verify(frame: &ConeFrame, graph: &ResidueGraph, gens: &GeneratorSet) -> VerificationReport {
    let mut report = VerificationReport::default();
    let a = frame.gram();
    let n = frame.dim();
    for (k, g) in gens.generators.iter().enumerate() {
        check_map(&mut report, a, g.matrix(), &format!("generator {k}"));
    }
    for (i, p) in graph.points.iter().enumerate() {
        match minimal_vectors(frame, &p.vector) {
            Ok(m) => {
                if m.rank_of_span != n {
                    report.push(ViolationKind::NotPerfect, format!("class {i}"));
                }
                if m.minvecs != p.data.minvecs {
                    report.push(ViolationKind::MinimalVectorsMismatch, format!("class {i}"));
                }
            }
            Err(e) => report.push(ViolationKind::NotPerfect, format!("class {i}: {e}")),
        }
    }
    for (i, s) in graph.stabilizers.iter().enumerate() {
        for g in s.generators() {
            check_map(&mut report, a, g.matrix(), &format!("stabilizer of class {i}"));
            if g.apply(&graph.points[i].vector) != graph.points[i].vector {
                report.push(ViolationKind::StabilizerMovesPoint, format!("class {i}"));
            }
        }
    }
    let mut covered: Vec<BTreeSet<IntVector>> = vec![BTreeSet::new(); graph.points.len()];
    for (e_idx, e) in graph.edges.iter().enumerate() {
        if e.from >= graph.points.len() || e.to >= graph.points.len() {
            report.push(ViolationKind::EdgeMismatch, format!("edge {e_idx} has an endpoint out of range"));
            continue;
        }
        let c = e.connecting.as_ref().map_or_else(|| IntMatrix::identity(n), |c| c.matrix().clone());
        if let Some(conn) = &e.connecting {
            check_map(&mut report, a, conn.matrix(), &format!("connecting element of edge {e_idx}"));
        }
        let x = &graph.points[e.from];
        let Some(ray_idx) = x.rays.position(&e.ray) else {
            report.push(ViolationKind::EdgeMismatch, format!("edge {e_idx}: not a direction of class {}", e.from));
            continue;
        };
        match neighbour(frame, x, ray_idx) {
            Ok(y) => {
                if vec_mat(&y.vector, &c) != graph.points[e.to].vector {
                    report.push(ViolationKind::EdgeMismatch, format!("edge {e_idx}"));
                }
                let common: Vec<IntVector> = x.minvecs().iter().filter(|d| y.minvecs().contains(d)).cloned().collect();
                if common.is_empty() || IntMatrix::from_rows(&common, n).rank() + 1 < n {
                    report.push(ViolationKind::NotContiguous, format!("edge {e_idx}"));
                }
            }
            Err(err) => report.push(ViolationKind::Internal, format!("edge {e_idx}: {err}")),
        }
        let back: IntVector = primitive(&vec_mat(&e.ray, &c)).into_iter().map(|v| -v).collect();
        if back != e.reverse_ray || graph.points[e.to].rays.position(&back).is_none() {
            report.push(ViolationKind::EdgeMismatch, format!("edge {e_idx}: reverse direction"));
        }
        covered[e.from].insert(e.ray.clone());
    }
    for (i, p) in graph.points.iter().enumerate() {
        // only elements that pass the checks above permute the directions
        let gens: Vec<UnimodularMap> = graph
            .stabilizers
            .get(i)
            .map(|s| s.generators().to_vec())
            .unwrap_or_default()
            .into_iter()
            .filter(|g| g.matrix().det().abs().is_one() && g.preserves(a) && g.apply(&p.vector) == p.vector)
            .collect();
        let mut reach: BTreeSet<IntVector> = covered[i].clone();
        let mut queue: Vec<IntVector> = reach.iter().cloned().collect();
        while let Some(r) = queue.pop() {
            for g in &gens {
                let img = primitive(&g.apply(&r));
                if p.rays.position(&img).is_some() && reach.insert(img.clone()) {
                    queue.push(img);
                }
            }
        }
        for k in p.non_blind_rays(frame) {
            if !reach.contains(p.ray(k)) {
                report.push(ViolationKind::DirectionNotCovered, format!("class {i}, direction {:?}", p.ray(k)));
            }
        }
    }
    if !graph.points.is_empty() {
        let mut seen = vec![false; graph.points.len()];
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(v) = stack.pop() {
            for e in &graph.edges {
                for (s, t) in [(e.from, e.to), (e.to, e.from)] {
                    if s == v && t < seen.len() && !seen[t] {
                        seen[t] = true;
                        stack.push(t);
                    }
                }
            }
        }
        if seen.iter().any(|s| !s) {
            report.push(ViolationKind::Disconnected, String::new());
        }
    }
    report
}
