//! Exact integer and rational linear algebra.
//!
//! Vectors are row vectors throughout and matrices act on them from the
//! right (`v · M`). Every routine is exact; nothing here touches floating
//! point.

use std::fmt;
use std::ops::{Index, IndexMut, Mul, Neg};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;
pub type IntVector = Vec<BigInt>;
pub type RatVector = Vec<Rat>;

pub fn int(v: i64) -> BigInt {
    BigInt::from(v)
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn int_vec(v: &[i64]) -> IntVector {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn to_rat_vec(v: &[BigInt]) -> RatVector {
    v.iter().map(|x| Rat::from_integer(x.clone())).collect()
}

pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn rat_dot(a: &[Rat], b: &[Rat]) -> Rat {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Rat::zero();
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// gcd of the entries, always non-negative.
pub fn content(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

/// Divide by the content. The zero vector is returned unchanged.
pub fn primitive(v: &[BigInt]) -> IntVector {
    let g = content(v);
    if g.is_zero() || g.is_one() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &g).collect()
}

/// Scale a rational vector to the primitive integral vector on the same ray.
pub fn primitive_from_rat(v: &[Rat]) -> IntVector {
    let den = v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let scaled: IntVector = v.iter().map(|x| (x * Rat::from_integer(den.clone())).to_integer()).collect();
    primitive(&scaled)
}

pub fn is_zero_vec(v: &[BigInt]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Row vector times matrix.
pub fn vec_mat(v: &[BigInt], m: &IntMatrix) -> IntVector {
    assert_eq!(v.len(), m.rows, "vec_mat dimension");
    let mut out = vec![BigInt::zero(); m.cols];
    for (i, vi) in v.iter().enumerate() {
        if vi.is_zero() {
            continue;
        }
        for (j, o) in out.iter_mut().enumerate() {
            *o += vi * &m[(i, j)];
        }
    }
    out
}

pub fn rat_vec_mat(v: &[Rat], m: &RatMatrix) -> RatVector {
    assert_eq!(v.len(), m.rows, "rat_vec_mat dimension");
    let mut out = vec![Rat::zero(); m.cols];
    for (i, vi) in v.iter().enumerate() {
        if vi.is_zero() {
            continue;
        }
        for (j, o) in out.iter_mut().enumerate() {
            *o += vi * &m[(i, j)];
        }
    }
    out
}

/// `u · M · v^tr`.
pub fn bilinear(u: &[BigInt], m: &IntMatrix, v: &[BigInt]) -> BigInt {
    dot(&vec_mat(u, m), v)
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Self {
        assert_eq!(data.len(), rows * cols, "IntMatrix data length");
        IntMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix::new(rows, cols, vec![BigInt::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn diagonal(d: &[BigInt]) -> Self {
        let mut m = IntMatrix::zeros(d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            m[(i, i)] = x.clone();
        }
        m
    }

    pub fn from_i64(rows: usize, cols: usize, data: &[i64]) -> Self {
        IntMatrix::new(rows, cols, data.iter().map(|&x| BigInt::from(x)).collect())
    }

    /// Build from rows; all rows must share a length. An empty list gives a
    /// `0 × cols` matrix, which needs the column count from elsewhere.
    pub fn from_rows(rows: &[IntVector], cols: usize) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend(r.iter().cloned());
        }
        IntMatrix::new(rows.len(), cols, data)
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows: Vec<IntVector> = rows.iter().map(|r| int_vec(r)).collect();
        IntMatrix::from_rows(&rows, cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[BigInt] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [BigInt] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<IntVector> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> IntVector {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..self.cols).all(|j| if i == j { self[(i, j)].is_one() } else { self[(i, j)].is_zero() }))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// `row[dst] += f * row[src]`
    pub fn add_row_multiple(&mut self, dst: usize, src: usize, f: &BigInt) {
        if f.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = &self.data[src * self.cols + j] * f;
            self.data[dst * self.cols + j] += v;
        }
    }

    /// `col[dst] += f * col[src]`
    pub fn add_col_multiple(&mut self, dst: usize, src: usize, f: &BigInt) {
        if f.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = &self.data[i * self.cols + src] * f;
            self.data[i * self.cols + dst] += v;
        }
    }

    pub fn negate_row(&mut self, i: usize) {
        for x in self.row_mut(i) {
            *x = -std::mem::take(x);
        }
    }

    pub fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let x = &mut self.data[i * self.cols + j];
            *x = -std::mem::take(x);
        }
    }

    /// Vertical concatenation.
    pub fn stack(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.cols, "stack column mismatch");
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        IntMatrix::new(self.rows + other.rows, self.cols, data)
    }

    pub fn scale(&self, f: &BigInt) -> IntMatrix {
        IntMatrix::new(self.rows, self.cols, self.data.iter().map(|x| x * f).collect())
    }

    pub fn to_rat(&self) -> RatMatrix {
        RatMatrix::new(self.rows, self.cols, self.data.iter().map(|x| Rat::from_integer(x.clone())).collect())
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        assert!(self.is_square(), "det of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !m[(i, k)].is_zero()) {
                    Some(p) => {
                        m.swap_rows(k, p);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &m[(i, j)] * &m[(k, k)] - &m[(i, k)] * &m[(k, j)];
                    m[(i, j)] = v / &prev;
                }
            }
            prev = m[(k, k)].clone();
        }
        sign * &m[(n - 1, n - 1)]
    }

    /// Adjugate, so that `M · adj(M) = det(M) · I`.
    pub fn adjugate(&self) -> IntMatrix {
        assert!(self.is_square());
        let n = self.rows;
        let det = self.det();
        if !det.is_zero() {
            let inv = self.to_rat().inverse().expect("nonsingular");
            let d = Rat::from_integer(det);
            let data = inv.data.iter().map(|x| (x * &d).to_integer()).collect();
            return IntMatrix::new(n, n, data);
        }
        // singular: cofactor expansion
        let mut adj = IntMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let minor = self.minor(j, i);
                let c = minor.det();
                adj[(i, j)] = if (i + j) % 2 == 0 { c } else { -c };
            }
        }
        adj
    }

    fn minor(&self, r: usize, c: usize) -> IntMatrix {
        let mut data = Vec::with_capacity((self.rows - 1) * (self.cols - 1));
        for i in (0..self.rows).filter(|&i| i != r) {
            for j in (0..self.cols).filter(|&j| j != c) {
                data.push(self[(i, j)].clone());
            }
        }
        IntMatrix::new(self.rows - 1, self.cols - 1, data)
    }

    pub fn rank(&self) -> usize {
        self.to_rat().rank()
    }

    /// `self · g · self^tr`
    pub fn congruence(&self, g: &IntMatrix) -> IntMatrix {
        &(self * g) * &self.transpose()
    }

    pub fn max_abs_entry(&self) -> BigInt {
        self.data.iter().map(|x| x.abs()).max().unwrap_or_default()
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &IntMatrix {
    type Output = IntMatrix;
    fn mul(self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension");
        let mut out = IntMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * &rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Neg for &IntMatrix {
    type Output = IntMatrix;
    fn neg(self) -> IntMatrix {
        IntMatrix::new(self.rows, self.cols, self.data.iter().map(|x| -x).collect())
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RatMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Rat>) -> Self {
        assert_eq!(data.len(), rows * cols, "RatMatrix data length");
        RatMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix::new(rows, cols, vec![Rat::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_rows(rows: &[RatVector], cols: usize) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend(r.iter().cloned());
        }
        RatMatrix::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Rat] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut t = RatMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    pub fn add_row_multiple(&mut self, dst: usize, src: usize, f: &Rat) {
        if f.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = &self.data[src * self.cols + j] * f;
            self.data[dst * self.cols + j] += v;
        }
    }

    pub fn add_col_multiple(&mut self, dst: usize, src: usize, f: &Rat) {
        if f.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = &self.data[i * self.cols + src] * f;
            self.data[i * self.cols + dst] += v;
        }
    }

    /// Least common denominator of all entries.
    pub fn denominator(&self) -> BigInt {
        self.data.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()))
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }

    pub fn to_int(&self) -> Option<IntMatrix> {
        if !self.is_integral() {
            return None;
        }
        Some(IntMatrix::new(self.rows, self.cols, self.data.iter().map(|x| x.to_integer()).collect()))
    }

    /// Multiply by `f` and truncate to integers; caller guarantees integrality.
    pub fn scale_to_int(&self, f: &BigInt) -> IntMatrix {
        let f = Rat::from_integer(f.clone());
        let data = self
            .data
            .iter()
            .map(|x| {
                let y = x * &f;
                debug_assert!(y.is_integer());
                y.to_integer()
            })
            .collect();
        IntMatrix::new(self.rows, self.cols, data)
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for col in 0..m.cols {
            let Some(p) = (rank..m.rows).find(|&i| !m[(i, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(rank, p);
            let pivot = m[(rank, col)].clone();
            for i in rank + 1..m.rows {
                if m[(i, col)].is_zero() {
                    continue;
                }
                let f = -(&m[(i, col)] / &pivot);
                m.add_row_multiple(i, rank, &f);
            }
            rank += 1;
            if rank == m.rows {
                break;
            }
        }
        rank
    }

    pub fn det(&self) -> Rat {
        assert_eq!(self.rows, self.cols);
        let mut m = self.clone();
        let mut det = Rat::one();
        for col in 0..m.cols {
            let Some(p) = (col..m.rows).find(|&i| !m[(i, col)].is_zero()) else {
                return Rat::zero();
            };
            if p != col {
                m.swap_rows(col, p);
                det = -det;
            }
            let pivot = m[(col, col)].clone();
            det *= &pivot;
            for i in col + 1..m.rows {
                if m[(i, col)].is_zero() {
                    continue;
                }
                let f = -(&m[(i, col)] / &pivot);
                m.add_row_multiple(i, col, &f);
            }
        }
        det
    }

    /// Gauss–Jordan inverse.
    pub fn inverse(&self) -> Result<RatMatrix> {
        if self.rows != self.cols {
            return Err(Error::Dimension("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut inv = RatMatrix::identity(n);
        for col in 0..n {
            let p = (col..n).find(|&i| !m[(i, col)].is_zero()).ok_or(Error::Singular)?;
            m.swap_rows(col, p);
            inv.swap_rows(col, p);
            let pivot = m[(col, col)].clone();
            for j in 0..n {
                m[(col, j)] /= &pivot;
                inv[(col, j)] /= &pivot;
            }
            for i in 0..n {
                if i == col || m[(i, col)].is_zero() {
                    continue;
                }
                let f = -m[(i, col)].clone();
                m.add_row_multiple(i, col, &f);
                inv.add_row_multiple(i, col, &f);
            }
        }
        Ok(inv)
    }

    pub fn congruence(&self, g: &RatMatrix) -> RatMatrix {
        &(self * g) * &self.transpose()
    }
}

impl Index<(usize, usize)> for RatMatrix {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &RatMatrix {
    type Output = RatMatrix;
    fn mul(self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension");
        let mut out = RatMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * &rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Upper row echelon HNF in place (pivots positive, entries above each
/// pivot reduced into `[0, pivot)`, zero rows last). Row operations are
/// mirrored on `u`.
fn hnf_upper_in_place(m: &mut IntMatrix, u: &mut IntMatrix) {
    let (rows, cols) = (m.rows, m.cols);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        loop {
            // smallest nonzero |entry| at or below r in column c
            let pivot = (r..rows).filter(|&i| !m[(i, c)].is_zero()).min_by(|&a, &b| m[(a, c)].abs().cmp(&m[(b, c)].abs()));
            let Some(p) = pivot else { break };
            m.swap_rows(r, p);
            u.swap_rows(r, p);
            let mut done = true;
            for i in r + 1..rows {
                if m[(i, c)].is_zero() {
                    continue;
                }
                let q = m[(i, c)].div_floor(&m[(r, c)]);
                let nq = -q;
                m.add_row_multiple(i, r, &nq);
                u.add_row_multiple(i, r, &nq);
                if !m[(i, c)].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if m[(r, c)].is_zero() {
            continue;
        }
        if m[(r, c)].is_negative() {
            m.negate_row(r);
            u.negate_row(r);
        }
        let piv = m[(r, c)].clone();
        for i in 0..r {
            let q = m[(i, c)].div_floor(&piv);
            if !q.is_zero() {
                let nq = -q;
                m.add_row_multiple(i, r, &nq);
                u.add_row_multiple(i, r, &nq);
            }
        }
        r += 1;
    }
}

/// Row Hermite normal form `H = U · M` with `U` unimodular.
///
/// Convention: lower-triangular. Zero rows come first; each nonzero row
/// ends in a positive pivot, pivot columns strictly increase down the
/// matrix, and the entries below a pivot lie in `[0, pivot)`.
pub fn hnf(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let (rows, cols) = (m.rows, m.cols);
    // mirror columns, run the upper form, mirror rows and columns back
    let mut work = IntMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            work[(i, cols - 1 - j)] = m[(i, j)].clone();
        }
    }
    let mut u = IntMatrix::identity(rows);
    hnf_upper_in_place(&mut work, &mut u);
    let mut h = IntMatrix::zeros(rows, cols);
    let mut uu = IntMatrix::zeros(rows, rows);
    for i in 0..rows {
        for j in 0..cols {
            h[(rows - 1 - i, cols - 1 - j)] = work[(i, j)].clone();
        }
        for j in 0..rows {
            uu[(rows - 1 - i, j)] = u[(i, j)].clone();
        }
    }
    (h, uu)
}

/// HNF basis of the row lattice: the nonzero rows of `hnf(m)`.
pub fn lattice_basis(m: &IntMatrix) -> IntMatrix {
    let (h, _) = hnf(m);
    let nonzero: Vec<IntVector> = h.to_rows().into_iter().filter(|r| !is_zero_vec(r)).collect();
    IntMatrix::from_rows(&nonzero, m.cols)
}

/// Shape predicate for the HNF convention used by [`hnf`].
pub fn is_hnf(h: &IntMatrix) -> bool {
    let mut last_pivot: Option<usize> = None;
    let mut seen_nonzero = false;
    for i in 0..h.rows() {
        let row = h.row(i);
        let Some(p) = row.iter().rposition(|x| !x.is_zero()) else {
            if seen_nonzero {
                return false;
            }
            continue;
        };
        seen_nonzero = true;
        if !row[p].is_positive() {
            return false;
        }
        if let Some(lp) = last_pivot {
            if p <= lp {
                return false;
            }
        }
        for k in i + 1..h.rows() {
            let e = &h[(k, p)];
            if e.is_negative() || e >= &row[p] {
                return false;
            }
        }
        last_pivot = Some(p);
    }
    true
}

/// Basis of the saturated left kernel `{v ∈ Z^r : v · M = 0}`, in HNF.
pub fn kernel_saturated(m: &IntMatrix) -> IntMatrix {
    let (h, u) = hnf(m);
    let kernel: Vec<IntVector> = (0..h.rows()).filter(|&i| is_zero_vec(h.row(i))).map(|i| u.row(i).to_vec()).collect();
    if kernel.is_empty() {
        return IntMatrix::zeros(0, m.rows());
    }
    lattice_basis(&IntMatrix::from_rows(&kernel, m.rows()))
}

/// Smith normal form `S = U · M · V` with `d_i | d_{i+1}`, all `d_i ≥ 0`.
pub fn snf(m: &IntMatrix) -> (IntMatrix, IntMatrix, IntMatrix) {
    let (rows, cols) = (m.rows, m.cols);
    let mut s = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    let steps = rows.min(cols);
    for t in 0..steps {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if s[(i, j)].is_zero() {
                        continue;
                    }
                    if best.is_none_or(|(bi, bj)| s[(i, j)].abs() < s[(bi, bj)].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return (s, u, v);
            };
            s.swap_rows(t, pi);
            u.swap_rows(t, pi);
            s.swap_cols(t, pj);
            v.swap_cols(t, pj);
            let mut clean = true;
            for i in t + 1..rows {
                if s[(i, t)].is_zero() {
                    continue;
                }
                let q = -s[(i, t)].div_floor(&s[(t, t)]);
                s.add_row_multiple(i, t, &q);
                u.add_row_multiple(i, t, &q);
                clean &= s[(i, t)].is_zero();
            }
            for j in t + 1..cols {
                if s[(t, j)].is_zero() {
                    continue;
                }
                let q = -s[(t, j)].div_floor(&s[(t, t)]);
                s.add_col_multiple(j, t, &q);
                v.add_col_multiple(j, t, &q);
                clean &= s[(t, j)].is_zero();
            }
            if !clean {
                continue;
            }
            let piv = s[(t, t)].clone();
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !s[(i, j)].is_multiple_of(&piv)));
            match bad {
                Some(i) => {
                    let one = BigInt::one();
                    s.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
        if s[(t, t)].is_negative() {
            s.negate_row(t);
            u.negate_row(t);
        }
    }
    (s, u, v)
}

/// Elementary divisors (diagonal of the SNF), zeros included.
pub fn elementary_divisors(m: &IntMatrix) -> Vec<BigInt> {
    let (s, _, _) = snf(m);
    (0..m.rows().min(m.cols())).map(|i| s[(i, i)].clone()).collect()
}

/// `LDL^tr` pivots of a symmetric rational matrix; `None` if a zero pivot
/// shows up before the end.
fn ldl_pivots(g: &RatMatrix) -> Option<Vec<Rat>> {
    let n = g.rows();
    let mut m = g.clone();
    let mut piv = Vec::with_capacity(n);
    for k in 0..n {
        let p = m[(k, k)].clone();
        if p.is_zero() {
            return None;
        }
        for i in k + 1..n {
            if m[(i, k)].is_zero() {
                continue;
            }
            let f = -(&m[(i, k)] / &p);
            m.add_row_multiple(i, k, &f);
        }
        piv.push(p);
    }
    Some(piv)
}

/// Exact positive-definiteness test: every leading principal minor > 0.
pub fn is_positive_definite(g: &RatMatrix) -> bool {
    g.is_symmetric() && ldl_pivots(g).is_some_and(|p| p.iter().all(Signed::is_positive))
}

struct GramSchmidt {
    mu: Vec<Vec<Rat>>,
    b: Vec<Rat>,
}

fn gram_schmidt(g: &RatMatrix) -> GramSchmidt {
    let n = g.rows();
    let mut mu = vec![vec![Rat::zero(); n]; n];
    let mut b = vec![Rat::zero(); n];
    for i in 0..n {
        for j in 0..i {
            let mut s = g[(i, j)].clone();
            for k in 0..j {
                s -= &mu[j][k] * &mu[i][k] * &b[k];
            }
            mu[i][j] = s / &b[j];
        }
        let mut s = g[(i, i)].clone();
        for k in 0..i {
            s -= &mu[i][k] * &mu[i][k] * &b[k];
        }
        b[i] = s;
    }
    GramSchmidt { mu, b }
}

fn round_rat(x: &Rat) -> BigInt {
    (x + rat(1, 2)).floor().to_integer()
}

/// LLL reduction of a positive definite Gram matrix with `δ = 3/4`.
///
/// Returns `(G', U)` with `G' = U · G · U^tr`. The Lovász condition is
/// checked in exact rational arithmetic.
pub fn lll_reduce(g: &RatMatrix) -> Result<(RatMatrix, IntMatrix)> {
    if !g.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    if !is_positive_definite(g) {
        return Err(Error::NotPositiveDefinite);
    }
    let n = g.rows();
    let mut gc = g.clone();
    let mut u = IntMatrix::identity(n);
    if n <= 1 {
        return Ok((gc, u));
    }
    let delta = rat(3, 4);
    let mut k = 1;
    while k < n {
        // size reduction of b_k
        for j in (0..k).rev() {
            let gs = gram_schmidt(&gc);
            let q = round_rat(&gs.mu[k][j]);
            if q.is_zero() {
                continue;
            }
            let nq = -q;
            let nqr = Rat::from_integer(nq.clone());
            u.add_row_multiple(k, j, &nq);
            gc.add_row_multiple(k, j, &nqr);
            gc.add_col_multiple(k, j, &nqr);
        }
        let gs = gram_schmidt(&gc);
        let lhs = gs.b[k].clone();
        let rhs = (&delta - &gs.mu[k][k - 1] * &gs.mu[k][k - 1]) * &gs.b[k - 1];
        if lhs >= rhs {
            k += 1;
        } else {
            u.swap_rows(k, k - 1);
            gc.swap_rows(k, k - 1);
            gc.swap_cols(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    Ok((gc, u))
}

/// Check the two LLL conditions (size reduction and Lovász, `δ = 3/4`).
pub fn is_lll_reduced(g: &RatMatrix) -> bool {
    let n = g.rows();
    let gs = gram_schmidt(g);
    let half = rat(1, 2);
    for i in 0..n {
        for j in 0..i {
            if gs.mu[i][j].abs() > half {
                return false;
            }
        }
    }
    for k in 1..n {
        if gs.b[k] < (rat(3, 4) - &gs.mu[k][k - 1] * &gs.mu[k][k - 1]) * &gs.b[k - 1] {
            return false;
        }
    }
    true
}

/// Symmetric Gaussian elimination over Q: `T · A · T^tr = diag`.
pub fn rational_diagonalize(a: &IntMatrix) -> Result<(RatMatrix, RatVector)> {
    if !a.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let n = a.rows();
    let mut m = a.to_rat();
    let mut t = RatMatrix::identity(n);
    for i in 0..n {
        if m[(i, i)].is_zero() {
            if let Some(j) = (i + 1..n).find(|&j| !m[(j, j)].is_zero()) {
                m.swap_rows(i, j);
                m.swap_cols(i, j);
                t.swap_rows(i, j);
            } else if let Some(j) = (i + 1..n).find(|&j| !m[(i, j)].is_zero()) {
                let one = Rat::one();
                m.add_row_multiple(i, j, &one);
                m.add_col_multiple(i, j, &one);
                t.add_row_multiple(i, j, &one);
            } else {
                return Err(Error::Singular);
            }
        }
        let p = m[(i, i)].clone();
        for j in i + 1..n {
            if m[(j, i)].is_zero() {
                continue;
            }
            let f = -(&m[(j, i)] / &p);
            m.add_row_multiple(j, i, &f);
            m.add_col_multiple(j, i, &f);
            t.add_row_multiple(j, i, &f);
        }
    }
    let diag = (0..n).map(|i| m[(i, i)].clone()).collect();
    Ok((t, diag))
}

/// Solve `x · M = b` for a full-row-rank `M` when a solution exists.
pub fn solve_left(m: &RatMatrix, b: &[Rat]) -> Option<RatVector> {
    // x M = b  <=>  M^tr x^tr = b^tr; eliminate on the augmented transpose
    let (r, c) = (m.rows(), m.cols());
    assert_eq!(b.len(), c);
    let mut aug = RatMatrix::zeros(c, r + 1);
    for i in 0..c {
        for j in 0..r {
            aug[(i, j)] = m[(j, i)].clone();
        }
        aug[(i, r)] = b[i].clone();
    }
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..r {
        let Some(p) = (row..c).find(|&i| !aug[(i, col)].is_zero()) else { continue };
        aug.swap_rows(row, p);
        let piv = aug[(row, col)].clone();
        for j in 0..=r {
            aug[(row, j)] /= &piv;
        }
        for i in 0..c {
            if i != row && !aug[(i, col)].is_zero() {
                let f = -aug[(i, col)].clone();
                aug.add_row_multiple(i, row, &f);
            }
        }
        pivots.push(col);
        row += 1;
    }
    if (row..c).any(|i| !aug[(i, r)].is_zero()) {
        return None;
    }
    let mut x = vec![Rat::zero(); r];
    for (i, &col) in pivots.iter().enumerate() {
        x[col] = aug[(i, r)].clone();
    }
    Some(x)
}

/// Complete a primitive vector to a unimodular matrix whose last row is it.
pub fn complete_to_basis(v: &[BigInt]) -> IntMatrix {
    let n = v.len();
    let col = IntMatrix::from_rows(&[v.to_vec()], n).transpose();
    // U · col = (0, …, 0, 1)^tr, so col is the last column of U^{-1}
    let (h, u) = hnf(&col);
    debug_assert!(h[(n - 1, 0)].is_one());
    let inv = u.to_rat().inverse().expect("unimodular").to_int().expect("integral");
    // rows of inv^tr form a basis; its last row is v
    inv.transpose()
}

/// Inverse of an integral matrix with `|det| = 1`.
pub fn unimodular_inverse(m: &IntMatrix) -> Result<IntMatrix> {
    let inv = m.to_rat().inverse()?;
    inv.to_int().ok_or_else(|| Error::Internal("matrix is not unimodular".into()))
}

/// An integral square matrix with determinant ±1.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnimodularMap(IntMatrix);

impl UnimodularMap {
    pub fn new(m: IntMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension("unimodular map must be square".into()));
        }
        if !m.det().abs().is_one() {
            return Err(Error::Internal(format!("determinant of {m} is not ±1")));
        }
        Ok(UnimodularMap(m))
    }

    /// Wrap without checking the determinant.
    pub fn new_unchecked(m: IntMatrix) -> Self {
        UnimodularMap(m)
    }

    pub fn identity(n: usize) -> Self {
        UnimodularMap(IntMatrix::identity(n))
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> IntMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn inverse(&self) -> UnimodularMap {
        UnimodularMap(unimodular_inverse(&self.0).expect("unimodular"))
    }

    pub fn compose(&self, other: &UnimodularMap) -> UnimodularMap {
        UnimodularMap(&self.0 * &other.0)
    }

    /// `g · A · g^tr = A`
    pub fn preserves(&self, a: &IntMatrix) -> bool {
        &self.0.congruence(a) == a
    }

    pub fn apply(&self, v: &[BigInt]) -> IntVector {
        vec_mat(v, &self.0)
    }
}

impl fmt::Debug for UnimodularMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&self.0, f)
    }
}

impl fmt::Display for UnimodularMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&self.0, f)
    }
}
