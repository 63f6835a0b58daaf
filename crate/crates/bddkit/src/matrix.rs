//! Exact rational matrices, lattice bases, pseudoinverse coefficient
//! extraction, and integer-matrix Hermite normal form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

/// Dense rational matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMat {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl RatMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMat {
            rows,
            cols,
            data: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigRational::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|row| row.len()).unwrap_or(0);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged matrix rows".into()));
        }
        Ok(RatMat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<BigRational> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row(&self, i: usize) -> Vec<BigRational> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn transpose(&self) -> RatMat {
        let mut out = RatMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn mul(&self, other: &RatMat) -> RatMat {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = RatMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let mut s = BigRational::zero();
                for j in 0..self.cols {
                    s += self.get(i, j) * &v[j];
                }
                s
            })
            .collect()
    }

    /// Solves `A x = b` for square `A` by exact Gaussian elimination.
    /// Returns `None` when `A` is singular.
    pub fn solve(&self, b: &[BigRational]) -> Option<Vec<BigRational>> {
        assert_eq!(self.rows, self.cols, "solve needs a square matrix");
        assert_eq!(self.rows, b.len());
        let n = self.rows;
        let mut a = self.clone();
        let mut rhs = b.to_vec();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a.get(r, col).is_zero())?;
            if pivot != col {
                for j in 0..n {
                    let tmp = a.get(pivot, j).clone();
                    a.set(pivot, j, a.get(col, j).clone());
                    a.set(col, j, tmp);
                }
                rhs.swap(pivot, col);
            }
            let p = a.get(col, col).clone();
            for r in 0..n {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let factor = a.get(r, col) / &p;
                for j in col..n {
                    let v = a.get(r, j) - &factor * a.get(col, j);
                    a.set(r, j, v);
                }
                let v = &rhs[r] - &factor * &rhs[col];
                rhs[r] = v;
            }
        }
        Some(
            (0..n)
                .map(|i| &rhs[i] / a.get(i, i))
                .collect(),
        )
    }

    pub fn from_int(m: &IntMat) -> RatMat {
        let mut out = RatMat::zeros(m.rows, m.cols);
        for i in 0..m.rows {
            for j in 0..m.cols {
                out.set(i, j, BigRational::from_integer(m.get(i, j).clone()));
            }
        }
        out
    }
}

/// A lattice basis: a d×n rational matrix with linearly independent columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    mat: RatMat,
    gram: RatMat,
}

impl Basis {
    pub fn new(mat: RatMat) -> Result<Self> {
        if mat.cols() == 0 || mat.rows() < mat.cols() {
            return Err(Error::Dimension(format!(
                "basis must be d x n with d >= n >= 1, got {} x {}",
                mat.rows(),
                mat.cols()
            )));
        }
        let gram = mat.transpose().mul(&mat);
        // full column rank iff the Gram matrix is nonsingular
        let probe = vec![BigRational::zero(); gram.rows()];
        if gram.solve(&probe).is_none() {
            return Err(Error::SingularBasis);
        }
        Ok(Basis { mat, gram })
    }

    pub fn matrix(&self) -> &RatMat {
        &self.mat
    }

    pub fn gram(&self) -> &RatMat {
        &self.gram
    }

    /// Ambient dimension d.
    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    /// Lattice rank n.
    pub fn rank(&self) -> usize {
        self.mat.cols()
    }

    /// The unique coefficient vector `c` with `B c = v`, i.e. `B^+ v`,
    /// via the exact normal-equation solve `(B^t B) c = B^t v`.
    pub fn coeffs(&self, v: &[BigRational]) -> Result<Vec<BigRational>> {
        if v.len() != self.dim() {
            return Err(Error::Dimension("vector/basis dimension mismatch".into()));
        }
        let rhs = self.mat.transpose().mul_vec(v);
        let c = self.gram.solve(&rhs).ok_or(Error::SingularBasis)?;
        let back = self.mat.mul_vec(&c);
        if back != v {
            return Err(Error::OutsideSpan);
        }
        Ok(c)
    }

    /// Least-squares coefficients `B^+ v` without the span check; the
    /// residual `v - B(B^+ v)` is orthogonal to the column span.
    pub fn coeffs_projected(&self, v: &[BigRational]) -> Result<Vec<BigRational>> {
        if v.len() != self.dim() {
            return Err(Error::Dimension("vector/basis dimension mismatch".into()));
        }
        let rhs = self.mat.transpose().mul_vec(v);
        self.gram.solve(&rhs).ok_or(Error::SingularBasis)
    }

    /// Lattice point with the given integer coefficient vector.
    pub fn point(&self, coeffs: &[BigInt]) -> Vec<BigRational> {
        let v: Vec<BigRational> = coeffs
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect();
        self.mat.mul_vec(&v)
    }

    /// `B * U` for an integer matrix `U` (columns stay in the lattice).
    pub fn mul_int(&self, u: &IntMat) -> Result<Basis> {
        Basis::new(self.mat.mul(&RatMat::from_int(u)))
    }
}

/// Dense integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMat {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMat {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|row| row.len()).unwrap_or(0);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged matrix rows".into()));
        }
        Ok(IntMat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn mul(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.cols, other.rows);
        let mut out = IntMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            let t = self.get(i, a).clone();
            self.set(i, a, self.get(i, b).clone());
            self.set(i, b, t);
        }
    }

    fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = -self.get(i, j).clone();
            self.set(i, j, v);
        }
    }

    /// `col_dst -= q * col_src`
    fn addmul_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = self.get(i, dst) - q * self.get(i, src);
            self.set(i, dst, v);
        }
    }
}

/// Result of a column-style Hermite normal form computation: `h = m * u`
/// with `u` unimodular.
#[derive(Debug, Clone)]
pub struct Hnf {
    pub h: IntMat,
    pub u: IntMat,
    /// Pivot row of each column, strictly increasing.
    pub pivot_rows: Vec<usize>,
}

impl Hnf {
    /// Product of pivot entries: `|det|` of the lattice generated by the
    /// columns (the full-dimensional covolume for square inputs).
    pub fn det_abs(&self) -> BigInt {
        let mut d = BigInt::one();
        for (j, &r) in self.pivot_rows.iter().enumerate() {
            d *= self.h.get(r, j);
        }
        d
    }
}

/// Column-style Hermite normal form of a full-column-rank integer matrix.
///
/// Pivots are positive, entries left of a pivot in its row are reduced to
/// `[0, pivot)`, and entries right of a pivot in its row are zero. The
/// result is the unique canonical basis of the column lattice.
pub fn hnf(m: &IntMat) -> Result<Hnf> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut h = m.clone();
    let mut u = IntMat::identity(cols);
    let mut pivot_rows = Vec::with_capacity(cols);
    let mut j = 0usize;
    for r in 0..rows {
        if j == cols {
            break;
        }
        // gather the row-r entries of columns j.. into a single pivot
        loop {
            let mut best: Option<usize> = None;
            for k in j..cols {
                if h.get(r, k).is_zero() {
                    continue;
                }
                match best {
                    None => best = Some(k),
                    Some(b) => {
                        if h.get(r, k).magnitude() < h.get(r, b).magnitude() {
                            best = Some(k);
                        }
                    }
                }
            }
            let Some(b) = best else { break };
            h.swap_cols(j, b);
            u.swap_cols(j, b);
            let mut others = false;
            let pivot = h.get(r, j).clone();
            for k in j + 1..cols {
                if h.get(r, k).is_zero() {
                    continue;
                }
                let q = crate::matrix::div_round(h.get(r, k), &pivot);
                h.addmul_col(k, j, &q);
                u.addmul_col(k, j, &q);
                if !h.get(r, k).is_zero() {
                    others = true;
                }
            }
            if !others {
                break;
            }
        }
        if h.get(r, j).is_zero() {
            continue;
        }
        if h.get(r, j).is_negative() {
            h.negate_col(j);
            u.negate_col(j);
        }
        let pivot = h.get(r, j).clone();
        for k in 0..j {
            let q = num_integer::Integer::div_floor(h.get(r, k), &pivot);
            h.addmul_col(k, j, &q);
            u.addmul_col(k, j, &q);
        }
        pivot_rows.push(r);
        j += 1;
    }
    if j < cols {
        return Err(Error::RankDeficient);
    }
    Ok(Hnf { h, u, pivot_rows })
}

/// Rounded division: the integer nearest to a/b.
pub(crate) fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = num_integer::Integer::div_rem(a, b);
    if r.magnitude() * 2u32 > *b.magnitude() {
        // round away from the floor side
        if r.is_negative() == b.is_negative() {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}
