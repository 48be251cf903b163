//! Small dense complex matrices.
//!
//! Everything here is sized for desk-scale experiments (dimension in the
//! tens at most): row-major storage, naive products, and full-pivoting
//! elimination for numerical rank and null vectors. Eigenvalues are
//! delegated to nalgebra's complex Schur decomposition.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square complex matrix, row-major.
///
/// Serialized as `{"dim": n, "entries": [[[re, im], ...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct Matrix {
    dim: usize,
    data: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    dim: usize,
    entries: Vec<Vec<Complex64>>,
}

impl TryFrom<RawMatrix> for Matrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        if raw.entries.len() != raw.dim {
            return Err(Error::InvalidArgument(format!(
                "matrix declares dim {} but has {} rows",
                raw.dim,
                raw.entries.len()
            )));
        }
        Matrix::from_rows(raw.entries)
    }
}

impl From<Matrix> for RawMatrix {
    fn from(m: Matrix) -> Self {
        RawMatrix {
            dim: m.dim,
            entries: m.rows(),
        }
    }
}

impl Matrix {
    /// Builds a matrix from row-major data; rejects non-square or non-finite input.
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Matrix { dim, data })
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::InvalidArgument(format!(
                "row of length {} in a {dim}-row matrix",
                bad.len()
            )));
        }
        Matrix::new(dim, rows.into_iter().flatten().collect())
    }

    /// Convenience constructor from real rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn zeros(dim: usize) -> Self {
        Matrix {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let mut m = Matrix::zeros(values.len());
        for (i, &z) in values.iter().enumerate() {
            m.set(i, i, z);
        }
        m
    }

    /// Jordan block of size `p` with eigenvalue `lambda` (ones on the superdiagonal).
    pub fn jordan_block(lambda: Complex64, p: usize) -> Self {
        let mut m = Matrix::zeros(p);
        for i in 0..p {
            m.set(i, i, lambda);
            if i + 1 < p {
                m.set(i, i + 1, Complex64::new(1.0, 0.0));
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, z: Complex64) {
        self.data[i * self.dim + j] = z;
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        self.data
            .chunks(self.dim.max(1))
            .map(|r| r.to_vec())
            .collect()
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                self.data[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn pow(&self, n: usize) -> Matrix {
        (0..n).fold(Matrix::identity(self.dim), |acc, _| acc.matmul(self))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Matrix {
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    /// `self - lambda * I`.
    pub fn shift(&self, lambda: Complex64) -> Matrix {
        let mut out = self.clone();
        for i in 0..self.dim {
            out.data[i * self.dim + i] -= lambda;
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data
            .iter()
            .map(|z| z.norm_sqr())
            .fold(0.0, |acc, x| acc + x)
            .sqrt()
    }

    /// Block-diagonal `self ⊕ other`.
    pub fn direct_sum(&self, other: &Matrix) -> Matrix {
        let n = self.dim + other.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.set(i, j, self.get(i, j));
            }
        }
        for i in 0..other.dim {
            for j in 0..other.dim {
                out.set(self.dim + i, self.dim + j, other.get(i, j));
            }
        }
        out
    }

    /// Eigenvalues via complex Schur form, in the order they appear on the diagonal.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        if self.dim == 0 {
            return Vec::new();
        }
        let m = DMatrix::from_row_slice(self.dim, self.dim, &self.data);
        let schur = m.schur();
        let (_, t) = schur.unpack();
        (0..self.dim).map(|i| t[(i, i)]).collect()
    }
}

/// Numerical rank of the matrix whose columns are `columns` (all of equal length).
///
/// Gaussian elimination with full pivoting; elimination stops once the largest
/// remaining entry falls below `rel_tol` times the largest column norm.
pub fn column_rank(columns: &[Vec<Complex64>], rel_tol: f64) -> usize {
    let scale = columns
        .iter()
        .map(|c| {
            c.iter()
                .map(|z| z.norm_sqr())
                .fold(0.0, |acc, x| acc + x)
                .sqrt()
        })
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let rows = columns.first().map_or(0, Vec::len);
    // work[r][c]
    let mut work: Vec<Vec<Complex64>> = (0..rows)
        .map(|r| columns.iter().map(|col| col[r]).collect())
        .collect();
    eliminate(&mut work, rel_tol * scale).0
}

/// In-place full-pivoting elimination to upper-trapezoidal form.
///
/// Returns the numerical rank and the column permutation (`perm[pos]` is the
/// original index of the column now stored at `pos`).
fn eliminate(work: &mut [Vec<Complex64>], abs_tol: f64) -> (usize, Vec<usize>) {
    let rows = work.len();
    let cols = work.first().map_or(0, Vec::len);
    let mut perm: Vec<usize> = (0..cols).collect();
    let mut rank = 0;
    for step in 0..rows.min(cols) {
        let mut best = (step, step, 0.0);
        for (r, row) in work.iter().enumerate().skip(step) {
            for (c, z) in row.iter().enumerate().skip(step) {
                let a = z.norm();
                if a > best.2 {
                    best = (r, c, a);
                }
            }
        }
        if best.2 <= abs_tol {
            break;
        }
        work.swap(step, best.0);
        for row in work.iter_mut() {
            row.swap(step, best.1);
        }
        perm.swap(step, best.1);
        let (head, tail) = work.split_at_mut(step + 1);
        let prow = &head[step];
        let pivot = prow[step];
        for row in tail.iter_mut() {
            let factor = row[step] / pivot;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in step..cols {
                row[c] -= factor * prow[c];
            }
        }
        rank += 1;
    }
    (rank, perm)
}

/// A unit-norm vector spanning part of the numerical null space of `m`,
/// or `None` when `m` has full numerical rank at tolerance `rel_tol`.
pub fn null_vector(m: &Matrix, rel_tol: f64) -> Option<Vec<Complex64>> {
    let n = m.dim();
    if n == 0 {
        return None;
    }
    let scale = m
        .rows()
        .iter()
        .map(|r| {
            r.iter()
                .map(|z| z.norm_sqr())
                .fold(0.0, |acc, x| acc + x)
                .sqrt()
        })
        .fold(0.0, f64::max);
    if scale == 0.0 {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[0] = Complex64::new(1.0, 0.0);
        return Some(e);
    }
    let mut work = m.rows();
    let (r, perm) = eliminate(&mut work, rel_tol * scale);
    if r == n {
        return None;
    }
    // Set the first free variable to 1, back-substitute the pivot variables
    // through the upper-triangular r x r block.
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    z[r] = Complex64::new(1.0, 0.0);
    for i in (0..r).rev() {
        let mut acc = work[i][r];
        for (j, zj) in z.iter().enumerate().take(r).skip(i + 1) {
            acc += work[i][j] * zj;
        }
        z[i] = -acc / work[i][i];
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (pos, &orig) in perm.iter().enumerate() {
        out[orig] = z[pos];
    }
    let norm = out
        .iter()
        .map(|z| z.norm_sqr())
        .fold(0.0, |acc, x| acc + x)
        .sqrt();
    Some(out.into_iter().map(|z| z / norm).collect())
}
