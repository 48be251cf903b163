//! Seeded random instances: unit-disk matrices, Schur-planted spectra,
//! planted adjoint eigenvectors and Jordan chains.
//!
//! All generators take an explicit RNG so callers control reproducibility.

use num_complex::Complex64;
use rand::Rng;

use crate::linalg::Matrix;

/// Uniform sample from the closed unit disk.
pub fn unit_disk<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let r = rng.gen::<f64>().sqrt();
    let t = rng.gen_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(r, t)
}

/// Uniform modulus in `[lo, hi]`, uniform argument.
pub fn annulus<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> Complex64 {
    let r = rng.gen_range(lo..=hi);
    let t = rng.gen_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(r, t)
}

pub fn unit_disk_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<Complex64> {
    (0..dim).map(|_| unit_disk(rng)).collect()
}

pub fn unit_disk_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Matrix {
    Matrix::new(dim, (0..dim * dim).map(|_| unit_disk(rng)).collect()).expect("finite entries")
}

/// Random unitary matrix: modified Gram–Schmidt on unit-disk columns.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Matrix {
    loop {
        let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
        let mut ok = true;
        for _ in 0..dim {
            let mut v = unit_disk_vector(rng, dim);
            for q in &cols {
                let proj: Complex64 = v.iter().zip(q).map(|(a, b)| a * b.conj()).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
            let n = v
                .iter()
                .map(|z| z.norm_sqr())
                .fold(0.0, |acc, x| acc + x)
                .sqrt();
            if n < 1e-3 {
                ok = false;
                break;
            }
            cols.push(v.into_iter().map(|z| z / n).collect());
        }
        if ok {
            let mut m = Matrix::zeros(dim);
            for (j, col) in cols.iter().enumerate() {
                for (i, &z) in col.iter().enumerate() {
                    m.set(i, j, z);
                }
            }
            return m;
        }
    }
}

/// `Q R Q*` for a random unitary `Q`; returns the product and `Q`.
pub fn unitary_conjugate<R: Rng + ?Sized>(rng: &mut R, r: &Matrix) -> (Matrix, Matrix) {
    let q = unitary(rng, r.dim());
    (q.matmul(r).matmul(&q.adjoint()), q)
}

/// Upper-triangular matrix with the given diagonal and unit-disk entries
/// scaled by `offdiag` above it.
pub fn upper_triangular<R: Rng + ?Sized>(rng: &mut R, diag: &[Complex64], offdiag: f64) -> Matrix {
    let mut m = Matrix::diagonal(diag);
    let n = diag.len();
    for i in 0..n {
        for j in i + 1..n {
            m.set(i, j, unit_disk(rng) * offdiag);
        }
    }
    m
}

/// Non-normal matrix whose eigenvalue moduli all lie in `[lo, hi]`.
pub fn matrix_with_spectrum_in<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    lo: f64,
    hi: f64,
    offdiag: f64,
) -> Matrix {
    let diag: Vec<Complex64> = (0..dim).map(|_| annulus(rng, lo, hi)).collect();
    let r = upper_triangular(rng, &diag, offdiag);
    unitary_conjugate(rng, &r).0
}

/// Column `j` of `m`.
pub fn column(m: &Matrix, j: usize) -> Vec<Complex64> {
    (0..m.dim()).map(|i| m.get(i, j)).collect()
}

/// An operator `T` and a vector `y` with `(T* - lambda)^p y = 0`.
///
/// `T* = Q R Q*` where the leading `p x p` block of the upper-triangular `R`
/// is `lambda` on the diagonal with a nonzero superdiagonal, so `y = Q e_{p-1}`
/// sits in the generalized kernel at order exactly `p`.
pub fn planted_adjoint_chain<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    lambda: Complex64,
    p: usize,
) -> (Matrix, Vec<Complex64>) {
    assert!(p >= 1 && p <= dim, "chain length must lie in 1..=dim");
    let diag: Vec<Complex64> = (0..dim)
        .map(|i| if i < p { lambda } else { unit_disk(rng) })
        .collect();
    let mut r = upper_triangular(rng, &diag, 1.0);
    for i in 0..p.saturating_sub(1) {
        // keep the chain non-degenerate
        r.set(i, i + 1, annulus(rng, 0.5, 1.0));
    }
    let (t_star, q) = unitary_conjugate(rng, &r);
    (t_star.adjoint(), column(&q, p - 1))
}

/// Block upper-triangular `[[A, B], [0, D]]` with unit-disk blocks; the
/// span of the first `split` coordinates is invariant.
pub fn block_upper_triangular<R: Rng + ?Sized>(rng: &mut R, dim: usize, split: usize) -> Matrix {
    let mut m = unit_disk_matrix(rng, dim);
    for i in split..dim {
        for j in 0..split {
            m.set(i, j, Complex64::new(0.0, 0.0));
        }
    }
    m
}
