//! Numerical evidence for the obstructions to subspace-hypercyclicity:
//! the closed form for orbits of generalized eigenvectors, the pairing
//! identities behind `ker(T* - λ)^p ⊆ M^⊥`, norm dichotomy when the spectrum
//! misses the unit circle, compression by an invariant complement, and the
//! finite-dimensional rank/density checks.
//!
//! Convention for the pairing routines: `y` is a (generalized) eigenvector of
//! the adjoint, `(T* - λ)^p y = 0`, and then `⟨T^n x, y⟩ = conj(λ)^n ⟨x, y⟩`
//! for `p = 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{column_rank, Matrix};
use crate::seqspace::{adjoint_apply, apply, inner, powu, OperatorSpec, SeqVec};
use crate::subspace::{membership_defect, project, DenseFamilySpec, ZeroPattern};

/// Tolerance factor for (generalized) kernel membership checks.
pub const KERNEL_TOL: f64 = 1e-10;
/// Relative threshold for numerical rank.
pub const RANK_TOL: f64 = 1e-10;
/// Orbit points farther than this multiple of `‖x‖` are treated as escaped.
pub const ESCAPE_FACTOR: f64 = 1e150;
/// Membership tolerance for orbit points in the density certificate.
pub const DENSITY_MEMBERSHIP_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn require_matrix(op: &OperatorSpec) -> Result<&Matrix> {
    op.as_matrix()
        .ok_or_else(|| Error::UnsupportedOperator("a FiniteMatrix operator is required".into()))
}

fn dense(m: &Matrix, v: &SeqVec) -> Result<Vec<Complex64>> {
    match v.max_index() {
        Some(index) if index >= m.dim() => Err(Error::DimensionMismatch {
            dim: m.dim(),
            index,
        }),
        _ => Ok(v.to_dense(m.dim())),
    }
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter()
        .map(|z| z.norm_sqr())
        .fold(0.0, |acc, x| acc + x)
        .sqrt()
}

/// `‖(A)^p y‖` together with the scale `‖y‖ · max(1, ‖A‖_F)^p` it is judged against.
fn chain_residual(a: &Matrix, y: &[Complex64], p: usize) -> (f64, f64) {
    let mut v = y.to_vec();
    for _ in 0..p {
        v = a.mul_vec(&v);
    }
    let scale = vec_norm(y) * a.frobenius_norm().max(1.0).powi(p as i32);
    (vec_norm(&v), scale.max(1.0))
}

/// `C(n, k)` as a float, exact while it fits in 53 bits.
fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        match acc.checked_mul((n - i) as u128) {
            Some(v) => acc = v / (i as u128 + 1),
            None => {
                return (0..k).fold(1.0, |a, i| a * (n - i) as f64 / (i + 1) as f64);
            }
        }
    }
    acc as f64
}

/// Closed form for `T^n y` when `(T - λ)^p y = 0` and `n >= p`:
///
/// `Σ_{k=1}^p C(p,k) C(n,p) k/(n-p+k) (-1)^(k-1) λ^(n-p+k) T^(p-k) y`.
pub fn jordan_orbit(
    op: &OperatorSpec,
    lambda: Complex64,
    p: usize,
    y: &SeqVec,
    n: usize,
) -> Result<SeqVec> {
    let t = require_matrix(op)?;
    if p == 0 {
        return Err(Error::InvalidArgument("chain order p must be >= 1".into()));
    }
    if n < p {
        return Err(Error::InvalidArgument(format!(
            "closed form needs n >= p (n={n}, p={p})"
        )));
    }
    let yd = dense(t, y)?;
    let (residual, scale) = chain_residual(&t.shift(lambda), &yd, p);
    if residual > KERNEL_TOL * scale {
        return Err(Error::NotInGeneralizedKernel { residual });
    }
    // powers[i] = T^i y for i < p
    let mut powers = vec![yd];
    for i in 1..p {
        let next = t.mul_vec(&powers[i - 1]);
        powers.push(next);
    }
    let mut out = vec![ZERO; t.dim()];
    let cnp = binomial(n, p);
    for k in 1..=p {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let coeff = binomial(p, k) * cnp * k as f64 / (n - p + k) as f64 * sign;
        let factor = powu(lambda, n - p + k) * coeff;
        for (o, z) in out.iter_mut().zip(&powers[p - k]) {
            *o += factor * z;
        }
    }
    Ok(SeqVec::from_dense(&out))
}

/// Orbit `x, Tx, ..., T^N x` as dense vectors (finite matrices) or sparse ones.
fn orbit(op: &OperatorSpec, x: &SeqVec, steps: usize) -> Result<Vec<SeqVec>> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(x.clone());
    for n in 0..steps {
        let next = apply(op, &out[n])?;
        out.push(next);
    }
    Ok(out)
}

/// `max_{0<=n<=N} |⟨T^n x, y⟩ - conj(λ)^n ⟨x, y⟩|` for `T* y = λ y`.
pub fn eigen_orbit_pairing(
    op: &OperatorSpec,
    x: &SeqVec,
    y: &SeqVec,
    lambda: Complex64,
    steps: usize,
) -> Result<f64> {
    let residual = adjoint_apply(op, y)?.distance(&y.scale(lambda));
    if residual > KERNEL_TOL * y.norm().max(1.0) {
        return Err(Error::NotEigenvector { residual });
    }
    Ok(pairing_trace(op, x, y, lambda, steps)?
        .into_iter()
        .map(|row| row.deviation)
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PairingRow {
    pub n: usize,
    pub observed: Complex64,
    pub predicted: Complex64,
    pub deviation: f64,
}

/// Per-step data behind [`eigen_orbit_pairing`] (no precondition check).
pub fn pairing_trace(
    op: &OperatorSpec,
    x: &SeqVec,
    y: &SeqVec,
    lambda: Complex64,
    steps: usize,
) -> Result<Vec<PairingRow>> {
    let base = inner(x, y);
    let lbar = lambda.conj();
    Ok(orbit(op, x, steps)?
        .iter()
        .enumerate()
        .map(|(n, tx)| {
            let observed = inner(tx, y);
            let predicted = powu(lbar, n) * base;
            PairingRow {
                n,
                observed,
                predicted,
                deviation: (observed - predicted).norm(),
            }
        })
        .collect())
}

/// Fits `⟨T^n x, y⟩ = conj(λ)^(n-p) Q(n)` with `deg Q <= p-1` from
/// `n = p..2p-1` and returns the worst residual over `2p <= n <= N`.
pub fn generalized_pairing_polynomial(
    op: &OperatorSpec,
    x: &SeqVec,
    y: &SeqVec,
    lambda: Complex64,
    p: usize,
    steps: usize,
) -> Result<f64> {
    Ok(generalized_pairing_trace(op, x, y, lambda, p, steps)?
        .into_iter()
        .filter(|row| row.n >= 2 * p)
        .map(|row| row.deviation)
        .fold(0.0, f64::max))
}

/// Per-step data behind [`generalized_pairing_polynomial`], rows for `n >= p`.
pub fn generalized_pairing_trace(
    op: &OperatorSpec,
    x: &SeqVec,
    y: &SeqVec,
    lambda: Complex64,
    p: usize,
    steps: usize,
) -> Result<Vec<PairingRow>> {
    if p == 0 {
        return Err(Error::InvalidArgument("chain order p must be >= 1".into()));
    }
    let adj = op.adjoint();
    let mut v = y.clone();
    for _ in 0..p {
        v = apply(&adj, &v)?.sub(&v.scale(lambda));
    }
    let scale = match op.as_matrix() {
        Some(m) => y.norm() * m.shift(lambda).frobenius_norm().max(1.0).powi(p as i32),
        None => y.norm() * (1.0 + lambda.norm()).powi(p as i32),
    };
    let residual = v.norm();
    if residual > KERNEL_TOL * scale.max(1.0) {
        return Err(Error::NotInGeneralizedKernel { residual });
    }

    let values: Vec<Complex64> = orbit(op, x, steps.max(2 * p - 1))?
        .iter()
        .map(|tx| inner(tx, y))
        .collect();
    let lbar = lambda.conj();
    let nodes: Vec<f64> = (p..2 * p).map(|n| n as f64).collect();
    let q_at_nodes: Vec<Complex64> = if lbar == ZERO {
        vec![ZERO; p]
    } else {
        (p..2 * p).map(|n| values[n] / powu(lbar, n - p)).collect()
    };
    Ok((p..=steps)
        .map(|n| {
            let observed = values[n];
            let predicted = if lbar == ZERO {
                // conj(λ)^(n-p) vanishes for n > p
                if n == p {
                    values[p]
                } else {
                    ZERO
                }
            } else {
                powu(lbar, n - p) * lagrange(&nodes, &q_at_nodes, n as f64)
            };
            PairingRow {
                n,
                observed,
                predicted,
                deviation: (observed - predicted).norm(),
            }
        })
        .collect())
}

fn lagrange(nodes: &[f64], values: &[Complex64], t: f64) -> Complex64 {
    nodes
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            let w: f64 = nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &xj)| (t - xj) / (xi - xj))
                .product();
            values[i] * w
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Classification {
    ToZero,
    ToInfinity,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DichotomyVerdict {
    pub classification: Classification,
    pub first_norm: f64,
    pub last_norm: f64,
    /// Geometric-mean step ratio `(last/first)^(1/steps)`.
    pub ratio_trend: f64,
    /// Number of steps actually taken (the orbit stops early at 0 or on escape).
    pub steps: usize,
    pub exit_threshold_low: f64,
    pub exit_threshold_high: f64,
}

pub const DICHOTOMY_LOW: f64 = 1e-6;
pub const DICHOTOMY_HIGH: f64 = 1e6;
pub const DICHOTOMY_HORIZON: usize = 400;

/// Classifies `‖T^n x‖` over `n <= N` as tending to zero, to infinity, or neither.
pub fn spectral_dichotomy(op: &OperatorSpec, x: &SeqVec, steps: usize) -> Result<DichotomyVerdict> {
    Ok(dichotomy_with_norms(op, x, steps)?.0)
}

/// As [`spectral_dichotomy`], also returning the norm sequence.
pub fn dichotomy_with_norms(
    op: &OperatorSpec,
    x: &SeqVec,
    steps: usize,
) -> Result<(DichotomyVerdict, Vec<f64>)> {
    let t = require_matrix(op)?;
    if x.is_zero() {
        return Err(Error::InvalidArgument("dichotomy needs x != 0".into()));
    }
    let mut v = dense(t, x)?;
    let first = vec_norm(&v);
    let mut norms = vec![first];
    for _ in 0..steps {
        v = t.mul_vec(&v);
        let nv = vec_norm(&v);
        norms.push(nv);
        if nv == 0.0 || !nv.is_finite() || nv > ESCAPE_FACTOR * first {
            break;
        }
    }
    let last = *norms.last().unwrap();
    let taken = norms.len() - 1;
    let low = DICHOTOMY_LOW * first;
    let high = DICHOTOMY_HIGH * first;
    let classification = if last < low {
        Classification::ToZero
    } else if last > high {
        Classification::ToInfinity
    } else {
        Classification::Neither
    };
    let ratio_trend = if taken == 0 {
        1.0
    } else {
        (last / first).powf(1.0 / taken as f64)
    };
    Ok((
        DichotomyVerdict {
            classification,
            first_norm: first,
            last_norm: last,
            ratio_trend,
            steps: taken,
            exit_threshold_low: low,
            exit_threshold_high: high,
        },
        norms,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpectrumSummary {
    pub eigenvalues: Vec<Complex64>,
    pub min_modulus: f64,
    pub max_modulus: f64,
    /// True when every eigenvalue modulus lies outside `[1 - width, 1 + width]`.
    pub avoids_annulus: bool,
    pub annulus_width: f64,
}

/// Eigenvalues of a finite matrix and whether they avoid an annulus around the unit circle.
pub fn spectrum(op: &OperatorSpec, annulus_width: f64) -> Result<SpectrumSummary> {
    let t = require_matrix(op)?;
    let eigenvalues = t.eigenvalues();
    let mods: Vec<f64> = eigenvalues.iter().map(|z| z.norm()).collect();
    Ok(SpectrumSummary {
        min_modulus: mods.iter().copied().fold(f64::INFINITY, f64::min),
        max_modulus: mods.iter().copied().fold(0.0, f64::max),
        avoids_annulus: mods.iter().all(|&m| (m - 1.0).abs() > annulus_width),
        annulus_width,
        eigenvalues,
    })
}

/// Numerical rank of `[x, Tx, ..., T^N x]`.
pub fn orbit_span_rank(op: &OperatorSpec, x: &SeqVec, steps: usize) -> Result<usize> {
    let t = require_matrix(op)?;
    let mut v = dense(t, x)?;
    let mut cols = vec![v.clone()];
    for _ in 0..steps {
        v = t.mul_vec(&v);
        cols.push(v.clone());
    }
    Ok(column_rank(&cols, RANK_TOL))
}

/// Orbit points `x, ..., T^N x`, stopping early once the orbit escapes past
/// `ESCAPE_FACTOR · max(1, ‖x‖)` or becomes exactly zero.
pub fn orbit_points(op: &OperatorSpec, x: &SeqVec, steps: usize) -> Result<Vec<SeqVec>> {
    let cap = ESCAPE_FACTOR * x.norm().max(1.0);
    let mut out = vec![x.clone()];
    if let Some(t) = op.as_matrix() {
        let mut v = dense(t, x)?;
        for _ in 0..steps {
            v = t.mul_vec(&v);
            let nv = vec_norm(&v);
            if !nv.is_finite() || nv > cap {
                break;
            }
            out.push(SeqVec::from_dense(&v));
            if nv == 0.0 {
                break;
            }
        }
        return Ok(out);
    }
    for _ in 0..steps {
        let next = apply(op, out.last().unwrap())?;
        let nv = next.norm();
        if !nv.is_finite() || nv > cap {
            break;
        }
        let zero = next.is_zero();
        out.push(next);
        if zero {
            break;
        }
    }
    Ok(out)
}

/// Fraction of the dyadic unit-ball net of the subspace (at `net_level`, support
/// below `support_bound`) with no point of `points ∩ M` within `eps`.
pub fn density_defect(
    points: &[SeqVec],
    p: &ZeroPattern,
    net_level: u32,
    support_bound: usize,
    eps: f64,
) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let net = DenseFamilySpec::new(*p, support_bound, net_level)?.unit_ball_net(net_level);
    let inside: Vec<&SeqVec> = points
        .iter()
        .filter(|v| membership_defect(v, p) <= DENSITY_MEMBERSHIP_TOL)
        .collect();
    let missed = net
        .iter()
        .filter(|target| !inside.iter().any(|v| v.distance(target) <= eps))
        .count();
    Ok(missed as f64 / net.len() as f64)
}

/// `max_{n<=horizon} ‖P T^n x - (P T)^n x‖` where `P` projects onto the pattern's
/// subspace and its coordinate complement must be `T`-invariant.
pub fn compression_orbit_check(
    op: &OperatorSpec,
    pattern: &ZeroPattern,
    x: &SeqVec,
    horizon: usize,
) -> Result<f64> {
    let t = require_matrix(op)?;
    pattern.validate()?;
    for i in (0..t.dim()).filter(|&i| pattern.is_forbidden(i)) {
        let col = apply(op, &SeqVec::basis(i))?;
        let leak = project(&col, pattern).norm();
        if leak > KERNEL_TOL * col.norm().max(1.0) {
            return Err(Error::ComplementNotInvariant { index: i, leak });
        }
    }
    if membership_defect(x, pattern) > 0.0 {
        return Err(Error::InvalidArgument("x must lie in the subspace".into()));
    }
    let mut full = x.clone();
    let mut compressed = x.clone();
    let mut worst: f64 = 0.0;
    for _ in 0..horizon {
        full = apply(op, &full)?;
        compressed = project(&apply(op, &compressed)?, pattern);
        worst = worst.max(project(&full, pattern).distance(&compressed));
    }
    Ok(worst)
}
