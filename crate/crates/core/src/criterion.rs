//! Truncation-scale checks of the subspace-hypercyclicity criterion and a
//! transitivity probe.
//!
//! The criterion asks for dense sets `X, Y` in the subspace and times `n_k` with
//! (i) `T^(n_k) x -> 0` on `X`, (ii) vectors `x_k -> 0` with `T^(n_k) x_k -> y`
//! for each `y` in `Y`, and (iii) the subspace invariant under every `T^(n_k)`.
//! Here each condition is evaluated on finite samples; the right inverse for
//! (ii) is the explicit `λ^-n S^(bn)` available for `λB^b`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seqspace::{apply_power, powu, OperatorSpec, SeqVec};
use crate::subspace::{invariance_check, membership_defect, ZeroPattern};

/// `(λ, b)` when `op` is exactly `Scalar(λ, BackwardShift(b))`.
fn scaled_shift_parts(op: &OperatorSpec) -> Option<(Complex64, usize)> {
    match op {
        OperatorSpec::Scalar { lambda, inner } => match **inner {
            OperatorSpec::BackwardShift { power } => Some((*lambda, power)),
            _ => None,
        },
        _ => None,
    }
}

/// `λ^-n S^(bn) y`, the right inverse of `(λB^b)^n` applied to `y`.
pub fn backsolve(op: &OperatorSpec, n: usize, y: &SeqVec) -> Result<SeqVec> {
    let (lambda, b) = scaled_shift_parts(op).ok_or_else(|| {
        Error::UnsupportedOperator("backsolve needs Scalar(lambda, BackwardShift(b))".into())
    })?;
    let m = lambda.norm();
    if !(m > 1.0) {
        return Err(Error::InvalidModulus(m));
    }
    Ok(backsolve_unchecked(lambda, b, n, y))
}

fn backsolve_unchecked(lambda: Complex64, b: usize, n: usize, y: &SeqVec) -> SeqVec {
    y.shifted((b * n) as isize).scale(powu(lambda.inv(), n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DecayRow {
    pub sample_index: usize,
    /// `‖T^(n_K) x‖` at the last checked time.
    pub max_tail_norm: f64,
    /// First `k` (1-based position in the time list) from which the tail is exactly zero.
    pub zero_from: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RecoveryRow {
    pub sample_index: usize,
    pub k: usize,
    pub n_k: usize,
    pub xk_norm: f64,
    pub recovery_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InvarianceRow {
    pub k: usize,
    pub n_k: usize,
    pub invariant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Verdict {
    pub cond_i: bool,
    #[serde(rename = "condII")]
    pub cond_ii: bool,
    #[serde(rename = "condIII")]
    pub cond_iii: bool,
    pub tol: f64,
}

impl Verdict {
    pub fn pass(&self) -> bool {
        self.cond_i && self.cond_ii && self.cond_iii
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CriterionReport {
    pub cond_i: Vec<DecayRow>,
    #[serde(rename = "condII")]
    pub cond_ii: Vec<RecoveryRow>,
    #[serde(rename = "condIII")]
    pub cond_iii: Vec<InvarianceRow>,
    pub verdict: Verdict,
}

/// Evaluates the three criterion conditions for `op` on the samples.
///
/// Condition (ii) passes when every recovery error is within `tol` and, for
/// each nonzero `y`, `‖x_k‖` is strictly decreasing along the checked times.
pub fn check_criterion(
    op: &OperatorSpec,
    p: &ZeroPattern,
    xs: &[SeqVec],
    ys: &[SeqVec],
    nks: &[usize],
    dim: usize,
    tol: f64,
) -> Result<CriterionReport> {
    if nks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "times n_k must be strictly increasing".into(),
        ));
    }
    if let Some(bad) = xs
        .iter()
        .chain(ys)
        .position(|v| membership_defect(v, p) != 0.0)
    {
        return Err(Error::InvalidArgument(format!(
            "sample {bad} is not in the subspace"
        )));
    }
    let (lambda, b) = scaled_shift_parts(op).ok_or_else(|| {
        Error::UnsupportedOperator("criterion needs Scalar(lambda, BackwardShift(b))".into())
    })?;

    let mut cond_i = Vec::with_capacity(xs.len());
    for (s, x) in xs.iter().enumerate() {
        let tails: Vec<f64> = nks
            .iter()
            .map(|&n| apply_power(op, n, x).map(|v| v.norm()))
            .collect::<Result<_>>()?;
        let zero_from = tails
            .iter()
            .rposition(|&t| t != 0.0)
            .map_or(Some(1), |last| (last + 1 < tails.len()).then_some(last + 2));
        cond_i.push(DecayRow {
            sample_index: s,
            max_tail_norm: tails.last().copied().unwrap_or(x.norm()),
            zero_from,
        });
    }

    let mut cond_ii = Vec::with_capacity(ys.len() * nks.len());
    let mut decreasing = true;
    for (s, y) in ys.iter().enumerate() {
        let mut prev = f64::INFINITY;
        for (idx, &n) in nks.iter().enumerate() {
            let xk = backsolve_unchecked(lambda, b, n, y);
            let back = apply_power(op, n, &xk)?;
            let xk_norm = xk.norm();
            if !y.is_zero() && xk_norm >= prev {
                decreasing = false;
            }
            prev = xk_norm;
            cond_ii.push(RecoveryRow {
                sample_index: s,
                k: idx + 1,
                n_k: n,
                xk_norm,
                recovery_error: back.distance(y),
            });
        }
    }

    let cond_iii: Vec<InvarianceRow> = nks
        .iter()
        .enumerate()
        .map(|(idx, &n)| InvarianceRow {
            k: idx + 1,
            n_k: n,
            invariant: invariance_check(op, p, n, dim),
        })
        .collect();

    let verdict = Verdict {
        cond_i: cond_i.iter().all(|r| r.max_tail_norm <= tol),
        cond_ii: decreasing && cond_ii.iter().all(|r| r.recovery_error <= tol),
        cond_iii: cond_iii.iter().all(|r| r.invariant),
        tol,
    };
    Ok(CriterionReport {
        cond_i,
        cond_ii,
        cond_iii,
        verdict,
    })
}

/// Searches `n <= horizon` for which the subspace is invariant under `op^n` and
/// some probe point `w` of the `V`-ball has `op^n w` in the subspace and inside
/// the `U`-ball. Returns the smallest such `n`.
///
/// Probe points are `vCenter`, `vCenter ± (r/2) e_i`, `vCenter ± i (r/2) e_i`
/// for allowed `i < dim`, and, for `λB^b`, the exact preimage
/// `vCenter + λ^-n S^(bn)(uCenter - op^n vCenter)` when it falls inside the ball.
/// Invariance at step `n` is checked on the basis vectors below `dim + n`, so
/// that shifts by `n` cannot annihilate the whole truncation window.
/// A hit is a witness; `None` is only evidence.
#[allow(clippy::too_many_arguments)]
pub fn transitivity_probe(
    op: &OperatorSpec,
    p: &ZeroPattern,
    u_center: &SeqVec,
    u_radius: f64,
    v_center: &SeqVec,
    v_radius: f64,
    horizon: usize,
    dim: usize,
) -> Option<usize> {
    let grid = probe_grid(p, v_center, v_radius, dim);
    let right_inverse = scaled_shift_parts(op).filter(|(l, _)| l.norm() > 1.0);
    (0..=horizon).find(|&n| {
        // The window [n, n + dim) is what op^n maps onto the first dim coordinates.
        if n > 0 && !invariance_check(op, p, n, dim + n) {
            return false;
        }
        let hits = |w: &SeqVec| -> bool {
            if w.distance(v_center) >= v_radius || membership_defect(w, p) != 0.0 {
                return false;
            }
            match apply_power(op, n, w) {
                Ok(tw) => membership_defect(&tw, p) == 0.0 && tw.distance(u_center) < u_radius,
                Err(_) => false,
            }
        };
        if grid.iter().any(hits) {
            return true;
        }
        if let (Some((lambda, b)), Ok(tv)) = (right_inverse, apply_power(op, n, v_center)) {
            let w = v_center.add(&backsolve_unchecked(lambda, b, n, &u_center.sub(&tv)));
            return hits(&w);
        }
        false
    })
}

fn probe_grid(p: &ZeroPattern, center: &SeqVec, radius: f64, dim: usize) -> Vec<SeqVec> {
    let step = radius / 2.0;
    let dirs = [
        Complex64::new(step, 0.0),
        Complex64::new(-step, 0.0),
        Complex64::new(0.0, step),
        Complex64::new(0.0, -step),
    ];
    let mut out = vec![center.clone()];
    for i in p.allowed_below(dim) {
        for d in dirs {
            out.push(center.add_scaled(d, &SeqVec::basis(i)));
        }
    }
    out
}
