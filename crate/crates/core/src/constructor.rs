//! Explicit subspace-hypercyclic vectors for `λB` on ℓ².
//!
//! Given targets `f_0, f_1, ...` inside the subspace, the hitting times
//! `k_0 = 0 < k_1 < ...` are chosen so that
//!
//! * `k_j > k_{j-1} + length(f_{j-1})` (the shifted copies never overlap), and
//! * `‖f_j‖ / |λ|^(k_j - k_{j-1}) <= |λ|^-j` (the tail stays summable),
//!
//! and the vector is `f = Σ_j λ^(-k_j) S^(k_j) f_j`. Then `(λB)^(k_n) f` starts
//! with `f_n` exactly and differs from it by at most
//! `sqrt(Σ_{j>n} |λ|^(-2j))`.
//!
//! [`certify`] recomputes every orbit point from scratch and checks both the
//! membership and the distance bound, independently of how `f` was built.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seqspace::{apply_power, powu, OperatorSpec, SeqVec};
use crate::subspace::{membership_defect_all, ZeroPattern};

/// Default tolerance for floating-point slack in certificates.
pub const DEFAULT_FLOAT_TOL: f64 = 1e-9;

/// `min { s : h_k = 0 for all k >= s }`.
pub fn length(v: &SeqVec) -> usize {
    v.max_index().map_or(0, |i| i + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScheduleEntry {
    pub k: u64,
    pub target: SeqVec,
    /// Certified bound on `‖(λB)^k f - target‖`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HittingSchedule {
    pub lambda_abs: f64,
    pub lambda_arg: f64,
    pub entries: Vec<ScheduleEntry>,
}

impl HittingSchedule {
    pub fn lambda(&self) -> Complex64 {
        Complex64::from_polar(self.lambda_abs, self.lambda_arg)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Support windows `[k_j, k_j + length(f_j))` of the assembled terms.
    pub fn windows(&self) -> Vec<(u64, u64)> {
        self.entries
            .iter()
            .map(|e| (e.k, e.k + length(&e.target) as u64))
            .collect()
    }

    /// Checks both defining inequalities for every entry.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let Some(first) = self.entries.first() else {
            return Ok(());
        };
        if first.k != 0 {
            return Err(format!("k_0 = {} (must be 0)", first.k));
        }
        for (j, pair) in self.entries.windows(2).enumerate() {
            let j = j + 1;
            let (prev, cur) = (&pair[0], &pair[1]);
            if cur.k <= prev.k + length(&prev.target) as u64 {
                return Err(format!("k_{j} = {} overlaps the previous window", cur.k));
            }
            if !norm_condition(cur.target.norm(), self.lambda_abs, j, cur.k - prev.k) {
                return Err(format!("k_{j} = {} violates the norm condition", cur.k));
            }
        }
        Ok(())
    }
}

/// `‖f_j‖ / |λ|^gap <= |λ|^-j`, evaluated as `‖f_j‖ <= |λ|^(gap - j)`.
pub fn norm_condition(target_norm: f64, lambda_abs: f64, j: usize, gap: u64) -> bool {
    if target_norm == 0.0 {
        return true;
    }
    let exponent = gap as i64 - j as i64;
    let rhs = lambda_abs.powi(exponent.clamp(i32::MIN as i64, i32::MAX as i64) as i32);
    target_norm <= rhs
}

/// Chooses `k_j` given the smallest admissible value.
///
/// Alternative selectors can delay hits (e.g. to shape how long the orbit stays
/// inside the subspace); any value they return must be admissible.
pub trait StepSelector {
    fn select(&self, j: usize, smallest_admissible: u64) -> u64;
}

/// Always takes the smallest admissible time.
#[derive(Debug, Clone, Copy, Default)]
pub struct SmallestStep;

impl StepSelector for SmallestStep {
    fn select(&self, _j: usize, smallest_admissible: u64) -> u64 {
        smallest_admissible
    }
}

/// Smallest gap `d >= min_gap` with `‖f_j‖ <= |λ|^(d - j)`.
fn smallest_gap(target_norm: f64, lambda_abs: f64, j: usize, min_gap: u64) -> u64 {
    if norm_condition(target_norm, lambda_abs, j, min_gap) {
        return min_gap;
    }
    let guess = (j as f64 + target_norm.ln() / lambda_abs.ln())
        .floor()
        .max(0.0) as u64;
    let mut d = guess.saturating_sub(1).max(min_gap);
    while !norm_condition(target_norm, lambda_abs, j, d) {
        d += 1;
    }
    while d > min_gap && norm_condition(target_norm, lambda_abs, j, d - 1) {
        d -= 1;
    }
    d
}

/// `sqrt(Σ_{i=j+1}^{last} |λ|^(-2i))`.
pub fn truncated_tail_bound(lambda_abs: f64, j: usize, last: usize) -> f64 {
    ((j + 1)..=last)
        .map(|i| lambda_abs.powi(-2 * i as i32))
        .fold(0.0, |acc, x| acc + x)
        .sqrt()
}

/// `sqrt(|λ|^(-2(j+1)) / (1 - |λ|^-2))`, the bound for an infinite schedule.
pub fn infinite_tail_bound(lambda_abs: f64, j: usize) -> f64 {
    (lambda_abs.powi(-2 * (j as i32 + 1)) / (1.0 - lambda_abs.powi(-2))).sqrt()
}

/// Builds the hitting schedule with the smallest admissible times.
pub fn build_schedule(lambda: Complex64, targets: &[SeqVec]) -> Result<HittingSchedule> {
    build_schedule_with(lambda, targets, &SmallestStep)
}

pub fn build_schedule_with<S: StepSelector + ?Sized>(
    lambda: Complex64,
    targets: &[SeqVec],
    selector: &S,
) -> Result<HittingSchedule> {
    let lambda_abs = lambda.norm();
    if !(lambda_abs > 1.0) || !lambda_abs.is_finite() {
        return Err(Error::InvalidModulus(lambda_abs));
    }
    let last = targets.len().saturating_sub(1);
    let mut entries: Vec<ScheduleEntry> = Vec::with_capacity(targets.len());
    for (j, target) in targets.iter().enumerate() {
        let k = match entries.last() {
            None => 0,
            Some(prev) => {
                let min_gap = length(&prev.target) as u64 + 1;
                let gap = smallest_gap(target.norm(), lambda_abs, j, min_gap);
                let smallest = prev.k + gap;
                let chosen = selector.select(j, smallest);
                if chosen < smallest {
                    return Err(Error::InvalidArgument(format!(
                        "selector returned k_{j} = {chosen} below the smallest admissible {smallest}"
                    )));
                }
                chosen
            }
        };
        entries.push(ScheduleEntry {
            k,
            target: target.clone(),
            bound: truncated_tail_bound(lambda_abs, j, last),
        });
    }
    Ok(HittingSchedule {
        lambda_abs,
        lambda_arg: lambda.arg(),
        entries,
    })
}

/// `f = Σ_j λ^(-k_j) S^(k_j) f_j`.
///
/// The windows are disjoint, so each term's entries are written directly
/// without summation.
pub fn assemble(lambda: Complex64, sched: &HittingSchedule) -> SeqVec {
    let mut pairs = Vec::new();
    for e in &sched.entries {
        let factor = powu(lambda.inv(), e.k as usize);
        pairs.extend(e.target.iter().map(|(i, z)| (i + e.k as usize, z * factor)));
    }
    SeqVec::from_entries(pairs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CertEntry {
    pub n: usize,
    pub k_n: u64,
    pub membership_defect: f64,
    pub distance: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CertReport {
    pub float_tol: f64,
    pub entries: Vec<CertEntry>,
    pub pass: bool,
}

impl CertReport {
    pub fn failing(&self) -> Vec<usize> {
        self.entries
            .iter()
            .filter(|e| !e.pass)
            .map(|e| e.n)
            .collect()
    }

    /// Rows `n,k_n,defect,distance,bound,pass`.
    pub fn csv_rows(&self) -> Vec<[String; 6]> {
        self.entries
            .iter()
            .map(|e| {
                [
                    e.n.to_string(),
                    e.k_n.to_string(),
                    format!("{:?}", e.membership_defect),
                    format!("{:?}", e.distance),
                    format!("{:?}", e.bound),
                    e.pass.to_string(),
                ]
            })
            .collect()
    }
}

pub const CERT_CSV_HEADER: [&str; 6] = ["n", "k_n", "defect", "distance", "bound", "pass"];

/// Certifies `f` against the schedule under `λB` and the pattern.
pub fn certify(
    lambda: Complex64,
    f: &SeqVec,
    sched: &HittingSchedule,
    p: &ZeroPattern,
    float_tol: f64,
) -> CertReport {
    let op = OperatorSpec::scaled_backward_shift(lambda, 1);
    certify_orbit(&op, f, sched, std::slice::from_ref(p), float_tol)
        .expect("shift operators accept every vector")
}

/// Certification under an arbitrary operator against the intersection of
/// several patterns (used for direct-sum variants).
pub fn certify_orbit(
    op: &OperatorSpec,
    f: &SeqVec,
    sched: &HittingSchedule,
    patterns: &[ZeroPattern],
    float_tol: f64,
) -> Result<CertReport> {
    let entries = sched
        .entries
        .iter()
        .enumerate()
        .map(|(n, e)| {
            let g = apply_power(op, e.k as usize, f)?;
            let defect = membership_defect_all(&g, patterns);
            let distance = g.distance(&e.target);
            let pass = defect <= float_tol && distance <= e.bound + float_tol;
            Ok(CertEntry {
                n,
                k_n: e.k,
                membership_defect: defect,
                distance,
                bound: e.bound,
                pass,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = entries.iter().all(|e| e.pass);
    Ok(CertReport {
        float_tol,
        entries,
        pass,
    })
}
