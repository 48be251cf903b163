use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use orbitlab_core::constructor::{assemble, build_schedule, certify, CertReport, HittingSchedule};
use orbitlab_core::criterion::{check_criterion, transitivity_probe, CriterionReport};
use orbitlab_core::linalg::{null_vector, Matrix};
use orbitlab_core::obstructions::{
    density_defect, dichotomy_with_norms, eigen_orbit_pairing, generalized_pairing_polynomial,
    generalized_pairing_trace, jordan_orbit, orbit_points, orbit_span_rank, pairing_trace,
    spectrum, Classification, PairingRow, RANK_TOL,
};
use orbitlab_core::sampling;
use orbitlab_core::seqspace::apply_power;
use orbitlab_core::subspace::{dense_family, invariance_check, DenseFamilySpec};
use orbitlab_core::{OperatorSpec, SeqVec, ZeroPattern, CERT_CSV_HEADER};

use crate::{num, opt, ExperimentConfig, Findings, RunError, Table};

pub(crate) fn rng(cfg: &ExperimentConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

pub(crate) fn family(
    cfg: &ExperimentConfig,
    pattern: ZeroPattern,
) -> Result<DenseFamilySpec, RunError> {
    Ok(DenseFamilySpec::new(
        pattern,
        cfg.support_bound,
        cfg.resolution_level,
    )?)
}

/// The first `count` members of the dense family, starting at `first`.
pub(crate) fn family_members(spec: &DenseFamilySpec, first: u64, count: usize) -> Vec<SeqVec> {
    (first..first + count as u64)
        .map(|j| dense_family(spec, j))
        .collect()
}

pub(crate) fn shift_operator(cfg: &ExperimentConfig) -> OperatorSpec {
    cfg.operator
        .clone()
        .unwrap_or_else(|| OperatorSpec::scaled_backward_shift(cfg.lambda, 1))
}

/// `|λ|` when `op` is `λ` times a backward shift power.
fn shift_modulus(op: &OperatorSpec) -> Option<f64> {
    match op {
        OperatorSpec::Scalar { lambda, inner } => {
            matches!(**inner, OperatorSpec::BackwardShift { .. }).then(|| lambda.norm())
        }
        OperatorSpec::BackwardShift { .. } => Some(1.0),
        _ => None,
    }
}

fn finite_matrix(cfg: &ExperimentConfig, what: &str) -> Result<Option<Matrix>, RunError> {
    match &cfg.operator {
        None => Ok(None),
        Some(op) => op
            .as_matrix()
            .cloned()
            .map(Some)
            .ok_or_else(|| RunError::Config(format!("{what} needs a finiteMatrix operator"))),
    }
}

fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> SeqVec {
    SeqVec::from_dense(&sampling::unit_disk_vector(rng, dim))
}

pub(crate) fn cert_table(cert: &CertReport) -> Table {
    let mut t = Table::new(&CERT_CSV_HEADER);
    for row in cert.csv_rows() {
        t.push(row);
    }
    t
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub(crate) struct ConstructResult<'a> {
    pub lambda: Complex64,
    pub pattern: ZeroPattern,
    pub length: usize,
    pub support: usize,
    pub schedule_invariants: Option<String>,
    pub schedule: &'a HittingSchedule,
    pub vector: &'a SeqVec,
    pub certificate: &'a CertReport,
}

pub(crate) fn construct(cfg: &ExperimentConfig, certify_given: bool) -> Result<Findings, RunError> {
    let pattern = cfg.pattern.unwrap_or(ZeroPattern::Prefix { m: 0 });
    let spec = family(cfg, pattern)?;
    let targets = family_members(&spec, 0, cfg.targets);
    let sched = build_schedule(cfg.lambda, &targets)?;
    let f = match (&cfg.vector, certify_given) {
        (Some(v), true) => v.clone(),
        _ => assemble(cfg.lambda, &sched),
    };
    let cert = certify(cfg.lambda, &f, &sched, &pattern, cfg.tol_or(1e-9));
    let invariants = sched.check_invariants().err();
    let result = ConstructResult {
        lambda: cfg.lambda,
        pattern,
        length: orbitlab_core::length(&f),
        support: f.nnz(),
        schedule_invariants: invariants.clone(),
        schedule: &sched,
        vector: &f,
        certificate: &cert,
    };
    Ok(Findings {
        pass: cert.pass && invariants.is_none(),
        result: serde_json::to_value(&result)?,
        table: cert_table(&cert),
    })
}

pub(crate) fn criterion_table(report: &CriterionReport) -> Table {
    let mut t = Table::new(&["condition", "sample", "k", "n_k", "value", "pass"]);
    let tol = report.verdict.tol;
    for r in &report.cond_i {
        t.push([
            "i".into(),
            r.sample_index.to_string(),
            opt(r.zero_from),
            String::new(),
            num(r.max_tail_norm),
            r.zero_from.is_some().to_string(),
        ]);
    }
    for r in &report.cond_ii {
        t.push([
            "ii".into(),
            r.sample_index.to_string(),
            r.k.to_string(),
            r.n_k.to_string(),
            num(r.recovery_error),
            (r.recovery_error <= tol).to_string(),
        ]);
    }
    for r in &report.cond_iii {
        t.push([
            "iii".into(),
            String::new(),
            r.k.to_string(),
            r.n_k.to_string(),
            String::new(),
            r.invariant.to_string(),
        ]);
    }
    t
}

pub(crate) fn run_criterion(
    cfg: &ExperimentConfig,
    op: &OperatorSpec,
    pattern: ZeroPattern,
) -> Result<CriterionReport, RunError> {
    if let Some(m) = shift_modulus(op) {
        if m <= 1.0 {
            return Err(RunError::Config(format!(
                "criterion needs |lambda| > 1, got {m}"
            )));
        }
    }
    let spec = family(cfg, pattern)?;
    let samples = family_members(&spec, 1, cfg.targets);
    let nks: Vec<usize> = (1..=cfg.horizon_or(30))
        .map(|k| cfg.time_step * k)
        .collect();
    Ok(check_criterion(
        op,
        &pattern,
        &samples,
        &samples,
        &nks,
        cfg.truncation_dim,
        cfg.tol_or(1e-12),
    )?)
}

pub(crate) fn criterion(cfg: &ExperimentConfig) -> Result<Findings, RunError> {
    let op = shift_operator(cfg);
    let pattern = cfg.pattern.unwrap_or(ZeroPattern::Residue { a: 0, b: 2 });
    let report = run_criterion(cfg, &op, pattern)?;
    Ok(Findings {
        pass: report.verdict.pass(),
        result: json!({ "operator": op, "pattern": pattern, "report": report }),
        table: criterion_table(&report),
    })
}

pub(crate) fn probe(cfg: &ExperimentConfig) -> Result<Findings, RunError> {
    let op = shift_operator(cfg);
    let pattern = cfg.pattern.unwrap_or(ZeroPattern::Residue { a: 0, b: 2 });
    let spec = family(cfg, pattern)?;
    let u = cfg.u.clone().unwrap_or_else(|| dense_family(&spec, 5));
    let v = cfg.v.clone().unwrap_or_else(|| dense_family(&spec, 90));
    let horizon = cfg.horizon_or(200);
    let dim = cfg.truncation_dim;
    let hit = transitivity_probe(
        &op,
        &pattern,
        &u,
        cfg.u_radius,
        &v,
        cfg.v_radius,
        horizon,
        dim,
    );

    let mut table = Table::new(&["n", "invariant"]);
    let mut invariant_powers = Vec::new();
    for n in 1..=horizon {
        let inv = invariance_check(&op, &pattern, n, dim + n);
        if inv {
            invariant_powers.push(n);
        }
        table.push([n.to_string(), inv.to_string()]);
    }
    Ok(Findings {
        pass: hit.is_some(),
        result: json!({
            "operator": op,
            "pattern": pattern,
            "u": u,
            "uRadius": cfg.u_radius,
            "v": v,
            "vRadius": cfg.v_radius,
            "horizon": horizon,
            "truncationDim": dim,
            "hit": hit,
            "invariantPowers": invariant_powers,
        }),
        table,
    })
}

pub(crate) fn findim(cfg: &ExperimentConfig) -> Result<Findings, RunError> {
    let mut rng = rng(cfg);
    let t = match finite_matrix(cfg, "findim")? {
        Some(t) => t,
        None => sampling::matrix_with_spectrum_in(&mut rng, cfg.dim, 0.5, 1.5, 0.3),
    };
    let dim = t.dim();
    let x = cfg
        .vector
        .clone()
        .unwrap_or_else(|| random_vector(&mut rng, dim));
    let op = OperatorSpec::matrix(t);

    let rank_steps = 2 * dim;
    let ranks = (0..=rank_steps)
        .map(|n| orbit_span_rank(&op, &x, n))
        .collect::<Result<Vec<_>, _>>()?;
    let settled = ranks[dim - 1];
    let stabilized = ranks[dim - 1..].iter().all(|&r| r == settled);

    let pattern = cfg.pattern.unwrap_or(ZeroPattern::Prefix { m: 0 });
    let horizon = cfg.horizon_or(10_000);
    let points = orbit_points(&op, &x, horizon)?;
    let support_bound = cfg.support_bound.min(dim);
    let defect = density_defect(&points, &pattern, cfg.net_level, support_bound, cfg.epsilon)?;

    let mut table = Table::new(&["n", "rank"]);
    for (n, r) in ranks.iter().enumerate() {
        table.push([n.to_string(), r.to_string()]);
    }
    Ok(Findings {
        pass: stabilized && defect > 0.0,
        result: json!({
            "operator": op,
            "x": x,
            "ranks": ranks,
            "rank": settled,
            "stabilized": stabilized,
            "pattern": pattern,
            "orbitPoints": points.len(),
            "epsilon": cfg.epsilon,
            "netLevel": cfg.net_level,
            "supportBound": support_bound,
            "densityDefect": defect,
        }),
        table,
    })
}

pub(crate) fn norm_table(norms: &[f64]) -> Table {
    let mut table = Table::new(&["n", "norm"]);
    for (n, v) in norms.iter().enumerate() {
        table.push([n.to_string(), num(*v)]);
    }
    table
}

pub(crate) fn spectrum_cmd(cfg: &ExperimentConfig) -> Result<Findings, RunError> {
    let mut rng = rng(cfg);
    let t = match finite_matrix(cfg, "spectrum")? {
        Some(t) => t,
        None => sampling::unit_disk_matrix(&mut rng, cfg.dim),
    };
    let x = cfg
        .vector
        .clone()
        .unwrap_or_else(|| random_vector(&mut rng, t.dim()));
    let op = OperatorSpec::matrix(t);
    let summary = spectrum(&op, cfg.annulus_width)?;
    let (verdict, norms) = dichotomy_with_norms(&op, &x, cfg.horizon_or(400))?;
    let pass = !summary.avoids_annulus || verdict.classification != Classification::Neither;
    Ok(Findings {
        pass,
        result: json!({ "operator": op, "x": x, "spectrum": summary, "dichotomy": verdict }),
        table: norm_table(&norms),
    })
}

fn pairing_table(rows: &[PairingRow]) -> Table {
    let mut t = Table::new(&[
        "n",
        "observed_re",
        "observed_im",
        "predicted_re",
        "predicted_im",
        "deviation",
    ]);
    for r in rows {
        t.push([
            r.n.to_string(),
            num(r.observed.re),
            num(r.observed.im),
            num(r.predicted.re),
            num(r.predicted.im),
            num(r.deviation),
        ]);
    }
    t
}

pub(crate) fn kernel(cfg: &ExperimentConfig) -> Result<Findings, RunError> {
    let mut rng = rng(cfg);
    let (lambda, p) = (cfg.lambda, cfg.order);
    let (t, planted) = match finite_matrix(cfg, "kernel")? {
        Some(t) => (t, None),
        None => {
            let (t, y) = sampling::planted_adjoint_chain(&mut rng, cfg.dim.max(p), lambda, p);
            (t, Some(SeqVec::from_dense(&y)))
        }
    };
    let y = match cfg.functional.clone().or(planted) {
        Some(y) => y,
        None => {
            let a = t.adjoint().shift(lambda).pow(p);
            let y = null_vector(&a, RANK_TOL).ok_or_else(|| {
                RunError::Config(format!("{lambda} is not an eigenvalue of the adjoint"))
            })?;
            SeqVec::from_dense(&y)
        }
    };
    let x = cfg
        .vector
        .clone()
        .unwrap_or_else(|| random_vector(&mut rng, t.dim()));
    let op = OperatorSpec::matrix(t);
    let steps = cfg.horizon_or(12);
    let (deviation, rows) = if p == 1 {
        (
            eigen_orbit_pairing(&op, &x, &y, lambda, steps)?,
            pairing_trace(&op, &x, &y, lambda, steps)?,
        )
    } else {
        (
            generalized_pairing_polynomial(&op, &x, &y, lambda, p, steps)?,
            generalized_pairing_trace(&op, &x, &y, lambda, p, steps)?,
        )
    };
    let scale = rows.iter().map(|r| r.observed.norm()).fold(1.0, f64::max);
    let tol = cfg.tol_or(1e-7);
    Ok(Findings {
        pass: deviation <= tol * scale,
        result: json!({
            "operator": op,
            "lambda": lambda,
            "order": p,
            "x": x,
            "y": y,
            "deviation": deviation,
            "scale": scale,
            "tol": tol,
        }),
        table: pairing_table(&rows),
    })
}

pub(crate) fn jordan(cfg: &ExperimentConfig) -> Result<Findings, RunError> {
    let (lambda, p) = (cfg.lambda, cfg.order);
    let (t, chain_top) = match finite_matrix(cfg, "jordan")? {
        Some(t) => (t, None),
        None => (Matrix::jordan_block(lambda, p), Some(SeqVec::basis(p - 1))),
    };
    let y = match cfg.vector.clone().or(chain_top) {
        Some(y) => y,
        None => {
            let y = null_vector(&t.shift(lambda).pow(p), RANK_TOL).ok_or_else(|| {
                RunError::Config(format!("{lambda} is not an eigenvalue of the operator"))
            })?;
            SeqVec::from_dense(&y)
        }
    };
    let op = OperatorSpec::matrix(t);
    let tol = cfg.tol_or(1e-10);
    let mut table = Table::new(&["n", "closed_norm", "direct_norm", "relative_error"]);
    let mut worst: f64 = 0.0;
    for n in p..=cfg.horizon_or(12).max(p) {
        let closed = jordan_orbit(&op, lambda, p, &y, n)?;
        let direct = apply_power(&op, n, &y)?;
        let d = closed.distance(&direct);
        let rel = if direct.norm() > 0.0 {
            d / direct.norm()
        } else {
            d
        };
        worst = worst.max(rel);
        table.push([
            n.to_string(),
            num(closed.norm()),
            num(direct.norm()),
            num(rel),
        ]);
    }
    Ok(Findings {
        pass: worst <= tol,
        result: json!({
            "operator": op,
            "lambda": lambda,
            "order": p,
            "y": y,
            "maxRelativeError": worst,
            "tol": tol,
        }),
        table,
    })
}
