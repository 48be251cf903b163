use serde_json::json;

use orbitlab_core::constructor::{
    assemble, build_schedule, certify, certify_orbit, HittingSchedule,
};
use orbitlab_core::criterion::check_criterion;
use orbitlab_core::linalg::Matrix;
use orbitlab_core::obstructions::{dichotomy_with_norms, spectrum, Classification};
use orbitlab_core::seqspace::apply;
use orbitlab_core::subspace::{invariance_check, invariance_check_all};
use orbitlab_core::{length, Complex64, OperatorSpec, SeqVec, ZeroPattern};

use crate::commands::{cert_table, criterion_table, family, family_members, run_criterion};
use crate::{num, ExperimentConfig, Findings, Preset, RunError, Table};

pub(crate) fn run(cfg: &ExperimentConfig, preset: Preset) -> Result<Findings, RunError> {
    match preset {
        Preset::DirectSumIdentity => direct_sum(cfg, ZeroPattern::Prefix { m: 0 }, true),
        Preset::MonomialToeplitz => monomial(cfg),
        Preset::EvenZeros => even_zeros(cfg),
        Preset::PrefixConstruction => prefix_construction(cfg),
        Preset::PrefixDirectSum => direct_sum(cfg, ZeroPattern::Prefix { m: 3 }, false),
        Preset::SpectrumSplit => spectrum_split(cfg),
    }
}

fn require_expanding(cfg: &ExperimentConfig) -> Result<(), RunError> {
    if cfg.lambda.norm() <= 1.0 {
        return Err(RunError::Config(format!(
            "preset needs |lambda| > 1, got {}",
            cfg.lambda.norm()
        )));
    }
    Ok(())
}

/// Schedule and assembled vector for `λB` over the first `targets` family members.
fn rolewicz(
    cfg: &ExperimentConfig,
    pattern: ZeroPattern,
) -> Result<(HittingSchedule, SeqVec), RunError> {
    require_expanding(cfg)?;
    let spec = family(cfg, pattern)?;
    let targets = family_members(&spec, 0, cfg.targets);
    let sched = build_schedule(cfg.lambda, &targets)?;
    let f = assemble(cfg.lambda, &sched);
    Ok((sched, f))
}

/// `(λB) ⊕ I` with the vector `f ⊕ 0`, certified against `M ⊕ {0}`.
///
/// The left block is cut at `split >= length(f)`, where truncated `B` agrees
/// with `B` on every vector the certificate touches.
fn direct_sum(
    cfg: &ExperimentConfig,
    left: ZeroPattern,
    expect_invariant: bool,
) -> Result<Findings, RunError> {
    let (sched, f) = rolewicz(cfg, left)?;
    let split = cfg.truncation_dim.max(length(&f));
    let op = OperatorSpec::direct_sum(
        OperatorSpec::scaled_backward_shift(cfg.lambda, 1),
        OperatorSpec::Identity,
        split,
    );
    let patterns = [left, ZeroPattern::RightBlock { split }];
    let cert = certify_orbit(&op, &f, &sched, &patterns, cfg.tol_or(1e-9))?;

    let powers: Vec<usize> = (1..=cfg.horizon_or(32)).collect();
    let invariant: Vec<bool> = powers
        .iter()
        .map(|&n| invariance_check_all(&op, &patterns, n, 2 * split))
        .collect();
    let as_expected = invariant.iter().all(|&b| b == expect_invariant);
    Ok(Findings {
        pass: cert.pass && as_expected,
        result: json!({
            "operator": op,
            "patterns": patterns,
            "split": split,
            "length": length(&f),
            "schedule": sched,
            "vector": f,
            "certificate": cert,
            "invariance": { "powers": powers, "invariant": invariant, "expected": expect_invariant },
        }),
        table: cert_table(&cert),
    })
}

/// `φ(z) = z^b`: the adjoint Toeplitz operator acts on coefficients as `B^b`
/// and `C_φ` spreads index `i` to `b i`, so `C_φ f` is certified for `λB^b`
/// on the supports in `bℕ`.
fn monomial(cfg: &ExperimentConfig) -> Result<Findings, RunError> {
    let b = cfg.shift_power;
    let (sched, f) = rolewicz(cfg, ZeroPattern::Prefix { m: 0 })?;
    let compose = |v: &SeqVec| SeqVec::from_entries(v.iter().map(|(i, z)| (i * b, z)));
    let lifted = HittingSchedule {
        entries: sched
            .entries
            .iter()
            .map(|e| orbitlab_core::ScheduleEntry {
                target: compose(&e.target),
                ..e.clone()
            })
            .collect(),
        ..sched.clone()
    };
    let cf = compose(&f);
    let op = OperatorSpec::scaled_backward_shift(cfg.lambda, b);
    let pattern = ZeroPattern::SupportIn { b };
    let cert = certify_orbit(&op, &cf, &lifted, &[pattern], cfg.tol_or(1e-9))?;

    // T_φ* C_φ = C_φ B, checked on the targets and on f itself
    let shift = OperatorSpec::scaled_backward_shift(cfg.lambda, 1);
    let mut intertwining: f64 = 0.0;
    for v in sched.entries.iter().map(|e| &e.target).chain([&f]) {
        let lhs = apply(&op, &compose(v))?;
        let rhs = compose(&apply(&shift, v)?);
        intertwining = intertwining.max(lhs.distance(&rhs));
    }
    Ok(Findings {
        pass: cert.pass && intertwining == 0.0,
        result: json!({
            "operator": op,
            "pattern": pattern,
            "shiftPower": b,
            "intertwiningDefect": intertwining,
            "schedule": lifted,
            "vector": cf,
            "certificate": cert,
        }),
        table: cert_table(&cert),
    })
}

fn even_zeros(cfg: &ExperimentConfig) -> Result<Findings, RunError> {
    require_expanding(cfg)?;
    let pattern = ZeroPattern::Residue { a: 0, b: 2 };
    let op = OperatorSpec::scaled_backward_shift(cfg.lambda, 1);
    let report = run_criterion(cfg, &op, pattern)?;

    // same samples with |λ| = 1: the right inverses no longer shrink
    let unit = OperatorSpec::scaled_backward_shift(cfg.lambda / cfg.lambda.norm(), 1);
    let samples = family_members(&family(cfg, pattern)?, 1, cfg.targets);
    let nks: Vec<usize> = (1..=cfg.horizon_or(30))
        .map(|k| cfg.time_step * k)
        .collect();
    let control = check_criterion(
        &unit,
        &pattern,
        &samples,
        &samples,
        &nks,
        cfg.truncation_dim,
        cfg.tol_or(1e-12),
    )?;
    Ok(Findings {
        pass: report.verdict.pass() && !control.verdict.cond_ii,
        result: json!({
            "operator": op,
            "pattern": pattern,
            "report": report,
            "unitModulusControl": control.verdict,
        }),
        table: criterion_table(&report),
    })
}

fn prefix_construction(cfg: &ExperimentConfig) -> Result<Findings, RunError> {
    let pattern = ZeroPattern::Prefix { m: 3 };
    let (sched, f) = rolewicz(cfg, pattern)?;
    let cert = certify(cfg.lambda, &f, &sched, &pattern, cfg.tol_or(1e-9));
    let op = OperatorSpec::scaled_backward_shift(cfg.lambda, 1);
    let powers: Vec<usize> = (1..=cfg.horizon_or(32)).collect();
    let invariant: Vec<bool> = powers
        .iter()
        .map(|&n| invariance_check(&op, &pattern, n, cfg.truncation_dim))
        .collect();
    Ok(Findings {
        pass: cert.pass && invariant.iter().all(|&b| !b),
        result: json!({
            "operator": op,
            "pattern": pattern,
            "length": length(&f),
            "schedule": sched,
            "vector": f,
            "certificate": cert,
            "invariance": { "powers": powers, "invariant": invariant, "expected": false },
        }),
        table: cert_table(&cert),
    })
}

/// Block size of the finite sections of `2B` and `3I`.
const SECTION: usize = 8;

/// Finite sections of `(2B) ⊕ (3I)`. The section of `2B` is nilpotent, so its
/// orbits die out; on ℓ² the spectrum of `2B` is the closed disk of radius 2.
fn spectrum_split(cfg: &ExperimentConfig) -> Result<Findings, RunError> {
    let d = SECTION;
    let two_b = Matrix::jordan_block(Complex64::new(0.0, 0.0), d).scale(Complex64::new(2.0, 0.0));
    let three_i = Matrix::identity(d).scale(Complex64::new(3.0, 0.0));
    let op = OperatorSpec::matrix(two_b.direct_sum(&three_i));
    let summary = spectrum(&op, cfg.annulus_width)?;

    let starts = [
        ("shift", SeqVec::basis(d - 1), Classification::ToZero),
        ("identity", SeqVec::basis(d), Classification::ToInfinity),
        (
            "mixed",
            SeqVec::basis(d - 1).add(&SeqVec::basis(d)),
            Classification::ToInfinity,
        ),
    ];
    let mut table = Table::new(&["block", "n", "norm"]);
    let mut verdicts = Vec::new();
    let mut as_expected = true;
    for (name, x, want) in starts {
        let (verdict, norms) = dichotomy_with_norms(&op, &x, cfg.horizon_or(400))?;
        as_expected &= verdict.classification == want;
        for (n, v) in norms.iter().enumerate() {
            table.push([name.to_string(), n.to_string(), num(*v)]);
        }
        verdicts.push(json!({ "block": name, "x": x, "expected": want, "dichotomy": verdict }));
    }
    Ok(Findings {
        pass: summary.avoids_annulus && as_expected,
        result: json!({
            "operator": op,
            "sectionSize": d,
            "spectrum": summary,
            "orbits": verdicts,
        }),
        table,
    })
}
