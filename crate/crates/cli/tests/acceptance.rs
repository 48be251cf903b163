//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use orbitlab_cli::{execute, ExperimentConfig, Preset};
use orbitlab_core::constructor::{assemble, build_schedule, certify};
use orbitlab_core::criterion::{check_criterion, transitivity_probe};
use orbitlab_core::linalg::Matrix;
use orbitlab_core::obstructions::{
    compression_orbit_check, density_defect, eigen_orbit_pairing, generalized_pairing_polynomial,
    jordan_orbit, orbit_points, orbit_span_rank, spectral_dichotomy, Classification,
};
use orbitlab_core::sampling;
use orbitlab_core::subspace::{dense_family, invariance_check, DenseFamilySpec};
use orbitlab_core::{length, Complex64, Error, OperatorSpec, SeqVec, ZeroPattern};

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:?}, limit {limit:?}"))?;
    Ok(t)
}

/// Criteria 1 and 2: the construction certificate for `2B` over 20 targets.
fn construction(m: usize) -> Outcome {
    let start = Instant::now();
    let lambda = c(2.0, 0.0);
    let pattern = ZeroPattern::Prefix { m };
    let spec = DenseFamilySpec::new(pattern, 6, 0).map_err(|e| e.to_string())?;
    let targets: Vec<SeqVec> = (0..20).map(|j| dense_family(&spec, j)).collect();
    let sched = build_schedule(lambda, &targets).map_err(|e| e.to_string())?;
    let f = assemble(lambda, &sched);
    let cert = certify(lambda, &f, &sched, &pattern, 1e-9);
    ensure(cert.entries.len() == 20, || "expected 20 entries".into())?;
    for e in &cert.entries {
        let loose = ((e.n + 1)..=20)
            .map(|j| 4f64.powi(-(j as i32)))
            .sum::<f64>()
            .sqrt();
        ensure(e.membership_defect == 0.0, || {
            format!("entry {} has defect {}", e.n, e.membership_defect)
        })?;
        ensure(e.distance <= loose + 1e-9, || {
            format!("entry {}: distance {} > bound {}", e.n, e.distance, loose)
        })?;
        ensure(e.pass, || {
            format!("entry {} fails its own bound {}", e.n, e.bound)
        })?;
    }
    let t = within(start, Duration::from_secs(5))?;
    Ok(format!("20 entries, length(f) = {}, {t:?}", length(&f)))
}

fn criterion_even_zeros() -> Outcome {
    let pattern = ZeroPattern::Residue { a: 0, b: 2 };
    let spec = DenseFamilySpec::new(pattern, 8, 1).map_err(|e| e.to_string())?;
    let samples: Vec<SeqVec> = (1..=50).map(|j| dense_family(&spec, j * 131)).collect();
    let nks: Vec<usize> = (1..=30).map(|k| 2 * k).collect();
    let op = OperatorSpec::scaled_backward_shift(c(2.0, 0.0), 1);
    let report = check_criterion(&op, &pattern, &samples, &samples, &nks, 64, 1e-12)
        .map_err(|e| e.to_string())?;

    for row in &report.cond_i {
        let len = length(&samples[row.sample_index]);
        let first = nks.iter().position(|&n| n >= len).map(|k| k + 1);
        ensure(
            first.is_some()
                && row.zero_from.is_some()
                && row.zero_from <= first
                && row.max_tail_norm == 0.0,
            || {
                format!(
                    "sample {}: zero_from {:?}, expected by {:?}",
                    row.sample_index, row.zero_from, first
                )
            },
        )?;
    }
    for row in &report.cond_ii {
        let y = samples[row.sample_index].norm();
        let want = y * 2f64.powi(-(row.n_k as i32));
        ensure(row.recovery_error <= 1e-12, || {
            format!("recovery error {} at k={}", row.recovery_error, row.k)
        })?;
        ensure((row.xk_norm - want).abs() <= 1e-12 * want, || {
            format!("|x_k| = {} but |y| 2^-2k = {}", row.xk_norm, want)
        })?;
    }
    ensure(report.cond_iii.iter().all(|r| r.invariant), || {
        "(iii) failed".into()
    })?;
    ensure(report.verdict.pass(), || {
        format!("verdict {:?}", report.verdict)
    })?;

    let unit = OperatorSpec::scaled_backward_shift(c(0.0, 1.0), 1);
    let control = check_criterion(&unit, &pattern, &samples, &samples, &nks, 64, 1e-12)
        .map_err(|e| e.to_string())?;
    ensure(!control.verdict.cond_ii, || {
        "|lambda| = 1 control passed (ii)".into()
    })?;
    Ok(format!(
        "{} recovery rows, control fails (ii)",
        report.cond_ii.len()
    ))
}

fn non_transitivity() -> Outcome {
    let op = OperatorSpec::scaled_backward_shift(c(2.0, 0.0), 1);
    let pattern = ZeroPattern::Prefix { m: 3 };
    for n in 1..=32 {
        ensure(!invariance_check(&op, &pattern, n, 64), || {
            format!("invariant at n={n}")
        })?;
    }
    let spec = DenseFamilySpec::new(pattern, 6, 0).map_err(|e| e.to_string())?;
    let pairs = [(5, 90), (1, 2), (40, 7), (300, 11)];
    for (a, b) in pairs {
        let (u, v) = (dense_family(&spec, a), dense_family(&spec, b));
        // `find` over increasing n: no hit at 200 means no hit at any smaller horizon
        let hit = transitivity_probe(&op, &pattern, &u, 0.25, &v, 0.25, 200, 64);
        ensure(hit.is_none(), || {
            format!("probe hit at {hit:?} for ({a}, {b})")
        })?;
    }
    Ok(format!(
        "no invariance for n <= 32, {} probes empty to horizon 200",
        pairs.len()
    ))
}

fn jordan_formula() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for lambda in [c(2.0, 0.0), c(0.7, 0.7), c(-1.1, 0.0)] {
        for p in 1..=4 {
            let op = OperatorSpec::matrix(Matrix::jordan_block(lambda, p));
            let y = SeqVec::basis(p - 1);
            for n in p..=12 {
                let closed = jordan_orbit(&op, lambda, p, &y, n).map_err(|e| e.to_string())?;
                // oracle: dense matrix power, independent of the sparse apply path
                let direct = SeqVec::from_dense(
                    &Matrix::jordan_block(lambda, p)
                        .pow(n)
                        .mul_vec(&y.to_dense(p)),
                );
                let rel = closed.distance(&direct) / direct.norm();
                worst = worst.max(rel);
                ensure(rel <= 1e-10, || {
                    format!("lambda={lambda} p={p} n={n}: rel {rel}")
                })?;
            }
        }
    }
    let t = within(start, Duration::from_secs(1))?;
    Ok(format!("max relative error {worst:.2e}, {t:?}"))
}

fn kernel_pairing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    let mut worst_eigen: f64 = 0.0;
    for i in 0..100 {
        let dim = rng.gen_range(2..=8);
        let lambda = sampling::unit_disk(&mut rng);
        let (t, y) = sampling::planted_adjoint_chain(&mut rng, dim, lambda, 1);
        let x = SeqVec::from_dense(&sampling::unit_disk_vector(&mut rng, dim));
        let n = rng.gen_range(1..=12);
        let d = eigen_orbit_pairing(
            &OperatorSpec::matrix(t),
            &x,
            &SeqVec::from_dense(&y),
            lambda,
            n,
        )
        .map_err(|e| format!("eigen instance {i}: {e}"))?;
        worst_eigen = worst_eigen.max(d);
        ensure(d <= 1e-8, || format!("eigen instance {i}: deviation {d}"))?;
    }
    let mut worst_chain: f64 = 0.0;
    for i in 0..50 {
        let p = rng.gen_range(1..=3);
        let dim = rng.gen_range(p.max(2)..=8);
        let lambda = sampling::unit_disk(&mut rng);
        let (t, y) = sampling::planted_adjoint_chain(&mut rng, dim, lambda, p);
        let x = SeqVec::from_dense(&sampling::unit_disk_vector(&mut rng, dim));
        let r = generalized_pairing_polynomial(
            &OperatorSpec::matrix(t),
            &x,
            &SeqVec::from_dense(&y),
            lambda,
            p,
            12,
        )
        .map_err(|e| format!("chain instance {i}: {e}"))?;
        worst_chain = worst_chain.max(r);
        ensure(r <= 1e-7, || {
            format!("chain instance {i} (p={p}): residual {r}")
        })?;
    }
    Ok(format!(
        "eigen max {worst_eigen:.2e}, chain max {worst_chain:.2e}"
    ))
}

fn dichotomy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let mut counts = [0usize; 2];
    for i in 0..200 {
        let dim = rng.gen_range(1..=8);
        let (lo, hi, want) = if i % 2 == 0 {
            (0.05, 0.9, Classification::ToZero)
        } else {
            (1.1, 3.0, Classification::ToInfinity)
        };
        let t = sampling::matrix_with_spectrum_in(&mut rng, dim, lo, hi, 0.3);
        let x = SeqVec::from_dense(&sampling::unit_disk_vector(&mut rng, dim));
        let v = spectral_dichotomy(&OperatorSpec::matrix(t), &x, 400).map_err(|e| e.to_string())?;
        ensure(v.classification == want, || {
            format!("instance {i}: {:?}, expected {want:?}", v.classification)
        })?;
        counts[i % 2] += 1;
    }
    Ok(format!(
        "{} toZero, {} toInfinity, 0 misclassified",
        counts[0], counts[1]
    ))
}

fn finite_dimension() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(48);
    for i in 0..200 {
        let dim = rng.gen_range(1..=8);
        let t = sampling::matrix_with_spectrum_in(&mut rng, dim, 0.5, 1.5, 0.3);
        let op = OperatorSpec::matrix(t);
        let x = SeqVec::from_dense(&sampling::unit_disk_vector(&mut rng, dim));
        let settled = orbit_span_rank(&op, &x, dim - 1).map_err(|e| e.to_string())?;
        for n in dim..=2 * dim {
            let r = orbit_span_rank(&op, &x, n).map_err(|e| e.to_string())?;
            ensure(r == settled, || {
                format!("instance {i}: rank {r} at {n}, {settled} at dim-1")
            })?;
        }
    }
    let patterns = [
        ZeroPattern::Prefix { m: 0 },
        ZeroPattern::Prefix { m: 1 },
        ZeroPattern::Residue { a: 0, b: 2 },
        ZeroPattern::SupportIn { b: 2 },
        ZeroPattern::RightBlock { split: 2 },
    ];
    let mut least: f64 = 1.0;
    for i in 0..50 {
        let dim = 4;
        let t = sampling::matrix_with_spectrum_in(&mut rng, dim, 0.5, 1.5, 0.3);
        let x = SeqVec::from_dense(&sampling::unit_disk_vector(&mut rng, dim));
        let points =
            orbit_points(&OperatorSpec::matrix(t), &x, 10_000).map_err(|e| e.to_string())?;
        let p = patterns[i % patterns.len()];
        let d = density_defect(&points, &p, 0, dim, 0.1).map_err(|e| e.to_string())?;
        least = least.min(d);
        ensure(d >= 0.5, || {
            format!("trial {i} ({p:?}): density defect {d}")
        })?;
    }
    Ok(format!(
        "ranks stable on 200 instances, min density defect {least:.3}"
    ))
}

fn compression() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(49);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let dim = rng.gen_range(2..=8);
        let split = rng.gen_range(1..dim);
        let mut t = sampling::block_upper_triangular(&mut rng, dim, split);
        // normalize the spectral radius so the orbit neither blows up nor dies
        let rho = t.eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
        if rho > 0.0 {
            t = t.scale(Complex64::new(1.0 / rho, 0.0));
        }
        let pattern = ZeroPattern::Prefix { m: split };
        let x = SeqVec::from_entries((split..dim).map(|j| (j, sampling::unit_disk(&mut rng))));
        let d = compression_orbit_check(&OperatorSpec::matrix(t), &pattern, &x, 20)
            .map_err(|e| format!("instance {i}: {e}"))?;
        worst = worst.max(d);
        ensure(d <= 1e-9, || format!("instance {i}: deviation {d}"))?;
    }
    let lower = Matrix::from_real_rows(&[&[1.0, 0.0], &[1.0, 1.0]]).map_err(|e| e.to_string())?;
    let control = compression_orbit_check(
        &OperatorSpec::matrix(lower),
        &ZeroPattern::Prefix { m: 1 },
        &SeqVec::basis(1),
        20,
    );
    ensure(
        matches!(control, Err(Error::ComplementNotInvariant { .. })),
        || format!("control returned {control:?}"),
    )?;
    Ok(format!("max deviation {worst:.2e}, control rejected"))
}

fn determinism() -> Outcome {
    for preset in Preset::ALL {
        let cfg = ExperimentConfig::preset(preset);
        let a = execute(&cfg).map_err(|e| e.to_string())?;
        let b = execute(&cfg).map_err(|e| e.to_string())?;
        let (ja, jb) = (a.report_json().unwrap(), b.report_json().unwrap());
        ensure(ja == jb, || {
            format!("{} differs between runs", preset.name())
        })?;
        ensure(
            a.table.to_csv().unwrap() == b.table.to_csv().unwrap(),
            || format!("{} table differs", preset.name()),
        )?;
        ensure(a.passed(), || format!("{} verdict fails", preset.name()))?;
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = ExperimentConfig::preset(Preset::PrefixConstruction);
    let first = orbitlab_cli::run(&cfg, &dir.path().join("a")).map_err(|e| e.to_string())?;
    orbitlab_cli::run(&cfg, &dir.path().join("b")).map_err(|e| e.to_string())?;
    let read = |d: &str| std::fs::read(dir.path().join(d).join("report.json")).unwrap();
    ensure(read("a") == read("b"), || {
        "report.json bytes differ on disk".into()
    })?;
    ensure(first.table.rows.len() == 20, || {
        "example-3.6 table should have 20 rows".into()
    })?;
    Ok(format!("{} presets byte-identical", Preset::ALL.len()))
}

fn main() {
    let checks: [(&str, fn() -> Outcome); 10] = [
        ("construction certificate, PrefixZero(3)", || {
            construction(3)
        }),
        ("classical degeneration, PrefixZero(0)", || construction(0)),
        ("criterion on the even-zero subspace", criterion_even_zeros),
        ("non-transitivity evidence", non_transitivity),
        ("Jordan orbit closed form", jordan_formula),
        ("adjoint kernel pairings", kernel_pairing),
        ("spectral dichotomy", dichotomy),
        ("finite-dimension evidence", finite_dimension),
        ("projection compression", compression),
        ("preset determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        checks.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
