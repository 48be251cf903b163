use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use orbitlab_bench::{matrix_instance, targets, two};
use orbitlab_core::constructor::{assemble, build_schedule, certify};
use orbitlab_core::linalg::Matrix;
use orbitlab_core::obstructions::{density_defect, jordan_orbit, orbit_points, spectral_dichotomy};
use orbitlab_core::seqspace::apply_power;
use orbitlab_core::{Complex64, OperatorSpec, SeqVec, ZeroPattern};

fn construction(c: &mut Criterion) {
    let pattern = ZeroPattern::Prefix { m: 3 };
    let mut group = c.benchmark_group("construct+certify");
    for count in [10u64, 20, 40] {
        let ts = targets(pattern, count);
        group.bench_with_input(BenchmarkId::from_parameter(count), &ts, |b, ts| {
            b.iter(|| {
                let sched = build_schedule(two(), ts).unwrap();
                let f = assemble(two(), &sched);
                certify(two(), &f, &sched, &pattern, 1e-9)
            })
        });
    }
    group.finish();
}

fn shift_powers(c: &mut Criterion) {
    let op = OperatorSpec::scaled_backward_shift(two(), 1);
    let f = SeqVec::from_entries((0..512).map(|i| (i, Complex64::new(1.0 / (i + 1) as f64, 0.0))));
    c.bench_function("apply_power 2B^256", |b| {
        b.iter(|| apply_power(&op, black_box(256), &f).unwrap())
    });
}

fn jordan(c: &mut Criterion) {
    let lambda = Complex64::new(0.7, 0.7);
    let op = OperatorSpec::matrix(Matrix::jordan_block(lambda, 4));
    let y = SeqVec::basis(3);
    c.bench_function("jordan_orbit p=4 n=12", |b| {
        b.iter(|| jordan_orbit(&op, lambda, 4, &y, black_box(12)).unwrap())
    });
}

fn dichotomy(c: &mut Criterion) {
    let (op, x) = matrix_instance(1, 8, 1.1, 2.0);
    c.bench_function("spectral_dichotomy dim 8", |b| {
        b.iter(|| spectral_dichotomy(&op, &x, 400).unwrap())
    });
}

fn density(c: &mut Criterion) {
    let (op, x) = matrix_instance(2, 4, 0.5, 1.5);
    let points = orbit_points(&op, &x, 10_000).unwrap();
    let pattern = ZeroPattern::Prefix { m: 0 };
    c.bench_function("density_defect 10k points", |b| {
        b.iter(|| density_defect(&points, &pattern, 0, 4, 0.1).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = criterion::Criterion::default().sample_size(20);
    targets = construction, shift_powers, jordan, dichotomy, density
}
criterion_main!(benches);
