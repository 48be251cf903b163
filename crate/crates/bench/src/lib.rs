//! Shared inputs for the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use orbitlab_core::sampling;
use orbitlab_core::subspace::{dense_family, DenseFamilySpec};
use orbitlab_core::{Complex64, OperatorSpec, SeqVec, ZeroPattern};

pub fn targets(pattern: ZeroPattern, count: u64) -> Vec<SeqVec> {
    let spec = DenseFamilySpec::new(pattern, 6, 0).expect("valid family");
    (0..count).map(|j| dense_family(&spec, j)).collect()
}

/// A seeded matrix with spectrum in `[lo, hi]` and a start vector.
pub fn matrix_instance(seed: u64, dim: usize, lo: f64, hi: f64) -> (OperatorSpec, SeqVec) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = sampling::matrix_with_spectrum_in(&mut rng, dim, lo, hi, 0.3);
    let x = SeqVec::from_dense(&sampling::unit_disk_vector(&mut rng, dim));
    (OperatorSpec::matrix(t), x)
}

pub fn two() -> Complex64 {
    Complex64::new(2.0, 0.0)
}
