//! Subspace-hypercyclicity at finite truncation scale.
//!
//! * [`seqspace`]: sparse complex sequences and symbolic operators (shifts,
//!   scalar multiples, diagonals, direct sums, finite matrices).
//! * [`subspace`]: coordinate zero-pattern subspaces, projections and a
//!   deterministic dense family of dyadic vectors.
//! * [`constructor`]: explicit subspace-hypercyclic vectors for `λB` with
//!   independent a-posteriori certificates.
//! * [`criterion`]: the three-condition criterion on finite samples and a
//!   transitivity probe.
//! * [`obstructions`]: Jordan-orbit closed form, adjoint-kernel pairings,
//!   spectral dichotomy, compression, finite-dimensional rank and density checks.

pub mod constructor;
pub mod criterion;
pub mod error;
pub mod linalg;
pub mod obstructions;
pub mod sampling;
pub mod seqspace;
pub mod subspace;

pub use constructor::{
    assemble, build_schedule, certify, length, CertEntry, CertReport, HittingSchedule,
    ScheduleEntry,
};
pub use constructor::{certify_orbit, CERT_CSV_HEADER};
pub use criterion::{backsolve, check_criterion, transitivity_probe, CriterionReport};
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use num_complex::Complex64;
pub use obstructions::{Classification, DichotomyVerdict};
pub use seqspace::{
    adjoint_apply, apply, apply_power, inner, norm, ComplexScalar, OperatorSpec, SeqVec,
};
pub use subspace::{
    dense_family, invariance_check, invariance_check_all, membership_defect, project,
    DenseFamilySpec, ZeroPattern,
};
