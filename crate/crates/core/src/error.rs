use thiserror::Error;

/// Errors raised by the operator, construction and obstruction routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vector support reaches index {index} but the matrix has dimension {dim}")]
    DimensionMismatch { dim: usize, index: usize },

    #[error("|lambda| = {0} must be strictly greater than 1")]
    InvalidModulus(f64),

    #[error("unsupported operator: {0}")]
    UnsupportedOperator(String),

    #[error("vector is not in the generalized kernel (residual {residual:e})")]
    NotInGeneralizedKernel { residual: f64 },

    #[error("vector is not an eigenvector of the adjoint (residual {residual:e})")]
    NotEigenvector { residual: f64 },

    #[error("complement is not invariant: T e_{index} leaks {leak:e} into the subspace")]
    ComplementNotInvariant { index: usize, leak: f64 },

    #[error("invalid zero pattern: {0}")]
    InvalidPattern(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value encountered")]
    NonFinite,
}

pub type Result<T> = std::result::Result<T, Error>;
