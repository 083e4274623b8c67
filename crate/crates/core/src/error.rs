use thiserror::Error;

/// Failures surfaced by the samplers, solvers and estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid ensemble specification: {0}")]
    InvalidSpec(String),

    #[error("matrix is not symmetric: defect {defect:e} exceeds {tolerance:e}")]
    NotSymmetric { defect: f64, tolerance: f64 },

    #[error("eigenvalue iteration did not converge after {iterations} sweeps at index {index}")]
    NoConvergence { index: usize, iterations: usize },

    #[error("dimension {0} exceeds the dense storage limit")]
    DimensionOverflow(usize),

    /// A numerical safeguard tripped (truncation, clamping, quadrature resolution).
    #[error("numeric guard failed: {0}")]
    NumericGuard(String),

    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
