use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian within tolerance (relative residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("positive-definite factorization failed; operand is not PSD within tolerance")]
    NotPositiveDefinite,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("objective became non-finite at outer iteration {outer}, inner iteration {inner}")]
    NonFiniteObjective { outer: usize, inner: usize },

    #[error("zero-forcing is infeasible: effective eavesdropper channel has no null space")]
    ZeroForcingInfeasible,
}
