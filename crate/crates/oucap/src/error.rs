use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("quadrature rule of order {order} failed validation: {detail}")]
    UnstableQuadrature { order: usize, detail: String },

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    SolverDidNotConverge { iterations: usize, residual: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
