use thiserror::Error;

/// Errors raised by the model, solvers and experiment harness.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SolverError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("scalar Newton solve did not converge after {iterations} iterations (last iterate {last}, residual {residual:e})")]
    NewtonNonConvergence {
        iterations: usize,
        last: f64,
        residual: f64,
    },

    #[error("fast sweeping did not converge within {max_sweeps} sweeps (last update {last_update:e})")]
    SweepNonConvergence { max_sweeps: usize, last_update: f64 },

    #[error("numerical instability at step {step}: max |U| = {max_abs}")]
    Unstable { step: usize, max_abs: f64 },

    #[error("query outside validity range: {0}")]
    OutOfValidity(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, SolverError>;
