//! Error types shared across the engine.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("convergence not reached: {0}")]
    NonConvergence(String),

    #[error("degenerate steady-state kernel: {0}")]
    DegenerateKernel(String),

    #[error("unsupported size: {0}")]
    UnsupportedSize(String),
}

impl From<ndarray_linalg::error::LinalgError> for CoreError {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        CoreError::Numerical(format!("linear algebra backend: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
