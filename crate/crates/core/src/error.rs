//! Error types shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported derivative order {requested} (max {available})")]
    UnsupportedOrder { requested: usize, available: usize },

    #[error("quadrature accuracy: estimated error {estimate:.3e} exceeds tolerance {tol:.3e}")]
    Accuracy { estimate: f64, tol: f64 },

    #[error("construction error: {0}")]
    Construction(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("linear algebra error: {0}")]
    LinAlg(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("ladder abort: {0}")]
    LadderAbort(String),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::LinAlg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
