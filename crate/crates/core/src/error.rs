use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors reported by the library.
///
/// `Validation` carries the name of the broken invariant and the size of the
/// deviation so callers can report both.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("factor index {index} out of range for {n_factors} factors")]
    FactorOutOfRange { index: usize, n_factors: usize },

    #[error("factor set is empty")]
    EmptyFactorSet,

    #[error("cut {cut} invalid for {n_factors} factors (need 1 <= cut <= {})", n_factors - 1)]
    InvalidCut { cut: usize, n_factors: usize },

    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,

    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },

    #[error("validation failed: {invariant} off by {deviation:.3e}")]
    Validation { invariant: String, deviation: f64 },

    #[error("deterministic grid needs {tuples} tuples, above the cap of {cap}")]
    GridCapExceeded { tuples: usize, cap: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("linear algebra backend failure: {0}")]
    Backend(#[from] ndarray_linalg::error::LinalgError),
}

impl Error {
    pub fn validation(invariant: impl Into<String>, deviation: f64) -> Self {
        Error::Validation {
            invariant: invariant.into(),
            deviation,
        }
    }
}
