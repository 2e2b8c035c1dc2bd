use thiserror::Error;

/// Errors surfaced by model assembly, solvers and oracles.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("linear algebra failure: {0}")]
    Linalg(String),
    #[error("subset count {subsets} exceeds exhaustive-search cap {cap}")]
    CapExceeded { subsets: u128, cap: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn dim(context: &'static str, expected: impl Into<String>, found: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            context,
            expected: expected.into(),
            found: found.into(),
        }
    }
}
