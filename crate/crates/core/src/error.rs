use thiserror::Error;

/// Errors shared across the synthesis and verification pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("matrix is not positive semi-definite: {0}")]
    Indefinite(String),
    #[error("incomplete factorization broke down: {0}")]
    Breakdown(String),
    #[error("empty ensemble: {0}")]
    EmptyEnsemble(String),
    #[error("circuit error: {0}")]
    Circuit(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
