//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing column `{0}` in CSV header")]
    MissingColumn(String),
    #[error("malformed CSV: {0}")]
    MalformedCsv(#[from] csv::Error),
    #[error("invalid stopword entry `{0}`: internal whitespace")]
    InvalidStopword(String),
    #[error("empty vocabulary: no term occurs at least {0} times")]
    EmptyVocabulary(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("singular value decomposition did not converge")]
    SvdFailure,
    #[error("schema mismatch in {path}: expected {expected}, found {found}")]
    SchemaMismatch {
        path: String,
        expected: String,
        found: String,
    },
    #[error("invalid artifact {path}: {reason}")]
    InvalidArtifact { path: String, reason: String },
    #[error("missing artifact: {0}")]
    MissingArtifact(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
