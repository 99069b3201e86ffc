use thiserror::Error;

/// Failure categories surfaced by the library. The CLI maps `Config`,
/// `Usage` and `Admissibility` to exit code 1 and the rest to 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("admissibility error: {0}")]
    Admissibility(String),
    #[error("singularity: {0}")]
    Singular(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn is_user_error(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Usage(_) | Error::Admissibility(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
