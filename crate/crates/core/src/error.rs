use thiserror::Error;

/// Every failure the library reports. The variants map onto the CLI exit
/// codes: `Validation` is a malformed input, everything else is a query error.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("validation error at {path}: {msg}")]
    Validation { path: String, msg: String },
    #[error("degenerate operator for orbit `{orbit}`: {detail}")]
    Degenerate { orbit: String, detail: String },
    #[error("missing data: {0}")]
    Missing(String),
    #[error("consistency error: {0}")]
    Consistency(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

impl Error {
    pub fn validation(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Validation { path: path.into(), msg: msg.into() }
    }

    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
