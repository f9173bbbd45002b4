use thiserror::Error;

pub type Result<T> = std::result::Result<T, WleError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WleError {
    /// Parameter outside its space, or observation outside the family's support.
    #[error("domain error: {0}")]
    Domain(String),
    /// Weights or moments collapsed so that no estimate exists.
    #[error("degenerate estimate: {0}")]
    Degenerate(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("checksum mismatch for dataset `{name}`: expected {expected}, got {actual}")]
    Checksum {
        name: String,
        expected: String,
        actual: String,
    },
    #[error("unknown format: {0}")]
    UnknownFormat(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for WleError {
    fn from(e: std::io::Error) -> Self {
        WleError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for WleError {
    fn from(e: serde_json::Error) -> Self {
        WleError::Parse(e.to_string())
    }
}

impl From<csv::Error> for WleError {
    fn from(e: csv::Error) -> Self {
        WleError::Parse(e.to_string())
    }
}
