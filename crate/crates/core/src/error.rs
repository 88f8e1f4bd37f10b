use thiserror::Error;

/// Errors raised by the estimators, planners and simulation engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A sample entry is NaN or infinite.
    #[error("invalid sample value {value} at index {index}")]
    InvalidSample { index: usize, value: String },

    /// An iterative routine failed to converge.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Input text could not be parsed.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// An experiment configuration is inconsistent.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
