use thiserror::Error;

/// Errors produced by the library. Variants map onto the CLI exit codes:
/// `InvalidInput` and `Unsupported` are usage problems, `Resource` is a
/// budget overrun and `ConstructionFailure` is a failed verification.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("budget exceeded: {what} (required {required}, limit {limit})")]
    Resource {
        what: String,
        required: String,
        limit: String,
    },

    #[error("construction failed: {0}")]
    ConstructionFailure(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub(crate) fn resource(
        what: impl Into<String>,
        required: impl ToString,
        limit: impl ToString,
    ) -> Self {
        Error::Resource {
            what: what.into(),
            required: required.to_string(),
            limit: limit.to_string(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
