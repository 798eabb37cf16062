use thiserror::Error;

/// Errors raised by the toolkit.
///
/// The variants map onto the process exit codes used by the command-line
/// front end: configuration and validation problems are user errors, numerical
/// failures are reported separately so that callers can retry with looser
/// tolerances.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("numerical error: {message} (achieved tolerance {achieved:e})")]
    Numerical { message: String, achieved: f64 },

    #[error("model error: {0}")]
    Model(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>, achieved: f64) -> Self {
        Error::Numerical {
            message: msg.into(),
            achieved,
        }
    }

    /// Process exit status: 2 for numerical failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        if self.is_numerical() {
            2
        } else {
            1
        }
    }

    /// True for failures of a numerical procedure (quadrature, factorization).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical { .. } | Error::Model(_))
    }
}
