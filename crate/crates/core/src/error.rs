use thiserror::Error;

/// Errors raised across the toolkit.
///
/// `Domain` means the inputs are outside the support of a function.
/// `Nonexistence` means the requested quantity is infinite for the given
/// parameters (for example a mean with `sigma >= 1/2`), which callers
/// usually want to treat differently from bad input.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quantity does not exist: {0}")]
    Nonexistence(String),

    #[error("numeric failure: {message}")]
    Numeric {
        message: String,
        /// Last bracket `[lo, hi]` of a failed root search, when there was one.
        bracket: Option<(f64, f64)>,
    },

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("ingestion error: {0}")]
    Ingestion(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric {
            message: msg.into(),
            bracket: None,
        }
    }

    /// True for errors caused by the caller's inputs or configuration rather
    /// than by a numerical or estimation failure.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Config(_) | Error::Ingestion(_) | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
