use thiserror::Error;

use crate::fd::StabilityReport;

/// Errors produced by the filtering library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Landmark frequencies are undefined without anti-diffusion (b = 0).
    #[error("no amplification: characteristic frequencies require b > 0")]
    NoAmplification,

    #[error("explicit scheme is unstable ({0})")]
    Unstable(StabilityReport),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("filter `{label}` failed: {source}")]
    Filter {
        label: String,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
