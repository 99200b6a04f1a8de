use thiserror::Error;

use crate::geometry::ParamViolations;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid deformation parameters: {0}")]
    InvalidParams(ParamViolations),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// `tδ′ ≤ |Im x|`: the deformed integrand has no exponential decay.
    #[error("no decay margin: tδ′ − |Im x| = {margin:.3e} ≤ 0")]
    NoDecayMargin { margin: f64 },

    #[error("non-finite integrand value at {location}")]
    NonFinite { location: String },

    #[error("regularized limit diverges: {0}")]
    Divergence(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status for this error: `1` configuration, `2` domain or
    /// precondition, `3` numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParams(_) | Error::Config(_) | Error::Io(_) => 1,
            Error::Domain(_) | Error::Precondition(_) | Error::NoDecayMargin { .. } | Error::Unsupported(_) => 2,
            Error::NonFinite { .. } | Error::Divergence(_) => 3,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
