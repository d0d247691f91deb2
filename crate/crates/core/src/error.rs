use thiserror::Error;

/// Errors produced by the spectral computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("solver disagreement: {0}")]
    Disagreement(String),

    #[error("incomplete channel enumeration: {0}")]
    Incomplete(String),
}

impl Error {
    /// Stable machine-readable tag for error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Unsupported(_) => "unsupported",
            Error::InvalidProfile(_) => "invalid_profile",
            Error::Numerical(_) => "numerical",
            Error::Disagreement(_) => "disagreement",
            Error::Incomplete(_) => "incomplete",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
