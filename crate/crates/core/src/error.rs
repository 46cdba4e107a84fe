use thiserror::Error;

/// Errors produced by the toolkit.
///
/// The variants map onto the failure classes the CLI distinguishes: invalid
/// input (exit code 2) and solver non-convergence (exit code 3).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument or spec field is outside its declared domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter combination the asymptotic formulas do not cover.
    #[error("unsupported combination: {0}")]
    Unsupported(String),

    /// A size limit was exceeded (dense materialization, basis memory).
    #[error("resource limit: {0}")]
    Resource(String),

    /// An iterative method stopped before meeting its tolerance.
    #[error("not converged: {0}")]
    NotConverged(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
