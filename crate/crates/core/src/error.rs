use thiserror::Error;

/// Failure modes surfaced by this crate.
///
/// `Domain` means an input violated a documented precondition; the message
/// names the violated constraint. `Numerical` means a computation broke down
/// at runtime (bisection target out of range, singular matrix past the retry
/// budget, and the like).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
