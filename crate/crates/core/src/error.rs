use thiserror::Error;

/// Errors shared by every module of the crate.
///
/// `Budget` is never a mathematical verdict: it means a search or enumeration
/// stopped at a configured limit before deciding anything.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("context mismatch: {0}")]
    ContextMismatch(String),
    #[error("not a group: {0}")]
    NotAGroup(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("refuted: {0}")]
    Refuted(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
