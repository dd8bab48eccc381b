use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module of the crate.
///
/// Capacity errors are kept apart from the rest so that callers (the CLI in
/// particular) can tell "the input is wrong" from "the input is too big".
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u32, right: u32 },

    #[error("invalid modulus {p}: {reason}")]
    InvalidModulus { p: u32, reason: String },

    #[error("capacity exceeded: {what} needs {needed}, limit is {limit}")]
    Capacity {
        what: String,
        needed: u64,
        limit: u64,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("structural error: {0}")]
    Structure(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. })
    }

    pub(crate) fn capacity(what: impl Into<String>, needed: u64, limit: u64) -> Self {
        Error::Capacity {
            what: what.into(),
            needed,
            limit,
        }
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
