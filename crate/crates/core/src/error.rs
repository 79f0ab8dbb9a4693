use thiserror::Error;

/// Errors produced by the solver, the reductions and the file layer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Structurally invalid input (bad block index, empty term, wrong vector length, ...).
    #[error("invalid instance: {0}")]
    Invalid(String),

    /// Two objects that must agree on their shape do not.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A predicted amount of work or memory is over the configured limit.
    #[error("budget exceeded: {what} needs {needed}, limit is {limit}")]
    Budget {
        what: String,
        needed: u128,
        limit: u128,
    },

    /// Malformed document or rational literal.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

pub(crate) fn mismatch(msg: impl Into<String>) -> Error {
    Error::Dimension(msg.into())
}
