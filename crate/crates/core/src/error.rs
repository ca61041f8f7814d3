use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation (mismatched
    /// fields, a composite "prime", a non-squarefree radicand, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("division by zero")]
    DivisionByZero,

    /// Hensel lifting hit the configured precision cap before the value
    /// could be certified.
    #[error("precision cap {cap} exceeded while evaluating {what}")]
    PrecisionCap { cap: u32, what: String },

    #[error("parse error at offset {pos}: {message}")]
    Parse { pos: usize, message: String },

    /// A checked precondition of a harness failed (e.g. two quasi-valuations
    /// that do not extend the same valuation).
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A postcondition that the construction guarantees did not hold.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
