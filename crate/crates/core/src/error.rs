//! Crate-wide error type.

use std::fmt;

/// Errors produced by the numerical routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A caller-supplied parameter violates a documented precondition.
    InvalidParameter(String),
    /// A density that must be a probability density is not (carries the
    /// measured mass).
    MassMismatch { expected: f64, actual: f64 },
    /// An iterative solver failed to reach its tolerance within budget.
    Numerical(String),
    /// A problem size exceeds the configured budget.
    BudgetExceeded(String),
    /// Two independent computations of the same quantity disagree beyond
    /// tolerance.
    Inconsistency(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::MassMismatch { expected, actual } => {
                write!(f, "density mass {actual:.17e} differs from required {expected:.17e}")
            }
            Error::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            Error::BudgetExceeded(msg) => write!(f, "problem size exceeds budget: {msg}"),
            Error::Inconsistency(msg) => write!(f, "internal consistency check failed: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
