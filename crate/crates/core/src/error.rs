//! Crate-wide error type.

use crate::expr::{EvalError, ParseError};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    /// A precondition on an operation's inputs was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An expression failed to evaluate at a specific sample point.
    #[error("evaluation failed at sample ({context}): {source}")]
    EvalAtSample { context: String, source: EvalError },

    /// A weight expression evaluated to a nonpositive value where
    /// positivity is required.
    #[error("weight {name}(t) must be strictly positive, got {value} at t = {t}")]
    NonpositiveWeight {
        name: &'static str,
        t: f64,
        value: f64,
    },

    /// The peak-location equation has no sign change because the forcing
    /// vanishes along the current iterate.
    #[error("forcing vanishes along the iterate; the peak-location equation has no sign change")]
    DegenerateForcing,
}

pub type Result<T> = std::result::Result<T, Error>;
