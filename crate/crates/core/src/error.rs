use thiserror::Error;

use crate::arith::Place;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{0} is not an odd prime")]
    NotOddPrime(i128),

    #[error("zero is not allowed here")]
    ZeroInput,

    /// A profiled field was queried at a place its table does not cover.
    #[error("insufficient profile for field {field} at place {place}")]
    InsufficientProfile { field: String, place: Place },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("search exhausted its bound ({bound}) without a result")]
    SearchExhausted { bound: u64 },

    /// An internal consistency check failed; indicates a bug, not bad input.
    #[error("internal defect: {0}")]
    Defect(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
