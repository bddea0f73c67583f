use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: {what} has length {got}, expected {expected}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("duplicate index {0}")]
    DuplicateIndex(usize),

    #[error("weight sequence must be nonempty")]
    Empty,

    #[error("weight at position {0} is zero")]
    ZeroWeight(usize),

    #[error("total sum is odd and no entry equals 1")]
    ParityUnfixable,

    #[error("{what} exceeds limit ({size} > {limit})")]
    Resource {
        what: &'static str,
        size: u128,
        limit: u128,
    },

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("misuse: {0}")]
    Misuse(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fit failed: {0}")]
    Fit(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
