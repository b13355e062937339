use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("cannot parse rational from {0:?}")]
    ParseRational(String),
    #[error("invalid power: {0}")]
    InvalidPower(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("matrix is not symmetric")]
    NonSymmetric,
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is singular")]
    Singular,
    #[error("unsupported exponent: {0}")]
    UnsupportedExponent(String),
    #[error("unsupported context: {0}")]
    UnsupportedContext(String),
    #[error("element not in ring: {0}")]
    NotInRing(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid budget: {0}")]
    Budget(String),
    #[error("target has no integral preimage")]
    NoPreimage,
    #[error("norm value is not exact: {0}")]
    Inexact(String),
}

pub type Result<T> = std::result::Result<T, Error>;
