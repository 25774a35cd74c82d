use num_bigint::BigUint;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{a} is not a unit modulo {n}")]
    NotAUnit { a: BigUint, n: BigUint },

    #[error("unsupported case: {0}")]
    UnsupportedCase(String),

    #[error("N = {n} exceeds the enumeration limit of {limit}")]
    ResourceLimit { n: BigUint, limit: u64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
