use thiserror::Error;

/// Errors surfaced by the library. Property violations are not errors: they
/// are reported through the various `*Report` types.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("zero polynomial is not allowed here")]
    ZeroPolynomial,

    #[error("resource cap exceeded: {what} would reach {requested}, cap is {limit}")]
    ResourceCap {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    #[error("point outside the convergence domain: {0}")]
    Domain(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("exact division failed: {0}")]
    NotDivisible(String),

    #[error("polynomial is reducible over Q")]
    Reducible,

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
