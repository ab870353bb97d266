//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("mixed primes: {0} vs {1}")]
    PrimeMismatch(u32, u32),
    #[error("mixed dimensions: {0} vs {1}")]
    DimensionMismatch(u32, u32),
    #[error("digit {digit} out of range for base {prime}")]
    DigitOutOfRange { digit: u32, prime: u32 },
    #[error("not enough known digits to resolve the result")]
    InsufficientPrecision,
    #[error("cannot parse {input:?}: {reason}")]
    Parse { input: String, reason: String },
    #[error("ball centers must be exact")]
    InexactCenter,
    #[error("pieces overlap: {0}")]
    OverlappingPieces(String),
    #[error("series diverges: {0}")]
    Divergent(String),
    #[error("kernel not integrable near the origin for this inner tail")]
    NonIntegrableAtZero,
    #[error("kernel not integrable at infinity for this outer tail")]
    NonIntegrableAtInfinity,
    #[error("unsupported tail: {0}")]
    UnsupportedTail(String),
    #[error("result tail not representable: {0}")]
    UnrepresentableTail(String),
    #[error("input must be nonnegative")]
    NegativeInput,
    #[error("input must not be identically zero")]
    ZeroInput,
    #[error("inadmissible parameters: {0}")]
    InadmissibleParameters(String),
    #[error("exact evaluation unavailable: {0}")]
    ExactUnavailable(String),
    #[error("iteration did not converge: {0}")]
    NonconvergedIteration(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
