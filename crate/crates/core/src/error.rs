use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("series has no nonzero leading coefficient below its truncation")]
    ZeroLeadingCoefficient,

    /// Exponents are in 1/8 lattice units.
    #[error("coefficient at lattice exponent {exponent} requested but series is truncated at {trunc}")]
    TruncationExceeded { exponent: i64, trunc: i64 },

    #[error("nonzero coefficient at lattice exponent {exponent} is not on the half-integer lattice")]
    ExponentNotHalfInteger { exponent: i64 },

    #[error("nonzero coefficient at lattice exponent {exponent} is not divisible by {factor}")]
    ExponentNotDivisible { exponent: i64, factor: i64 },

    #[error("series is not a polynomial in Z: {0}")]
    NotInRing(String),

    #[error("P_{n} differs between probes m={first} and m={second}")]
    MProbeMismatch { n: u32, first: u32, second: u32 },

    #[error("constant term changed when truncation was doubled from {trunc} ({first} vs {second})")]
    TruncationUnstable { trunc: i64, first: String, second: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
