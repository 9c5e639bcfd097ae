use num_bigint::BigInt;
use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("moduli {0} and {1} are not coprime")]
    NonCoprimeModuli(BigInt, BigInt),

    /// An interval was too wide to decide a floor, a bucket or a digit.
    /// `bits` is the precision that was in use when the decision failed.
    #[error("precision exhausted at {bits} bits: {context}")]
    PrecisionExhausted { context: String, bits: u32 },

    /// The tail coordinate is not a p-adic integer at a prime that has no
    /// explicit coordinate.
    #[error("prime {0} divides the tail denominator but has no explicit coordinate")]
    UntrackedTailPrime(u64),

    #[error("generators are multiplicatively dependent")]
    Dependent,

    #[error("undecidable: {0}")]
    Undecidable(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
