use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("zero divisor: element has reduced norm 0 and is not invertible")]
    ZeroDivisor,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported discriminant: {0}")]
    UnsupportedDiscriminant(String),
    #[error("no splitting at ramified prime {0}")]
    RamifiedPrime(u64),
    #[error("class set infinite/unsupported: {0}")]
    Indefinite(String),
    #[error("bad level: {0}")]
    BadLevel(String),
    #[error("not imaginary quadratic: discriminant {0} is not negative")]
    NotImaginaryQuadratic(i64),
    #[error("split place not covered by the theorem: {0}")]
    SplitPlace(String),
    #[error("v must be a single ramified prime with B' unramified at v (p = q = {0})")]
    SamePrime(u64),
    #[error("target/ramification mismatch: {0}")]
    TargetMismatch(String),
    #[error("not admissible: {0}")]
    NotAdmissible(String),
    #[error("wild ramification unsupported (p = 2)")]
    WildRamification,
    #[error("size guard exceeded: {0}")]
    TooLarge(String),
    #[error("mismatched supports: {0}")]
    MismatchedSupport(String),
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
