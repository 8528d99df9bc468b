use thiserror::Error;

/// Crate-wide error type. Constructors validate their invariants eagerly, so
/// downstream numeric code can assume well-formed inputs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("zero denominator in ratio evaluation")]
    ZeroDenominator,

    #[error("levels do not refine: {0}")]
    NonRefining(String),

    #[error("product requires {needed} scalars, above the materialization cap {cap}")]
    ProductTooLarge { needed: u128, cap: u128 },

    #[error("depth {0} exceeds the enumeration cap {1}")]
    DepthCap(usize, usize),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
