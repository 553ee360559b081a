use thiserror::Error;

/// Errors raised by the p-adic frame library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),

    #[error("zero has no unit part")]
    ZeroUnitPart,

    #[error("not a p-adic integer: {0}")]
    NotPadicInteger(String),

    #[error("not a p-adic unit: {0}")]
    NotUnit(String),

    #[error("invalid rational literal {0:?}")]
    ParseRational(String),

    #[error("dilation parameter a must be nonzero")]
    ZeroDilation,

    #[error("invalid wavelet index: {0}")]
    InvalidWaveletIndex(String),

    #[error("resolution K = {got} is too coarse, need K >= {required}")]
    ResolutionTooCoarse { got: i64, required: i64 },

    #[error("support exponent L = {got} is too small, need L >= {required}")]
    SupportTooSmall { got: i64, required: i64 },

    #[error("lattice mismatch: ({0}) vs ({1})")]
    LatticeMismatch(String, String),

    #[error("test function is empty")]
    EmptyFunction,

    #[error("enumeration depth {got} is too small, need depth >= {required}")]
    DepthTooSmall { got: u32, required: u32 },

    #[error("invalid orbit index: {0}")]
    InvalidOrbitIndex(String),

    #[error("function is not generic at depth {depth}: {witnesses} invariance witnesses outside the predicted stabilizer")]
    NotGeneric { depth: u32, witnesses: usize },

    #[error("coefficient mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
