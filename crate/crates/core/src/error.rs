use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unsupported dimension {0} (supported: 2..=4)")]
    UnsupportedDimension(usize),
    #[error("empty point set")]
    EmptyInput,
    #[error("linear map is singular")]
    SingularMap,
    #[error("the origin is not contained in the body")]
    OriginNotContained,
    #[error("function is not coercive")]
    NotCoercive,
    #[error("function domain is empty")]
    EmptyDomain,
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("directions do not positively span the space")]
    NotSpanning,
    #[error("invalid valuation constants: {0}")]
    InvalidSpec(&'static str),
    #[error("{0} requires dimension at least {1}")]
    DimensionHypothesis(&'static str, usize),
    #[error("linear program failed: {0}")]
    Lp(&'static str),
}
