use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("invalid rational literal {0:?}")]
    Rational(String),
    #[error("invalid scalar literal {0:?} (expected p/q or p/q+r/s*sqrt2)")]
    Scalar(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("interval [{lo}, {hi}) is not inside [0, 1) or is reversed")]
    BadInterval { lo: String, hi: String },
    #[error("requested prefix mass {requested} outside [0, {available}]")]
    PrefixOutOfRange { requested: String, available: String },
    #[error("mass must be positive, got {0}")]
    NonPositiveMass(String),
    #[error("outcome bounds need lo < hi, got [{lo}, {hi}]")]
    BadBounds { lo: String, hi: String },
    #[error("outcome {outcome} outside bounds [{lo}, {hi}]")]
    OutcomeOutOfBounds { outcome: String, lo: String, hi: String },
    #[error("cell {index} has zero measure")]
    EmptyCell { index: usize },
    #[error("cells overlap or do not cover [0, 1) (total measure {0})")]
    NotAPartition(String),
    #[error("random variables use different outcome bounds")]
    BoundsMismatch,
    #[error("distribution masses must be positive and sum to 1")]
    BadDistribution,
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(String),
    #[error("distributions differ at outcome {outcome}: {left} vs {right}")]
    DistributionsDiffer { outcome: String, left: String, right: String },
    #[error("invalid regret function: {0}")]
    InvalidRegretFunction(String),
    #[error("invalid regret functional: {0}")]
    InvalidFunctional(String),
    #[error("case 1 requires {0}")]
    NotCase1(String),
    #[error("refinement cell measure {0} is irrational")]
    IrrationalCell(String),
    #[error("denominator {denominator} is not a multiple of cell measure {measure}")]
    DenominatorMismatch { denominator: String, measure: String },
    #[error("k_min = {k_min} too small: 1/2^k_min must be below the smallest cell measure {min_mass}")]
    KTooSmall { k_min: u32, min_mass: String },
    #[error("k range [{k_min}, {k_max}] is empty")]
    EmptyKRange { k_min: u32, k_max: u32 },
    #[error("not enough full cells carrying outcome {outcome} to flip at k = {k}")]
    InsufficientCells { outcome: String, k: u32 },
    #[error("unsupported certificate schema {0:?}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
