use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("series lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("{which} series has zero variance")]
    ZeroVariance { which: &'static str },
    #[error("contingency table {axis} {index} sums to zero")]
    ZeroMargin { axis: &'static str, index: usize },
    #[error("contingency table rows have unequal lengths")]
    RaggedTable,
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("ratio at index {index} is outside [0, 1]: {value}")]
    RatioOutOfRange { index: usize, value: f64 },
    #[error("labels contain a single class")]
    SingleClass,
    #[error("need more observations ({n}) than parameters ({params})")]
    Underdetermined { n: usize, params: usize },
    #[error("design matrix is singular")]
    Singular,
    #[error("target {target} is unreachable: {reason}")]
    Unreachable { target: f64, reason: String },
}
