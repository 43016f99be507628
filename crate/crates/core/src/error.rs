use thiserror::Error;

/// Errors raised by the evaluation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("confusion matrix entry ({row},{col}) = {value} is negative or not finite")]
    InvalidConfusionEntry { row: usize, col: usize, value: f64 },

    #[error("confusion matrix is not normalized: entries sum to {sum}")]
    NotNormalized { sum: f64 },

    #[error("confusion matrix has zero total")]
    EmptyConfusion,

    #[error("utility matrix entry ({row},{col}) = {value} is not finite")]
    InvalidUtilityEntry { row: usize, col: usize, value: f64 },

    #[error("all utilities are equal; the classification problem is trivial")]
    DegenerateUtilities,

    #[error("utility matrix is not normalized (min {min}, max {max})")]
    UtilityNotNormalized { min: f64, max: f64 },

    #[error(
        "utility matrix is infeasible: misclassification is preferred to correct classification"
    )]
    InfeasibleUtility,

    #[error("coordinates ({x}, {y}) lie outside the feasible utility region")]
    InfeasibleCoordinates { x: f64, y: f64 },

    #[error("affine scale must be positive, got {0}")]
    InvalidScale(f64),

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("utility mixture is empty")]
    EmptyMixture,

    #[error("class frequency {0} must lie strictly between 0 and 1")]
    InvalidFrequency(f64),

    #[error("metric `{metric}` is undefined: {reason}")]
    UndefinedMetric { metric: String, reason: String },

    #[error("unknown metric `{name}`; known metrics: {known}")]
    UnknownMetric { name: String, known: String },

    #[error("sampler gave up after {attempts} rejected draws: {what}")]
    SamplerExhausted { attempts: u64, what: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid ROC curve: {0}")]
    InvalidCurve(String),

    #[error("invalid score data: {0}")]
    InvalidScores(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
