use thiserror::Error;

/// Errors raised across the construction, oracle and learner layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("orthonormality check failed: |<p_{m}, p_{l}> - delta| = {deviation:e} exceeds {tolerance:e}")]
    OrthonormalityFailure {
        m: usize,
        l: usize,
        deviation: f64,
        tolerance: f64,
    },

    #[error("moment {order} deviates: relative error {relative:e} exceeds {tolerance:e}")]
    MomentMatchFailure {
        order: usize,
        relative: f64,
        tolerance: f64,
    },

    #[error("negative weight {weight:e} at atom {location}")]
    NegativeWeight { location: f64, weight: f64 },

    #[error("conditioning removed mass {removed:e}, more than 10x the tail bound {bound:e}")]
    ConditioningMassLoss { removed: f64, bound: f64 },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("bias support [{lo}, {hi}] is not contained in [-1, 1]")]
    BiasOutOfRange { lo: f64, hi: f64 },

    #[error("dimension {d} is below the required {required}")]
    DimensionTooSmall { d: usize, required: usize },

    #[error("weight vector is zero")]
    ZeroWeightVector,

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("channel row {row} is not a probability vector (sum {sum})")]
    RowNotStochastic { row: usize, sum: f64 },

    #[error("exact enumeration of 2^{bits} points exceeds the budget of 2^{budget}")]
    EnumerationBudgetExceeded { bits: usize, budget: usize },

    #[error("query budget of {budget} exhausted")]
    QueryBudgetExceeded { budget: usize },

    #[error("non-adaptive session: query submitted after answers were read")]
    AdaptiveQuery,

    #[error("privacy violation: audited epsilon {audited} exceeds claimed {claimed}")]
    PrivacyViolation { claimed: f64, audited: f64 },

    #[error("privacy budget exceeded for user {user}: requested {requested}, budget {budget}")]
    BudgetExceeded {
        user: usize,
        requested: f64,
        budget: f64,
    },

    #[error("sample {0} accessed more than once")]
    SampleReuse(usize),

    #[error("no progress after {rounds} rounds (queried error {error})")]
    NoProgress { rounds: usize, error: f64 },

    #[error("divergence: loss {loss} exceeds 10x the initial loss {initial}")]
    DivergenceDetected { loss: f64, initial: f64 },

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
