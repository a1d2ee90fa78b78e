use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("total mass is zero")]
    ZeroTotalMass,

    #[error("support point {0} has zero mass under the normalized average; trim the measure first")]
    DivisionByZeroMass(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unbalanced input: {0}")]
    UnbalancedInput(String),

    #[error("no simultaneous transport exists")]
    Infeasible,

    #[error("reference measure is not equivalent to the normalized average")]
    ReferenceNotEquivalent,

    #[error("measures are not in the same equivalence class: {0}")]
    NotTwoWay(String),

    #[error("cost is not submodular on the support grid: {0}")]
    NotSubmodular(String),

    #[error("support coordinates missing or of the wrong dimension: {0}")]
    MissingCoords(String),

    #[error("derivative profile is not injective: {0}")]
    NotInjectiveProfile(String),

    #[error("sigma values must be positive")]
    NonPositiveSigma,

    #[error("search exceeded the node budget of {0} without finding a feasible map")]
    BudgetExceeded(u64),

    #[error("instance too large for enumeration: {0}")]
    TooLarge(String),

    #[error("ambiguous slice grouping in floating mode: {0}")]
    AmbiguousGrouping(String),

    #[error("linear program is unbounded")]
    Unbounded,
}
