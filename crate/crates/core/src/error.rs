use thiserror::Error;

use crate::hypotheses::Hypothesis;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` = {value} is outside [0, 1]")]
    ParamOutOfRange { name: &'static str, value: String },

    /// One exposure arm has zero probability, so the bias is undefined.
    #[error("degenerate exposure marginal: P(E={arm}) = 0")]
    DegenerateExposure { arm: &'static str },

    #[error("joint distribution invalid: {0}")]
    InvalidJoint(String),

    #[error("conditioning event {event} has zero probability")]
    ZeroProbability { event: String },

    /// A covariate stratum carries exposed mass but no unexposed mass.
    #[error("standardization denominator vanished: P(E=ebar, C={stratum}) = 0 while P(C={stratum} | E=e) > 0")]
    VanishedStratum { stratum: u8 },

    #[error("exact arithmetic requires tolerance 0")]
    InexactTolerance,

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("constraints are unsatisfiable: {0}")]
    Unsatisfiable(String),

    #[error("resampling budget of {budget} draws exhausted while imposing {hypothesis}")]
    BudgetExhausted { hypothesis: Hypothesis, budget: usize },

    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error("empty table")]
    EmptyTable,

    #[error("stratum `{0}` is not assigned by the coarsening map")]
    UnmappedStratum(String),

    #[error("invalid coarsening: {0}")]
    InvalidCoarsening(String),

    #[error("table has {0} strata; binary analysis needs exactly 2")]
    NotBinary(usize),

    #[error("exposure arm {arm} is empty")]
    EmptyArm { arm: &'static str },

    #[error("unexposed group for stratum `{label}` is empty while exposed members exist")]
    EmptyStratumCell { label: String },

    #[error("unknown theorem clause {0}")]
    UnknownClause(String),

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
