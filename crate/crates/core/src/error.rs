use std::fmt;

use thiserror::Error;

/// One of the structural requirements an increment distribution must meet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    /// Masses sum to one.
    TotalMass,
    /// Non-unit steps carry exactly `epsilon`.
    NonUnitMass,
    /// Conditional non-unit mass at size `i` is at most `exp(-c i)`.
    TailDecay,
    /// `P(step = i) = P(step = -i)`.
    Symmetry,
    /// `P(step = 0) > 0`.
    Aperiodicity,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::TotalMass => "total mass 1",
            Condition::NonUnitMass => "condition 1 (non-unit mass = epsilon)",
            Condition::TailDecay => "condition 2 (exponential tail)",
            Condition::Symmetry => "condition 3 (symmetry)",
            Condition::Aperiodicity => "condition 4 (positive mass at 0)",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid color {0}; colors are 1..=5")]
    InvalidColor(u8),

    #[error("index {index} outside stored window [{lo}, {hi}]")]
    OutOfWindow { index: i64, lo: i64, hi: i64 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("increment distribution violates {condition}: {detail}")]
    InvalidDistribution { condition: Condition, detail: String },

    #[error("delta = {delta} violates 63*delta < 1")]
    DeltaTooLarge { delta: String },

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("P(S_{t} = {x}) is zero")]
    ZeroDenominator { t: usize, x: i64 },

    #[error("no pattern stops up to horizon {horizon} (n = {n})")]
    NoData { n: usize, horizon: u64 },

    #[error("degenerate stop chain: {0}")]
    DegenerateChain(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
