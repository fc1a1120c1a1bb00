use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Parameter conditions that must hold for spectrum-blind recovery.
///
/// Each variant carries a stable machine-readable code used by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// `f_s >= f_p`; otherwise part of the spectrum never reaches baseband.
    SamplingAtLeastMixing,
    /// `f_p >= B`; each band must fall into at most two slices.
    MixingAtLeastBandWidth,
    /// `f_s / f_p` must be an odd integer.
    OddRateRatio,
    /// `m >= 2N` physical-or-virtual channels for blind recovery.
    EnoughChannels,
    /// `M >= M_min`; fewer alternations make columns of `F` coincide.
    EnoughAlternations,
    /// `f_s / f_p < (M_min + 1) / 2` keeps the diagonal of `D` nonzero when `M < L`.
    RateRatioBound,
    /// `2NB < f_NYQ` and the band list is consistent.
    SparseModel,
}

impl Condition {
    pub fn code(self) -> &'static str {
        match self {
            Condition::SamplingAtLeastMixing => "condition.fs_ge_fp",
            Condition::MixingAtLeastBandWidth => "condition.fp_ge_b",
            Condition::OddRateRatio => "condition.odd_ratio",
            Condition::EnoughChannels => "condition.m_ge_2n",
            Condition::EnoughAlternations => "condition.m_alternations_ge_min",
            Condition::RateRatioBound => "condition.ratio_bound",
            Condition::SparseModel => "condition.sparsity",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Condition::SamplingAtLeastMixing => "sampling rate f_s must be at least the mixing rate f_p",
            Condition::MixingAtLeastBandWidth => "mixing rate f_p must be at least the band width B",
            Condition::OddRateRatio => "f_s / f_p must be an odd integer",
            Condition::EnoughChannels => "blind recovery needs at least 2N channels",
            Condition::EnoughAlternations => "sign alternations M must be at least M_min",
            Condition::RateRatioBound => "f_s / f_p must stay below (M_min + 1) / 2 when M < L",
            Condition::SparseModel => "multiband model requires 2NB < f_NYQ",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.code(), self.describe())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("multiband model violation: {0}")]
    ModelViolation(String),

    #[error("necessary condition violated: {condition}: {detail}")]
    Condition { condition: Condition, detail: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dense grid incompatible with the front-end: {0}")]
    GridIncompatible(String),

    #[error("degenerate support: condition estimate {condition:.3e} exceeds {limit:.1e}")]
    DegenerateSupport { condition: f64, limit: f64 },

    #[error("combinatorial budget exceeded: {subsets} subsets requested, limit {limit}")]
    BudgetExceeded { subsets: u128, limit: u128 },

    #[error("carrier draw failed after {attempts} attempts: occupancy too dense")]
    RetryBudget { attempts: usize },

    #[error("{0}")]
    Empty(&'static str),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn condition(condition: Condition, detail: impl Into<String>) -> Self {
        Error::Condition { condition, detail: detail.into() }
    }

    /// Stable identifier for machine consumption.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ModelViolation(_) => "model.violation",
            Error::Condition { condition, .. } => condition.code(),
            Error::InvalidArgument(_) => "argument.invalid",
            Error::GridIncompatible(_) => "grid.incompatible",
            Error::DegenerateSupport { .. } => "ctf.degenerate_support",
            Error::BudgetExceeded { .. } => "ctf.budget_exceeded",
            Error::RetryBudget { .. } => "signal.retry_budget",
            Error::Empty(_) => "input.empty",
            Error::Parse(_) => "input.malformed",
            Error::Io(_) => "io",
            Error::Json(_) => "input.json",
            Error::Csv(_) => "output.csv",
        }
    }
}
