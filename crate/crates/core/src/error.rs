use alloc::string::String;

use chrono::NaiveDate;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Every support value of the prior lies below the elapsed duration.
    #[error("empty posterior: no prior mass at or above t_past = {t_past}")]
    EmptyPosterior { t_past: f64 },

    /// Every table entry in the requested column is infeasible.
    #[error("no feasible prior in the table for t_past = {t_past}")]
    NoCandidate { t_past: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("degenerate distribution: no mass inside the prediction window")]
    DegenerateDistribution,

    #[error("malformed series: expected {expected} after {previous}, found {found}")]
    MalformedSeries {
        previous: NaiveDate,
        expected: NaiveDate,
        found: NaiveDate,
    },

    #[error("rank-deficient design matrix for a degree {degree} fit")]
    RankDeficient { degree: usize },

    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("series do not overlap")]
    EmptyOverlap,
}

pub type Result<T> = core::result::Result<T, Error>;
