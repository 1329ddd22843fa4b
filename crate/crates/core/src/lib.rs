//! Rational (Bayesian) event-duration prediction.
//!
//! The crate is `no_std` + `alloc`. It contains the forward model over sampled
//! Poisson priors, the grid inversion that recovers priors from observed
//! predictions, the two limiting-case scenario simulators, forecast
//! distribution processing, and the case-count signal analysis (rolling
//! averages, polynomial trends, SDAR change-point scores).
//!
//! File formats, the CLI and parallel table builds live in the `eventdur`
//! crate.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod duration_model;
mod error;
pub mod forecast_ingest;
pub mod prior_recovery;
pub mod scenario_sim;
pub mod signal_analysis;

pub use duration_model::{
    posterior, predict, sample_poisson_prior, DecisionRule, LikelihoodSpec, PosteriorResult,
    SampledPrior,
};
pub use error::{Error, Result};
pub use prior_recovery::{
    build_table, recover_prior, recover_trajectory, RecoveredPrior, RecoveryTable, TableParams,
    TieBreak,
};
