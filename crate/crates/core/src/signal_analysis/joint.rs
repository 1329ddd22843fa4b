use alloc::vec::Vec;

use chrono::{NaiveDate, TimeDelta};

use super::trend::TrendFit;
use crate::error::{Error, Result};

/// First derivatives of the case and prediction trends on a shared daily grid.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDynamics {
    pub dates: Vec<NaiveDate>,
    pub case_d1: Vec<f64>,
    pub prediction_d1: Vec<f64>,
    /// Fraction of days on which cases rise while predictions fall.
    pub opposition_fraction: f64,
}

/// Evaluates both trends daily over the overlap of their spans.
pub fn joint_dynamics(case_fit: &TrendFit, prediction_fit: &TrendFit) -> Result<JointDynamics> {
    let start = case_fit.first_date().max(prediction_fit.first_date());
    let end = case_fit.last_date().min(prediction_fit.last_date());
    if end < start {
        return Err(Error::EmptyOverlap);
    }
    let days = (end - start).num_days();
    let dates: Vec<NaiveDate> = (0..=days).map(|i| start + TimeDelta::days(i)).collect();
    let case_d1: Vec<f64> = dates.iter().map(|&d| case_fit.derivatives_at(d).0).collect();
    let prediction_d1: Vec<f64> = dates
        .iter()
        .map(|&d| prediction_fit.derivatives_at(d).0)
        .collect();
    let opposed = case_d1
        .iter()
        .zip(&prediction_d1)
        .filter(|(c, p)| **c > 0.0 && **p < 0.0)
        .count();
    Ok(JointDynamics {
        opposition_fraction: opposed as f64 / dates.len() as f64,
        dates,
        case_d1,
        prediction_d1,
    })
}
