//! Forecast submissions to `(t_past, t_predicted, horizon)` measures.
//!
//! A forecast is a distribution over a bounded prediction window, carried as
//! 101 probabilities at evenly spaced positions `start + i * (end - start) / 100`
//! (both window ends included), or as a mixture of up to five two-piece
//! logistic components that gets discretized onto those positions.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use chrono::{NaiveDate, NaiveDateTime, TimeDelta};

use crate::duration_model::MEDIAN_THRESHOLD;
use crate::error::{Error, Result};

pub const BIN_COUNT: usize = 101;
pub const MAX_COMPONENTS: usize = 5;
const SUM_TOLERANCE: f64 = 1e-6;

/// One slider-defined component. Positions and widths are in window units:
/// 0 is `window_start`, 1 is `window_end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticComponent {
    pub center: f64,
    pub left_width: f64,
    pub right_width: f64,
    pub weight: f64,
}

impl LogisticComponent {
    /// Two-piece logistic density: scale `left_width` below the center,
    /// `right_width` above it, continuous at the center, unit total mass.
    pub fn density(&self, x: f64) -> f64 {
        let scale = if x < self.center {
            self.left_width
        } else {
            self.right_width
        };
        let z = libm::fabs((x - self.center) / scale);
        let e = libm::exp(-z);
        let standard = e / ((1.0 + e) * (1.0 + e));
        2.0 / (self.left_width + self.right_width) * standard
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ForecastDistribution {
    Pmf(Vec<f64>),
    Mixture(Vec<LogisticComponent>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastRecord {
    pub participant_id: String,
    /// UTC.
    pub created_at: NaiveDateTime,
    pub window_start: NaiveDate,
    pub window_end: NaiveDate,
    pub distribution: ForecastDistribution,
}

impl ForecastRecord {
    pub fn validate(&self) -> Result<()> {
        if self.window_end <= self.window_start {
            return Err(Error::InvalidDistribution(format!(
                "window end {} is not after window start {}",
                self.window_end, self.window_start
            )));
        }
        match &self.distribution {
            ForecastDistribution::Pmf(p) => validate_pmf(p),
            ForecastDistribution::Mixture(c) => validate_mixture(c),
        }
    }

    /// The 101-bin pmf, discretizing a mixture if needed.
    pub fn pmf(&self) -> Result<Vec<f64>> {
        self.validate()?;
        match &self.distribution {
            ForecastDistribution::Pmf(p) => Ok(p.clone()),
            ForecastDistribution::Mixture(c) => discretize_mixture(c),
        }
    }
}

pub fn validate_pmf(pmf: &[f64]) -> Result<()> {
    if pmf.len() != BIN_COUNT {
        return Err(Error::InvalidDistribution(format!(
            "pmf has {} entries, expected {BIN_COUNT}",
            pmf.len()
        )));
    }
    if let Some(bad) = pmf.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "pmf entry {bad} is negative or not finite"
        )));
    }
    let total: f64 = pmf.iter().sum();
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidDistribution(format!("pmf sums to {total}, not 1")));
    }
    Ok(())
}

pub fn validate_mixture(components: &[LogisticComponent]) -> Result<()> {
    if components.is_empty() || components.len() > MAX_COMPONENTS {
        return Err(Error::InvalidDistribution(format!(
            "mixture has {} components, expected 1..={MAX_COMPONENTS}",
            components.len()
        )));
    }
    for c in components {
        if !c.center.is_finite() {
            return Err(Error::InvalidDistribution("component center is not finite".into()));
        }
        let widths_ok = c.left_width.is_finite()
            && c.right_width.is_finite()
            && c.left_width > 0.0
            && c.right_width > 0.0;
        if !widths_ok {
            return Err(Error::InvalidDistribution(format!(
                "component widths must be positive, got ({}, {})",
                c.left_width, c.right_width
            )));
        }
        if !c.weight.is_finite() || c.weight < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "component weight {} is negative",
                c.weight
            )));
        }
    }
    let total: f64 = components.iter().map(|c| c.weight).sum();
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidDistribution(format!(
            "mixture weights sum to {total}, not 1"
        )));
    }
    Ok(())
}

/// Position of bin `i` in window units.
pub fn bin_position(i: usize) -> f64 {
    i as f64 / (BIN_COUNT - 1) as f64
}

/// Evaluates the weighted mixture at the 101 bin positions and renormalizes
/// over the window.
pub fn discretize_mixture(components: &[LogisticComponent]) -> Result<Vec<f64>> {
    validate_mixture(components)?;
    let mut pmf: Vec<f64> = (0..BIN_COUNT)
        .map(|i| {
            let x = bin_position(i);
            components.iter().map(|c| c.weight * c.density(x)).sum()
        })
        .collect();
    let total: f64 = pmf.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::DegenerateDistribution);
    }
    for p in &mut pmf {
        *p /= total;
    }
    Ok(pmf)
}

/// Smallest bin whose cumulative mass reaches one half.
pub fn median_bin(pmf: &[f64]) -> usize {
    let mut cum = 0.0;
    for (i, p) in pmf.iter().enumerate() {
        cum += p;
        if cum >= MEDIAN_THRESHOLD {
            return i;
        }
    }
    pmf.len().saturating_sub(1)
}

/// Calendar day containing bin `i`: bins sit `(end - start) / 100` apart, so
/// bin 0 falls on `start` and bin 100 on `end`.
pub fn bin_date(i: usize, window_start: NaiveDate, window_end: NaiveDate) -> NaiveDate {
    let length = (window_end - window_start).num_days();
    let offset = (i as i64 * length).div_euclid((BIN_COUNT - 1) as i64);
    window_start + TimeDelta::days(offset)
}

pub fn median_date(pmf: &[f64], window_start: NaiveDate, window_end: NaiveDate) -> Result<NaiveDate> {
    validate_pmf(pmf)?;
    Ok(bin_date(median_bin(pmf), window_start, window_end))
}

fn days_between(from: NaiveDate, to: NaiveDate) -> i64 {
    (to - from).num_days()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediction {
    pub participant_id: String,
    pub prediction_date: NaiveDate,
    pub predicted_date: NaiveDate,
    pub window_start: NaiveDate,
    pub window_end: NaiveDate,
    pub t_past: i64,
    pub t_predicted: i64,
    pub horizon: i64,
}

impl Prediction {
    pub fn new(
        participant_id: impl Into<String>,
        prediction_date: NaiveDate,
        predicted_date: NaiveDate,
        window_start: NaiveDate,
        window_end: NaiveDate,
        t_0: NaiveDate,
    ) -> Self {
        Prediction {
            participant_id: participant_id.into(),
            prediction_date,
            predicted_date,
            window_start,
            window_end,
            t_past: days_between(t_0, prediction_date),
            t_predicted: days_between(t_0, predicted_date),
            horizon: days_between(prediction_date, predicted_date),
        }
    }

    /// The record's median date measured against `t_0`.
    pub fn from_record(record: &ForecastRecord, t_0: NaiveDate) -> Result<Self> {
        let pmf = record.pmf()?;
        let predicted = bin_date(median_bin(&pmf), record.window_start, record.window_end);
        Ok(Prediction::new(
            record.participant_id.clone(),
            record.created_at.date(),
            predicted,
            record.window_start,
            record.window_end,
            t_0,
        ))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FilterReport {
    pub input_count: usize,
    pub removed_endpoint: usize,
    pub removed_pre_t0: usize,
    pub removed_impossible: usize,
    pub output_count: usize,
    pub participants_in: usize,
    pub participants_out: usize,
}

fn participant_count(predictions: &[Prediction]) -> usize {
    predictions
        .iter()
        .map(|p| p.participant_id.as_str())
        .collect::<BTreeSet<_>>()
        .len()
}

/// Drops, in order: end-point forecasts (median on a window boundary),
/// forecasts made or pointing before `t_0`, and forecasts whose predicted
/// duration is shorter than the elapsed one.
pub fn apply_filters(predictions: Vec<Prediction>, t_0: NaiveDate) -> (Vec<Prediction>, FilterReport) {
    let mut report = FilterReport {
        input_count: predictions.len(),
        participants_in: participant_count(&predictions),
        ..FilterReport::default()
    };

    let kept: Vec<Prediction> = predictions
        .into_iter()
        .filter(|p| {
            let endpoint = p.predicted_date == p.window_start || p.predicted_date == p.window_end;
            if endpoint {
                report.removed_endpoint += 1;
            }
            !endpoint
        })
        .filter(|p| {
            let early = p.prediction_date < t_0 || p.predicted_date < t_0;
            if early {
                report.removed_pre_t0 += 1;
            }
            !early
        })
        .filter(|p| {
            let impossible = p.t_predicted < p.t_past;
            if impossible {
                report.removed_impossible += 1;
            }
            !impossible
        })
        .collect();

    report.output_count = kept.len();
    report.participants_out = participant_count(&kept);
    (kept, report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DailyAggregate {
    pub date: NaiveDate,
    pub mean_t_predicted: f64,
    pub mean_horizon: f64,
    pub count: usize,
}

/// Per-day means, in date order. Days without predictions are absent.
pub fn aggregate_daily(predictions: &[Prediction]) -> Vec<DailyAggregate> {
    let mut days: BTreeMap<NaiveDate, (i64, i64, usize)> = BTreeMap::new();
    for p in predictions {
        let slot = days.entry(p.prediction_date).or_insert((0, 0, 0));
        slot.0 += p.t_predicted;
        slot.1 += p.horizon;
        slot.2 += 1;
    }
    days.into_iter()
        .map(|(date, (t_sum, h_sum, count))| DailyAggregate {
            date,
            mean_t_predicted: t_sum as f64 / count as f64,
            mean_horizon: h_sum as f64 / count as f64,
            count,
        })
        .collect()
}

/// Days from each date until `peak_date`; negative after the peak.
pub fn ground_truth_horizon(dates: &[NaiveDate], peak_date: NaiveDate) -> Vec<i64> {
    dates.iter().map(|&d| days_between(d, peak_date)).collect()
}
