//! Sequential discounting auto-regression (SDAR) and the two-stage
//! change-point score built on it.
//!
//! Stage 1 scores every point by its log-loss under an AR model whose
//! statistics decay with the discount rate; the scores are averaged over a
//! trailing window. Stage 2 runs the same learner on the averaged scores and
//! averages again. Peaks of the result mark changes in the generating process.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use chrono::NaiveDate;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdarParams {
    pub discount_rate: f64,
    pub order: usize,
    pub smoothing_days: usize,
}

impl Default for SdarParams {
    fn default() -> Self {
        SdarParams {
            discount_rate: 0.01,
            order: 3,
            smoothing_days: 5,
        }
    }
}

impl SdarParams {
    fn validate(&self) -> Result<()> {
        if !(self.discount_rate > 0.0 && self.discount_rate < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "discount rate must lie in (0, 1), got {}",
                self.discount_rate
            )));
        }
        if self.order == 0 {
            return Err(Error::InvalidArgument("AR order must be at least 1".into()));
        }
        if self.smoothing_days == 0 {
            return Err(Error::InvalidArgument("smoothing window must be at least 1".into()));
        }
        Ok(())
    }

    /// Leading points of each stage that never produce a score: the
    /// initialization window plus a start-up allowance of `2 * order`.
    pub fn burn_in(&self) -> usize {
        (self.order + 1).max(2 * self.order)
    }

    /// Index of the first point that carries a final score.
    pub fn first_scored(&self) -> usize {
        2 * self.burn_in()
    }

    fn min_len(&self) -> usize {
        (self.order + 2 * self.smoothing_days + 1).max(self.first_scored() + 2)
    }
}

/// Online AR(k) learner with exponentially discounted statistics.
#[derive(Debug, Clone)]
pub struct SdarModel {
    rate: f64,
    mean: f64,
    /// Discounted autocovariances at lags `0..=order`.
    autocov: Vec<f64>,
    coefficients: Vec<f64>,
    variance: f64,
    variance_floor: f64,
    /// Most recent value first.
    history: VecDeque<f64>,
}

impl SdarModel {
    /// Starts from `order + 1` points: their mean and sample variance seed the
    /// model, AR coefficients start at zero.
    pub fn new(rate: f64, order: usize, init: &[f64], variance_floor: f64) -> Result<Self> {
        if init.len() != order + 1 {
            return Err(Error::InsufficientData {
                needed: order + 1,
                got: init.len(),
            });
        }
        let n = init.len() as f64;
        let mean = init.iter().sum::<f64>() / n;
        let var = init.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        let variance = var.max(variance_floor);
        let mut autocov = vec![0.0; order + 1];
        autocov[0] = variance;
        Ok(SdarModel {
            rate,
            mean,
            autocov,
            coefficients: vec![0.0; order],
            variance,
            variance_floor,
            history: init.iter().rev().take(order).copied().collect(),
        })
    }

    fn forecast(&self) -> f64 {
        self.mean
            + self
                .coefficients
                .iter()
                .zip(&self.history)
                .map(|(w, x)| w * (x - self.mean))
                .sum::<f64>()
    }

    /// Scores `x` against the current model, then learns from it.
    ///
    /// The score is the Gaussian log-loss minus the log-loss of an exact
    /// forecast at the variance floor, so it is never negative and is zero
    /// for a perfectly predicted point at the floor.
    pub fn update(&mut self, x: f64) -> f64 {
        let residual = x - self.forecast();
        let var = self.variance.max(self.variance_floor);
        let score =
            0.5 * libm::log(var / self.variance_floor) + 0.5 * residual * residual / var;

        let r = self.rate;
        self.mean = (1.0 - r) * self.mean + r * x;
        let centered = x - self.mean;
        self.autocov[0] = (1.0 - r) * self.autocov[0] + r * centered * centered;
        for lag in 1..self.autocov.len() {
            let past = self.history[lag - 1] - self.mean;
            self.autocov[lag] = (1.0 - r) * self.autocov[lag] + r * centered * past;
        }
        self.coefficients = yule_walker(&self.autocov);

        let refit = x - self.forecast();
        self.variance = ((1.0 - r) * self.variance + r * refit * refit).max(self.variance_floor);

        self.history.pop_back();
        self.history.push_front(x);
        score
    }
}

/// Solves the Toeplitz Yule-Walker system; zero coefficients when singular.
fn yule_walker(autocov: &[f64]) -> Vec<f64> {
    let k = autocov.len() - 1;
    let mut a: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut row: Vec<f64> = (0..k).map(|j| autocov[i.abs_diff(j)]).collect();
            row.push(autocov[i + 1]);
            row
        })
        .collect();
    let scale = autocov[0].abs();
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        if a[pivot][col].abs() <= 1e-12 * scale || scale == 0.0 {
            return vec![0.0; k];
        }
        a.swap(col, pivot);
        for row in col + 1..k {
            let f = a[row][col] / a[col][col];
            for c in col..=k {
                a[row][c] -= f * a[col][c];
            }
        }
    }
    let mut w = vec![0.0; k];
    for i in (0..k).rev() {
        let s = a[i][k] - (i + 1..k).map(|j| a[i][j] * w[j]).sum::<f64>();
        w[i] = s / a[i][i];
    }
    if w.iter().all(|v| v.is_finite()) {
        w
    } else {
        vec![0.0; k]
    }
}

/// Stage-one SDAR scores. The first `burn_in` entries are zero.
pub fn sdar_scores(values: &[f64], discount_rate: f64, order: usize) -> Result<Vec<f64>> {
    let params = SdarParams {
        discount_rate,
        order,
        smoothing_days: 1,
    };
    params.validate()?;
    let burn = params.burn_in();
    if values.len() <= burn {
        return Err(Error::InsufficientData {
            needed: burn + 1,
            got: values.len(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("series contains non-finite values".into()));
    }
    let second_moment = values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64;
    let floor = (1e-8 * second_moment).max(1e-300);
    let mut model = SdarModel::new(discount_rate, order, &values[..=order], floor)?;
    let mut scores = vec![0.0; values.len()];
    for (i, &x) in values.iter().enumerate().skip(order + 1) {
        let s = model.update(x);
        if i >= burn {
            scores[i] = s;
        }
    }
    Ok(scores)
}

/// Mean over the trailing `window` values (fewer at the start).
pub fn trailing_mean(values: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    (0..values.len())
        .map(|i| {
            let slice = &values[(i + 1).saturating_sub(window)..=i];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect()
}

/// How many local maxima to report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Detection {
    TopK(usize),
    Threshold(f64),
}

impl Default for Detection {
    fn default() -> Self {
        Detection::TopK(3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChangePoint {
    pub index: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChangePointReport {
    pub scores: Vec<f64>,
    /// Descending score; ties keep the earlier index first.
    pub detected: Vec<ChangePoint>,
    pub params: SdarParams,
}

impl ChangePointReport {
    pub fn detected_dates(&self, dates: &[NaiveDate]) -> Vec<NaiveDate> {
        self.detected.iter().map(|c| dates[c.index]).collect()
    }
}

pub fn sdar_change_points(
    values: &[f64],
    params: SdarParams,
    detection: Detection,
) -> Result<ChangePointReport> {
    params.validate()?;
    let needed = params.min_len();
    if values.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            got: values.len(),
        });
    }
    let burn = params.burn_in();

    let stage1 = sdar_scores(values, params.discount_rate, params.order)?;
    let smoothed1 = trailing_mean(&stage1[burn..], params.smoothing_days);
    let stage2 = sdar_scores(&smoothed1, params.discount_rate, params.order)?;
    let smoothed2 = trailing_mean(&stage2[burn..], params.smoothing_days);

    let offset = 2 * burn;
    let mut scores = vec![0.0; values.len()];
    scores[offset..].copy_from_slice(&smoothed2);

    let mut peaks: Vec<ChangePoint> = (offset..scores.len())
        .filter(|&i| {
            let s = scores[i];
            let rises = i == offset || s > scores[i - 1];
            let falls = i + 1 == scores.len() || s >= scores[i + 1];
            s > 0.0 && rises && falls
        })
        .map(|index| ChangePoint {
            index,
            score: scores[index],
        })
        .collect();
    peaks.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.index.cmp(&b.index)));
    match detection {
        Detection::TopK(k) => peaks.truncate(k),
        Detection::Threshold(t) => peaks.retain(|p| p.score >= t),
    }

    Ok(ChangePointReport {
        scores,
        detected: peaks,
        params,
    })
}
