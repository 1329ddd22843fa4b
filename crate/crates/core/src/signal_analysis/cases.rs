use alloc::format;
use alloc::vec::Vec;

use chrono::{NaiveDate, TimeDelta};

use crate::error::{Error, Result};

/// Width of the centered rolling average applied to daily cases.
pub const CASE_SMOOTHING_WINDOW: usize = 7;

/// Daily incidence derived from cumulative counts.
///
/// `daily[i]` is `cumulative[i] - cumulative[i - 1]` in the input, so the
/// first input day has no entry here. Downward revisions show up as negative
/// daily counts and are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseCountSeries {
    pub dates: Vec<NaiveDate>,
    pub cumulative: Vec<i64>,
    pub daily: Vec<i64>,
    pub smoothed: Vec<f64>,
}

impl CaseCountSeries {
    /// Keeps the days in `[start, end]`. Smoothing was computed on the full
    /// input, so the retained edges still use out-of-range neighbours.
    pub fn clip(&self, start: NaiveDate, end: NaiveDate) -> CaseCountSeries {
        let keep: Vec<usize> = (0..self.dates.len())
            .filter(|&i| self.dates[i] >= start && self.dates[i] <= end)
            .collect();
        CaseCountSeries {
            dates: keep.iter().map(|&i| self.dates[i]).collect(),
            cumulative: keep.iter().map(|&i| self.cumulative[i]).collect(),
            daily: keep.iter().map(|&i| self.daily[i]).collect(),
            smoothed: keep.iter().map(|&i| self.smoothed[i]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

pub fn transform_cases(dates: &[NaiveDate], cumulative: &[i64]) -> Result<CaseCountSeries> {
    if dates.len() != cumulative.len() {
        return Err(Error::InvalidArgument(format!(
            "{} dates but {} counts",
            dates.len(),
            cumulative.len()
        )));
    }
    if dates.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: dates.len(),
        });
    }
    if let Some(c) = cumulative.iter().find(|c| **c < 0) {
        return Err(Error::InvalidArgument(format!("negative cumulative count {c}")));
    }
    for w in dates.windows(2) {
        let expected = w[0] + TimeDelta::days(1);
        if w[1] != expected {
            return Err(Error::MalformedSeries {
                previous: w[0],
                expected,
                found: w[1],
            });
        }
    }

    let daily: Vec<i64> = cumulative.windows(2).map(|w| w[1] - w[0]).collect();
    let as_real: Vec<f64> = daily.iter().map(|&d| d as f64).collect();
    let smoothed = centered_rolling_mean(&as_real, CASE_SMOOTHING_WINDOW)?;
    Ok(CaseCountSeries {
        dates: dates[1..].to_vec(),
        cumulative: cumulative[1..].to_vec(),
        daily,
        smoothed,
    })
}

/// Centered mean over an odd `window`. Near the ends the window shrinks
/// symmetrically to whatever half-width is available.
pub fn centered_rolling_mean(values: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "centered window must be odd, got {window}"
        )));
    }
    let half = window / 2;
    let n = values.len();
    Ok((0..n)
        .map(|i| {
            let h = half.min(i).min(n - 1 - i);
            let slice = &values[i - h..=i + h];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn days(n: usize) -> Vec<NaiveDate> {
        let start = NaiveDate::from_ymd_opt(2021, 11, 1).unwrap();
        (0..n).map(|i| start + TimeDelta::days(i as i64)).collect()
    }

    #[test]
    fn arithmetic_series() {
        let s = transform_cases(&days(8), &[0, 1, 3, 6, 10, 15, 21, 28]).unwrap();
        assert_eq!(s.daily, vec![1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(s.smoothed[3], 4.0);
        // shrinking window keeps a linear series unchanged
        assert_eq!(s.smoothed, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        assert_eq!(s.dates, days(8)[1..]);
    }

    #[test]
    fn constant_cumulative() {
        let s = transform_cases(&days(10), &[5; 10]).unwrap();
        assert!(s.daily.iter().all(|&d| d == 0));
        assert!(s.smoothed.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn downward_revision_is_kept() {
        let s = transform_cases(&days(4), &[8, 10, 9, 12]).unwrap();
        assert_eq!(s.daily, vec![2, -1, 3]);
    }

    #[test]
    fn gap_is_reported() {
        let mut dates = days(5);
        dates.remove(2);
        let err = transform_cases(&dates, &[1, 2, 3, 4]).unwrap_err();
        assert_eq!(
            err,
            Error::MalformedSeries {
                previous: days(5)[1],
                expected: days(5)[2],
                found: days(5)[3],
            }
        );
    }

    #[test]
    fn clip_keeps_full_window_smoothing() {
        let cumulative: Vec<i64> = (0..30).map(|i| i * i).collect();
        let s = transform_cases(&days(30), &cumulative).unwrap();
        let clipped = s.clip(days(30)[10], days(30)[12]);
        assert_eq!(clipped.len(), 3);
        // daily = 2i - 1 is linear, full 7-day window is exact
        assert_eq!(clipped.smoothed[0], clipped.daily[0] as f64);
    }

    #[test]
    fn even_window_is_rejected() {
        assert!(centered_rolling_mean(&[1.0, 2.0], 4).is_err());
    }
}
