use alloc::vec;
use alloc::vec::Vec;

use chrono::NaiveDate;

use crate::error::{Error, Result};

/// Step, in rescaled time, of the finite-difference stencils.
const STENCIL_STEP: f64 = 1e-3;
/// Relative size below which a Householder pivot counts as zero.
const RANK_TOLERANCE: f64 = 1e-10;

/// Least-squares polynomial trend over dates.
///
/// Time is rescaled to `u = (date - origin) / span_days` so the fit span is
/// `[0, 1]`; `coefficients[j]` multiplies `u^j`. `d1` and `d2` are per day
/// and per day squared.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendFit {
    pub degree: usize,
    pub coefficients: Vec<f64>,
    pub origin: NaiveDate,
    pub span_days: f64,
    pub dates: Vec<NaiveDate>,
    pub fitted: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl TrendFit {
    fn rescale(&self, date: NaiveDate) -> f64 {
        (date - self.origin).num_days() as f64 / self.span_days
    }

    /// Fitted value at rescaled time `u`.
    pub fn eval_scaled(&self, u: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * u + c)
    }

    pub fn value_at(&self, date: NaiveDate) -> f64 {
        self.eval_scaled(self.rescale(date))
    }

    /// Numerical first and second derivatives (per day) at `date`, from
    /// five-point central stencils on the fitted curve.
    pub fn derivatives_at(&self, date: NaiveDate) -> (f64, f64) {
        let u = self.rescale(date);
        let h = STENCIL_STEP;
        let f = |k: f64| self.eval_scaled(u + k * h);
        let (m2, m1, z, p1, p2) = (f(-2.0), f(-1.0), f(0.0), f(1.0), f(2.0));
        let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
        let d2 = (-m2 + 16.0 * m1 - 30.0 * z + 16.0 * p1 - p2) / (12.0 * h * h);
        (d1 / self.span_days, d2 / (self.span_days * self.span_days))
    }

    /// The span of the fit, as dates.
    pub fn first_date(&self) -> NaiveDate {
        self.origin
    }

    pub fn last_date(&self) -> NaiveDate {
        self.origin + chrono::TimeDelta::days(self.span_days as i64)
    }
}

pub fn fit_trend(dates: &[NaiveDate], values: &[f64], degree: usize) -> Result<TrendFit> {
    if degree == 0 {
        return Err(Error::InvalidArgument("trend degree must be at least 1".into()));
    }
    if dates.len() != values.len() {
        return Err(Error::InvalidArgument(alloc::format!(
            "{} dates but {} values",
            dates.len(),
            values.len()
        )));
    }
    if dates.len() < degree + 1 {
        return Err(Error::InsufficientData {
            needed: degree + 1,
            got: dates.len(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("trend values must be finite".into()));
    }
    let origin = *dates.iter().min().unwrap();
    let last = *dates.iter().max().unwrap();
    let span_days = (last - origin).num_days() as f64;
    if span_days <= 0.0 {
        return Err(Error::RankDeficient { degree });
    }

    let scaled: Vec<f64> = dates
        .iter()
        .map(|&d| (d - origin).num_days() as f64 / span_days)
        .collect();
    let cols = degree + 1;
    // column-major Vandermonde matrix
    let mut design: Vec<Vec<f64>> = (0..cols)
        .map(|j| scaled.iter().map(|&u| libm::pow(u, j as f64)).collect())
        .collect();
    let coefficients = householder_least_squares(&mut design, values.to_vec())
        .ok_or(Error::RankDeficient { degree })?;

    let mut fit = TrendFit {
        degree,
        coefficients,
        origin,
        span_days,
        dates: dates.to_vec(),
        fitted: Vec::new(),
        d1: Vec::new(),
        d2: Vec::new(),
    };
    fit.fitted = dates.iter().map(|&d| fit.value_at(d)).collect();
    let (d1, d2) = dates.iter().map(|&d| fit.derivatives_at(d)).unzip();
    fit.d1 = d1;
    fit.d2 = d2;
    Ok(fit)
}

/// Solves `min |A x - b|` by Householder QR. `columns` holds A column-wise
/// and is overwritten. Returns `None` when A is numerically rank deficient.
fn householder_least_squares(columns: &mut [Vec<f64>], mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let m = rhs.len();
    let n = columns.len();
    let mut diag = vec![0.0; n];
    let scale = columns
        .iter()
        .map(|c| libm::sqrt(c.iter().map(|v| v * v).sum::<f64>()))
        .fold(0.0, f64::max);

    for j in 0..n {
        let norm = libm::sqrt(columns[j][j..].iter().map(|v| v * v).sum::<f64>());
        if norm <= RANK_TOLERANCE * scale {
            return None;
        }
        let alpha = if columns[j][j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = columns[j][j..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        diag[j] = alpha;
        if vnorm2 == 0.0 {
            continue;
        }
        for col in columns.iter_mut().skip(j + 1) {
            let dot: f64 = v.iter().zip(&col[j..]).map(|(a, b)| a * b).sum();
            let f = 2.0 * dot / vnorm2;
            for (c, vi) in col[j..].iter_mut().zip(&v) {
                *c -= f * vi;
            }
        }
        let dot: f64 = v.iter().zip(&rhs[j..]).map(|(a, b)| a * b).sum();
        let f = 2.0 * dot / vnorm2;
        for (r, vi) in rhs[j..].iter_mut().zip(&v) {
            *r -= f * vi;
        }
    }
    debug_assert!(m >= n);

    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for (k, xk) in x.iter().enumerate().skip(i + 1) {
            s -= columns[k][i] * xk;
        }
        x[i] = s / diag[i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeDelta;

    fn days(n: usize) -> Vec<NaiveDate> {
        let start = NaiveDate::from_ymd_opt(2021, 11, 12).unwrap();
        (0..n).map(|i| start + TimeDelta::days(i as i64)).collect()
    }

    #[test]
    fn exact_line_any_degree() {
        let dates = days(40);
        let values: Vec<f64> = (0..40).map(|t| 3.0 - 0.75 * t as f64).collect();
        for degree in 1..=6 {
            let fit = fit_trend(&dates, &values, degree).unwrap();
            let resid = fit
                .fitted
                .iter()
                .zip(&values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(resid < 1e-8, "degree {degree}: residual {resid}");
            for (&d1, &d2) in fit.d1.iter().zip(&fit.d2) {
                assert!((d1 + 0.75).abs() < 1e-6, "degree {degree}: d1 {d1}");
                assert!(d2.abs() < 1e-4, "degree {degree}: d2 {d2}");
            }
        }
    }

    #[test]
    fn quadratic_derivatives() {
        let dates = days(30);
        let values: Vec<f64> = (0..30).map(|t| (t * t) as f64).collect();
        let fit = fit_trend(&dates, &values, 2).unwrap();
        for (t, (&d1, &d2)) in fit.d1.iter().zip(&fit.d2).enumerate() {
            assert!((d1 - 2.0 * t as f64).abs() < 1e-6);
            assert!((d2 - 2.0).abs() < 1e-6);
        }
    }

    #[test]
    fn sparse_dates_are_allowed() {
        let all = days(20);
        let dates: Vec<_> = all.iter().step_by(3).copied().collect();
        let values: Vec<f64> = dates
            .iter()
            .map(|d| (*d - all[0]).num_days() as f64 * 2.0 + 1.0)
            .collect();
        let fit = fit_trend(&dates, &values, 1).unwrap();
        assert!((fit.value_at(all[1]) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn duplicate_dates_are_rank_deficient() {
        let d = days(2);
        let dates = [d[0], d[0], d[1]];
        assert_eq!(
            fit_trend(&dates, &[1.0, 2.0, 3.0], 2).unwrap_err(),
            Error::RankDeficient { degree: 2 }
        );
        assert_eq!(
            fit_trend(&[d[0], d[0]], &[1.0, 2.0], 1).unwrap_err(),
            Error::RankDeficient { degree: 1 }
        );
    }

    #[test]
    fn too_few_points() {
        assert_eq!(
            fit_trend(&days(3), &[1.0, 2.0, 3.0], 3).unwrap_err(),
            Error::InsufficientData { needed: 4, got: 3 }
        );
        assert!(fit_trend(&days(3), &[1.0, 2.0, 3.0], 0).is_err());
    }
}
