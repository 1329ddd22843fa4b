//! Delimited series files and JSON reports.

use std::path::Path;

use chrono::NaiveDate;
use eventdur_core::forecast_ingest::{DailyAggregate, FilterReport, Prediction};
use eventdur_core::scenario_sim::Trajectory;
use eventdur_core::signal_analysis::{ChangePointReport, JointDynamics, TrendFit};
use eventdur_core::RecoveredPrior;
use serde::Serialize;

use crate::case_file::parse_date;
use crate::error::{csv_error, AppError, AppResult};

/// A delimited table built in memory.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Table { writer }
    }

    pub fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(cells).expect("in-memory write");
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.writer.into_inner().expect("in-memory flush")
    }
}

pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn json_pretty<T: Serialize>(value: &T) -> Vec<u8> {
    let mut text = serde_json::to_vec_pretty(value).expect("report values serialize");
    text.push(b'\n');
    text
}

pub fn trajectory_csv(trajectory: &Trajectory) -> Vec<u8> {
    let mut t = Table::new(&["t_past", "t_predicted", "prior_mean", "prior_median", "horizon", "lambda"]);
    for p in &trajectory.points {
        t.row([
            num(p.t_past),
            num(p.t_predicted),
            opt(p.prior_mean),
            opt(p.prior_median),
            num(p.horizon),
            opt(p.lambda),
        ]);
    }
    t.into_bytes()
}

pub fn predictions_csv(predictions: &[Prediction]) -> Vec<u8> {
    let mut t = Table::new(&[
        "participant_id",
        "prediction_date",
        "predicted_date",
        "window_start",
        "window_end",
        "t_past",
        "t_predicted",
        "horizon",
    ]);
    for p in predictions {
        t.row([
            p.participant_id.clone(),
            p.prediction_date.to_string(),
            p.predicted_date.to_string(),
            p.window_start.to_string(),
            p.window_end.to_string(),
            p.t_past.to_string(),
            p.t_predicted.to_string(),
            p.horizon.to_string(),
        ]);
    }
    t.into_bytes()
}

#[derive(Serialize)]
struct FilterReportJson {
    input: usize,
    removed_endpoint: usize,
    removed_pre_t0: usize,
    removed_impossible: usize,
    output: usize,
    participants_in: usize,
    participants_out: usize,
}

pub fn filter_report_json(r: &FilterReport) -> Vec<u8> {
    json_pretty(&FilterReportJson {
        input: r.input_count,
        removed_endpoint: r.removed_endpoint,
        removed_pre_t0: r.removed_pre_t0,
        removed_impossible: r.removed_impossible,
        output: r.output_count,
        participants_in: r.participants_in,
        participants_out: r.participants_out,
    })
}

/// `ground_truth` is one entry per aggregate, or empty.
pub fn aggregates_csv(aggregates: &[DailyAggregate], ground_truth: &[i64]) -> Vec<u8> {
    let mut t = Table::new(&["date", "mean_t_predicted", "mean_horizon", "n", "ground_truth_horizon"]);
    for (i, a) in aggregates.iter().enumerate() {
        t.row([
            a.date.to_string(),
            num(a.mean_t_predicted),
            num(a.mean_horizon),
            a.count.to_string(),
            ground_truth.get(i).map(i64::to_string).unwrap_or_default(),
        ]);
    }
    t.into_bytes()
}

/// Dates and mean predictions back from an aggregates file.
pub fn read_aggregates(path: &Path) -> AppResult<(Vec<NaiveDate>, Vec<f64>)> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            AppError::input(format!("missing column `{name}`")).at(path.display().to_string())
        })
    };
    let (di, vi) = (col("date")?, col("mean_t_predicted")?);
    let mut dates = Vec::new();
    let mut values = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let at = format!("{}:{}", path.display(), record.position().map_or(0, |p| p.line()));
        let date = parse_date(&record[di])
            .ok_or_else(|| AppError::input(format!("bad date `{}`", &record[di])).at(&at))?;
        let value: f64 = record[vi]
            .parse()
            .map_err(|_| AppError::input(format!("bad value `{}`", &record[vi])).at(&at))?;
        dates.push(date);
        values.push(value);
    }
    Ok((dates, values))
}

/// One observed pair per row, with its line number.
pub fn read_pairs(path: &Path) -> AppResult<Vec<(usize, f64, f64)>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h.trim() == name).ok_or_else(|| {
            AppError::input(format!("missing column `{name}`")).at(path.display().to_string())
        })
    };
    let (pi, qi) = (col("t_past")?, col("t_predicted")?);
    let mut pairs = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line()) as usize;
        let field = |i: usize| -> AppResult<f64> {
            record[i]
                .trim()
                .parse()
                .map_err(|_| {
                    AppError::input(format!("bad number `{}`", &record[i]))
                        .at(format!("{}:{line}", path.display()))
                })
        };
        pairs.push((line, field(pi)?, field(qi)?));
    }
    Ok(pairs)
}

pub const RECOVERED_HEADER: [&str; 8] = [
    "t_past",
    "t_predicted",
    "grid_t_past",
    "lambda",
    "prior_mean",
    "prior_median",
    "table_t_predicted",
    "match_error",
];

pub fn recovered_cells(r: &RecoveredPrior) -> [String; 8] {
    [
        num(r.observed_t_past),
        num(r.observed_t_predicted),
        num(r.grid_t_past),
        num(r.lambda),
        num(r.prior_mean),
        num(r.prior_median),
        num(r.table_t_predicted),
        num(r.match_error),
    ]
}

/// Per-day series: raw values, their smoothing, the trend and its
/// derivatives, and the change-point score. Missing columns stay empty.
pub fn series_csv(
    dates: &[NaiveDate],
    raw: &[f64],
    smoothed: Option<&[f64]>,
    fit: &TrendFit,
    scores: Option<&[f64]>,
) -> Vec<u8> {
    let mut t = Table::new(&["date", "raw", "smoothed", "fitted", "d1", "d2", "cp_score"]);
    for (i, date) in dates.iter().enumerate() {
        t.row([
            date.to_string(),
            num(raw[i]),
            opt(smoothed.map(|s| s[i])),
            num(fit.fitted[i]),
            num(fit.d1[i]),
            num(fit.d2[i]),
            opt(scores.map(|s| s[i])),
        ]);
    }
    t.into_bytes()
}

#[derive(Serialize)]
struct ChangePointJson {
    rank: usize,
    date: NaiveDate,
    index: usize,
    score: f64,
}

#[derive(Serialize)]
struct SdarJson {
    discount_rate: f64,
    order: usize,
    smoothing_days: usize,
}

#[derive(Serialize)]
struct ChangePointSummary {
    series: &'static str,
    start: NaiveDate,
    end: NaiveDate,
    params: SdarJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    top_k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
    /// Day on which the fitted case trend rises fastest.
    fastest_growth_date: NaiveDate,
    change_points: Vec<ChangePointJson>,
}

pub fn change_points_json(
    dates: &[NaiveDate],
    report: &ChangePointReport,
    detection: eventdur_core::signal_analysis::Detection,
    fit: &TrendFit,
) -> Vec<u8> {
    use eventdur_core::signal_analysis::Detection;
    let fastest = fit
        .d1
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > fit.d1[best] { i } else { best });
    let (top_k, threshold) = match detection {
        Detection::TopK(k) => (Some(k), None),
        Detection::Threshold(t) => (None, Some(t)),
    };
    json_pretty(&ChangePointSummary {
        series: "cases",
        start: dates[0],
        end: dates[dates.len() - 1],
        params: SdarJson {
            discount_rate: report.params.discount_rate,
            order: report.params.order,
            smoothing_days: report.params.smoothing_days,
        },
        top_k,
        threshold,
        fastest_growth_date: fit.dates[fastest],
        change_points: report
            .detected
            .iter()
            .enumerate()
            .map(|(rank, cp)| ChangePointJson {
                rank: rank + 1,
                date: dates[cp.index],
                index: cp.index,
                score: cp.score,
            })
            .collect(),
    })
}

pub fn joint_csv(joint: &JointDynamics) -> Vec<u8> {
    let mut t = Table::new(&["date", "case_d1", "prediction_d1", "opposed"]);
    for i in 0..joint.dates.len() {
        let opposed = joint.case_d1[i] > 0.0 && joint.prediction_d1[i] < 0.0;
        t.row([
            joint.dates[i].to_string(),
            num(joint.case_d1[i]),
            num(joint.prediction_d1[i]),
            u8::from(opposed).to_string(),
        ]);
    }
    t.into_bytes()
}

#[derive(Serialize)]
struct JointSummary {
    start: NaiveDate,
    end: NaiveDate,
    days: usize,
    opposition_fraction: f64,
}

pub fn joint_summary_json(joint: &JointDynamics) -> Vec<u8> {
    json_pretty(&JointSummary {
        start: joint.dates[0],
        end: joint.dates[joint.dates.len() - 1],
        days: joint.dates.len(),
        opposition_fraction: joint.opposition_fraction,
    })
}
