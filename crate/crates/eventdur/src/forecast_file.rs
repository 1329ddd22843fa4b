//! The forecast interchange format: one JSON object per line.
//!
//! ```text
//! {"participant_id":"p01","created_at":"2021-12-05T14:03:00Z",
//!  "window_start":"2021-12-03","window_end":"2022-02-25","pmf":[...101 values...]}
//! {"participant_id":"p02","created_at":"2021-12-06T09:00:00Z",
//!  "window_start":"2021-12-03","window_end":"2022-02-25",
//!  "mixture":[{"center":0.4,"left_width":0.05,"right_width":0.1,"weight":1}]}
//! ```
//!
//! Each record is on a single line; the example is wrapped for width.
//! `created_at` is RFC 3339 and converted to UTC; a timestamp without an
//! offset is taken as UTC.

use std::fs;
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use eventdur_core::forecast_ingest::{
    ForecastDistribution, ForecastRecord, LogisticComponent, Prediction,
};
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{AppError, AppResult};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentLine {
    center: f64,
    left_width: f64,
    right_width: f64,
    weight: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordLine {
    participant_id: String,
    created_at: String,
    window_start: NaiveDate,
    window_end: NaiveDate,
    #[serde(default)]
    pmf: Option<Vec<f64>>,
    #[serde(default)]
    mixture: Option<Vec<ComponentLine>>,
}

fn parse_timestamp(s: &str) -> Result<NaiveDateTime, String> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t.naive_utc());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(t);
        }
    }
    Err(format!("created_at `{s}` is not an RFC 3339 timestamp"))
}

/// Parses one line into a validated record.
pub fn parse_record(line: &str) -> AppResult<ForecastRecord> {
    let raw: RecordLine =
        serde_json::from_str(line).map_err(|e| AppError::input(e.to_string()))?;
    let created_at = parse_timestamp(&raw.created_at).map_err(AppError::input)?;
    let distribution = match (raw.pmf, raw.mixture) {
        (Some(pmf), None) => ForecastDistribution::Pmf(pmf),
        (None, Some(components)) => ForecastDistribution::Mixture(
            components
                .into_iter()
                .map(|c| LogisticComponent {
                    center: c.center,
                    left_width: c.left_width,
                    right_width: c.right_width,
                    weight: c.weight,
                })
                .collect(),
        ),
        _ => {
            return Err(AppError::input(
                "a record needs exactly one of `pmf` and `mixture`",
            ))
        }
    };
    let record = ForecastRecord {
        participant_id: raw.participant_id,
        created_at,
        window_start: raw.window_start,
        window_end: raw.window_end,
        distribution,
    };
    record.validate()?;
    Ok(record)
}

/// Records of `text` with their 1-based line numbers. Blank lines are skipped.
pub fn parse_records(text: &str, source: &str) -> AppResult<Vec<(usize, ForecastRecord)>> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            parse_record(line)
                .map(|r| (i + 1, r))
                .map_err(|e| e.at(format!("{source}:{}", i + 1)))
        })
        .collect()
}

/// Predictions of every record, in file order. Records are processed in
/// parallel; the first failing line is reported.
pub fn records_to_predictions(
    records: &[(usize, ForecastRecord)],
    t_0: NaiveDate,
    source: &str,
) -> AppResult<Vec<Prediction>> {
    records
        .par_iter()
        .map(|(line, record)| {
            Prediction::from_record(record, t_0)
                .map_err(|e| AppError::from(e).at(format!("{source}:{line}")))
        })
        .collect()
}

pub fn read_predictions(path: &Path, t_0: NaiveDate) -> AppResult<Vec<Prediction>> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    let source = path.display().to_string();
    let records = parse_records(&text, &source)?;
    records_to_predictions(&records, t_0, &source)
}
