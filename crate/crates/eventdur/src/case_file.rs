//! Cumulative case-count files: a report-date column and a cumulative-count
//! column, one row per reporting district and day. Rows sharing a date are
//! summed.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;

use crate::error::{csv_error, AppError, AppResult};

/// Accepts `YYYY-MM-DD` and `MM/DD/YYYY`.
pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(s, "%m/%d/%Y"))
        .ok()
}

fn parse_count(s: &str) -> Option<i64> {
    let s = s.trim();
    s.parse::<i64>().ok().or_else(|| {
        let v: f64 = s.parse().ok()?;
        (v.fract() == 0.0 && v.abs() < 9e15).then_some(v as i64)
    })
}

/// Daily totals of `count_column`, in date order.
pub fn read_case_totals<R: std::io::Read>(
    reader: R,
    source: &Path,
    date_column: &str,
    count_column: &str,
) -> AppResult<(Vec<NaiveDate>, Vec<i64>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(source, e))?.clone();
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            AppError::input(format!("missing column `{name}`")).at(source.display().to_string())
        })
    };
    let date_idx = find(date_column)?;
    let count_idx = find(count_column)?;

    let mut totals: BTreeMap<NaiveDate, i64> = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(source, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let at = || format!("{}:{line}", source.display());
        let date_text = record.get(date_idx).unwrap_or("");
        let date = parse_date(date_text)
            .ok_or_else(|| AppError::input(format!("bad date `{date_text}`")).at(at()))?;
        let count_text = record.get(count_idx).unwrap_or("");
        let count = parse_count(count_text)
            .ok_or_else(|| AppError::input(format!("bad count `{count_text}`")).at(at()))?;
        *totals.entry(date).or_insert(0) += count;
    }
    if totals.is_empty() {
        return Err(AppError::input("no case rows").at(source.display().to_string()));
    }
    Ok(totals.into_iter().unzip())
}

pub fn read_case_file(
    path: &Path,
    date_column: &str,
    count_column: &str,
) -> AppResult<(Vec<NaiveDate>, Vec<i64>)> {
    let file = std::fs::File::open(path).map_err(|e| AppError::io(path, e))?;
    read_case_totals(std::io::BufReader::new(file), path, date_column, count_column)
}
