//! Self-describing table files and parallel table builds.

use std::fs;
use std::path::Path;

use eventdur_core::prior_recovery::{build_row, TableRow};
use eventdur_core::{DecisionRule, RecoveryTable, TableParams};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

pub const TABLE_FORMAT: &str = "eventdur-recovery-table";
pub const TABLE_VERSION: u32 = 1;

/// Builds every λ row in parallel. Rows are seeded by index, so the result
/// equals the sequential build.
pub fn build_table_parallel(params: TableParams) -> AppResult<RecoveryTable> {
    params.validate()?;
    let count = params.lambda_grid().len();
    let rows = (0..count)
        .into_par_iter()
        .map(|i| build_row(&params, i))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RecoveryTable::from_rows(params, rows)?)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsRecord {
    lambda_min: f64,
    lambda_max: f64,
    lambda_step: f64,
    t_past_grid: Vec<f64>,
    sample_count: usize,
    seed: u64,
    decision_rule: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RowRecord {
    lambda: f64,
    prior_mean: f64,
    prior_median: f64,
    /// Model prediction per t_past grid value; `null` when infeasible.
    t_predicted: Vec<Option<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableRecord {
    format: String,
    version: u32,
    params: ParamsRecord,
    rows: Vec<RowRecord>,
}

fn json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("table values serialize")
}

/// JSON text of `table`, one row per line.
pub fn table_to_string(table: &RecoveryTable) -> String {
    let p = table.params();
    let params = ParamsRecord {
        lambda_min: p.lambda_min,
        lambda_max: p.lambda_max,
        lambda_step: p.lambda_step,
        t_past_grid: p.t_past_grid.clone(),
        sample_count: p.sample_count,
        seed: p.seed,
        decision_rule: p.decision_rule.as_str().to_owned(),
    };
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"format\": {},\n", json(TABLE_FORMAT)));
    out.push_str(&format!("  \"version\": {TABLE_VERSION},\n"));
    out.push_str(&format!("  \"params\": {},\n", json(&params)));
    out.push_str("  \"rows\": [\n");
    let rows = table.rows();
    for (i, row) in rows.iter().enumerate() {
        let record = RowRecord {
            lambda: row.lambda,
            prior_mean: row.prior_mean,
            prior_median: row.prior_median,
            t_predicted: row.entries.clone(),
        };
        let sep = if i + 1 == rows.len() { "" } else { "," };
        out.push_str(&format!("    {}{sep}\n", json(&record)));
    }
    out.push_str("  ]\n}\n");
    out
}

pub fn table_from_str(text: &str) -> AppResult<RecoveryTable> {
    let record: TableRecord =
        serde_json::from_str(text).map_err(|e| AppError::input(format!("table file: {e}")))?;
    if record.format != TABLE_FORMAT {
        return Err(AppError::input(format!(
            "not a recovery table (format `{}`)",
            record.format
        )));
    }
    if record.version != TABLE_VERSION {
        return Err(AppError::input(format!(
            "unsupported table version {}",
            record.version
        )));
    }
    let p = record.params;
    let decision_rule: DecisionRule = p.decision_rule.parse()?;
    let params = TableParams {
        lambda_min: p.lambda_min,
        lambda_max: p.lambda_max,
        lambda_step: p.lambda_step,
        t_past_grid: p.t_past_grid,
        sample_count: p.sample_count,
        seed: p.seed,
        decision_rule,
    };
    let rows = record
        .rows
        .into_iter()
        .map(|r| TableRow {
            lambda: r.lambda,
            prior_mean: r.prior_mean,
            prior_median: r.prior_median,
            entries: r.t_predicted,
        })
        .collect();
    Ok(RecoveryTable::from_rows(params, rows)?)
}

pub fn write_table(path: &Path, table: &RecoveryTable) -> AppResult<()> {
    fs::write(path, table_to_string(table)).map_err(|e| AppError::io(path, e))
}

pub fn read_table(path: &Path) -> AppResult<RecoveryTable> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    table_from_str(&text).map_err(|e| e.at(path.display().to_string()))
}
