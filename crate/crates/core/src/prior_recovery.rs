//! The (λ, t_past) → t_predicted lookup table and its inversion.
//!
//! Each λ row is built from its own sampled Poisson prior; a query finds the
//! row whose entry in the (snapped) t_past column is closest to the observed
//! prediction.

use alloc::format;
use alloc::vec::Vec;

use crate::duration_model::{predict, sample_poisson_prior, DecisionRule};
use crate::error::{Error, Result};

/// Which λ to report when several rows match equally well.
///
/// With integer-valued median predictions a whole run of λ values usually
/// maps onto the same entry. `Middle` reports the median of that run,
/// `Smallest` the first one.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TieBreak {
    #[default]
    Middle,
    Smallest,
}

/// Everything needed to rebuild a table bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct TableParams {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_step: f64,
    pub t_past_grid: Vec<f64>,
    pub sample_count: usize,
    pub seed: u64,
    pub decision_rule: DecisionRule,
}

impl TableParams {
    pub fn validate(&self) -> Result<()> {
        let finite = self.lambda_min.is_finite()
            && self.lambda_max.is_finite()
            && self.lambda_step.is_finite();
        if !finite || self.lambda_min <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "lambda_min must be positive, got {}",
                self.lambda_min
            )));
        }
        if self.lambda_max < self.lambda_min {
            return Err(Error::InvalidArgument(format!(
                "lambda_max {} is below lambda_min {}",
                self.lambda_max, self.lambda_min
            )));
        }
        if self.lambda_step <= 0.0 {
            return Err(Error::InvalidArgument("lambda_step must be positive".into()));
        }
        if self.sample_count == 0 {
            return Err(Error::InvalidArgument("sample_count must be at least 1".into()));
        }
        if self.t_past_grid.is_empty() {
            return Err(Error::InvalidArgument("t_past grid is empty".into()));
        }
        if self.t_past_grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidArgument(
                "t_past grid values must be finite and non-negative".into(),
            ));
        }
        if self.t_past_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "t_past grid must be strictly increasing".into(),
            ));
        }
        Ok(())
    }

    /// The arithmetic λ grid `lambda_min, lambda_min + step, ... <= lambda_max`.
    pub fn lambda_grid(&self) -> Vec<f64> {
        let span = (self.lambda_max - self.lambda_min) / self.lambda_step;
        let count = libm::floor(span + 1e-9) as usize + 1;
        (0..count)
            .map(|i| self.lambda_min + i as f64 * self.lambda_step)
            .collect()
    }

    /// Seed of the prior sampled for row `index`.
    pub fn row_seed(&self, index: usize) -> u64 {
        self.seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

/// One λ row of the table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub lambda: f64,
    pub prior_mean: f64,
    pub prior_median: f64,
    /// `None` where t_past exceeds every sampled duration.
    pub entries: Vec<Option<f64>>,
}

/// Computes row `index` of the table described by `params`.
pub fn build_row(params: &TableParams, index: usize) -> Result<TableRow> {
    let lambda = params.lambda_min + index as f64 * params.lambda_step;
    let prior = sample_poisson_prior(lambda, params.sample_count, params.row_seed(index))?;
    let entries = params
        .t_past_grid
        .iter()
        .map(|&t_past| match predict(&prior, t_past, 1, params.decision_rule) {
            Ok(p) => Ok(Some(p)),
            Err(Error::EmptyPosterior { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TableRow {
        lambda,
        prior_mean: prior.mean(),
        prior_median: prior.median(),
        entries,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryTable {
    params: TableParams,
    rows: Vec<TableRow>,
}

impl RecoveryTable {
    /// Assembles a table from rows computed elsewhere (e.g. in parallel or
    /// read back from disk), checking shape and the floor invariant.
    pub fn from_rows(params: TableParams, rows: Vec<TableRow>) -> Result<Self> {
        params.validate()?;
        let grid = params.lambda_grid();
        if rows.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "table has {} rows but the lambda grid has {}",
                rows.len(),
                grid.len()
            )));
        }
        for row in &rows {
            if row.entries.len() != params.t_past_grid.len() {
                return Err(Error::InvalidArgument(format!(
                    "row lambda={} has {} entries, expected {}",
                    row.lambda,
                    row.entries.len(),
                    params.t_past_grid.len()
                )));
            }
            for (entry, &t_past) in row.entries.iter().zip(&params.t_past_grid) {
                if let Some(v) = *entry {
                    if !v.is_finite() || v < t_past {
                        return Err(Error::InvalidArgument(format!(
                            "entry {v} at lambda={}, t_past={t_past} violates the floor",
                            row.lambda
                        )));
                    }
                }
            }
        }
        Ok(RecoveryTable { params, rows })
    }

    pub fn params(&self) -> &TableParams {
        &self.params
    }

    pub fn rows(&self) -> &[TableRow] {
        &self.rows
    }

    pub fn lambda_grid(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.lambda)
    }

    pub fn t_past_grid(&self) -> &[f64] {
        &self.params.t_past_grid
    }

    pub fn entry(&self, lambda_index: usize, t_past_index: usize) -> Option<f64> {
        self.rows[lambda_index].entries[t_past_index]
    }

    /// Index of the grid column nearest `t_past`; halfway cases go to the
    /// lower column. Errors outside the grid's range.
    pub fn snap_t_past(&self, t_past: f64) -> Result<usize> {
        let grid = &self.params.t_past_grid;
        let (lo, hi) = (grid[0], grid[grid.len() - 1]);
        if !(t_past >= lo && t_past <= hi) {
            return Err(Error::InvalidArgument(format!(
                "t_past {t_past} is outside the table coverage [{lo}, {hi}]"
            )));
        }
        let upper = grid.partition_point(|&g| g < t_past);
        if upper == 0 {
            return Ok(0);
        }
        if upper == grid.len() {
            return Ok(grid.len() - 1);
        }
        let below = t_past - grid[upper - 1];
        let above = grid[upper] - t_past;
        Ok(if above < below { upper } else { upper - 1 })
    }
}

/// Builds every row sequentially.
pub fn build_table(params: TableParams) -> Result<RecoveryTable> {
    params.validate()?;
    let rows = (0..params.lambda_grid().len())
        .map(|i| build_row(&params, i))
        .collect::<Result<Vec<_>>>()?;
    RecoveryTable::from_rows(params, rows)
}

/// The prior that best explains an observed `(t_past, t_predicted)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredPrior {
    pub lambda: f64,
    pub prior_mean: f64,
    pub prior_median: f64,
    /// Table entry of the chosen row.
    pub table_t_predicted: f64,
    pub match_error: f64,
    pub observed_t_past: f64,
    /// Grid column actually used after snapping.
    pub grid_t_past: f64,
    pub observed_t_predicted: f64,
}

pub fn recover_prior(
    table: &RecoveryTable,
    t_past: f64,
    observed_t_predicted: f64,
) -> Result<RecoveredPrior> {
    recover_prior_with(table, t_past, observed_t_predicted, TieBreak::default())
}

pub fn recover_prior_with(
    table: &RecoveryTable,
    t_past: f64,
    observed_t_predicted: f64,
    tie_break: TieBreak,
) -> Result<RecoveredPrior> {
    if !observed_t_predicted.is_finite() || observed_t_predicted < t_past {
        return Err(Error::InvalidArgument(format!(
            "observed t_predicted {observed_t_predicted} is below t_past {t_past}"
        )));
    }
    let column = table.snap_t_past(t_past)?;

    let mut best = f64::INFINITY;
    let mut tied: Vec<usize> = Vec::new();
    for (i, row) in table.rows.iter().enumerate() {
        let Some(entry) = row.entries[column] else {
            continue;
        };
        let err = libm::fabs(entry - observed_t_predicted);
        if err < best {
            best = err;
            tied.clear();
            tied.push(i);
        } else if err == best {
            tied.push(i);
        }
    }
    if tied.is_empty() {
        return Err(Error::NoCandidate { t_past });
    }
    let chosen = match tie_break {
        TieBreak::Smallest => tied[0],
        TieBreak::Middle => tied[(tied.len() - 1) / 2],
    };
    let row = &table.rows[chosen];
    Ok(RecoveredPrior {
        lambda: row.lambda,
        prior_mean: row.prior_mean,
        prior_median: row.prior_median,
        table_t_predicted: row.entries[column].expect("chosen row is feasible"),
        match_error: best,
        observed_t_past: t_past,
        grid_t_past: table.params.t_past_grid[column],
        observed_t_predicted,
    })
}

/// Independent per-prediction recovery; failures stay in place.
pub fn recover_trajectory(
    table: &RecoveryTable,
    predictions: &[(f64, f64)],
) -> Vec<Result<RecoveredPrior>> {
    predictions
        .iter()
        .map(|&(t_past, t_predicted)| recover_prior(table, t_past, t_predicted))
        .collect()
}
