//! Command-line arguments. Every subcommand's arguments double as its
//! resolved configuration: they are written into the run manifest and can be
//! replayed from it.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use eventdur_core::scenario_sim::ScenarioMode;
use eventdur_core::signal_analysis::{Detection, SdarParams};
use eventdur_core::{DecisionRule, TableParams, TieBreak};
use serde::{Deserialize, Serialize};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "EVENTDUR_OUT";
pub const DEFAULT_OUT_DIR: &str = "eventdur-out";

/// An inclusive numeric range written `start..end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Span {
    pub start: f64,
    pub end: f64,
}

impl Span {
    pub fn new(start: f64, end: f64) -> Self {
        Span { start, end }
    }

    /// `start, start + step, ...` up to and including `end`.
    pub fn values(&self, step: f64) -> Vec<f64> {
        let count = ((self.end - self.start) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * step).collect()
    }
}

impl FromStr for Span {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s
            .split_once("..=")
            .or_else(|| s.split_once(".."))
            .ok_or_else(|| format!("expected a range like 20..200, got `{s}`"))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{v}` is not a number in range `{s}`"))
        };
        let (start, end) = (parse(a)?, parse(b)?);
        if !(start.is_finite() && end.is_finite()) || end < start {
            return Err(format!("range `{s}` is empty or not finite"));
        }
        Ok(Span { start, end })
    }
}

impl TryFrom<String> for Span {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Span> for String {
    fn from(s: Span) -> String {
        s.to_string()
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleArg {
    Median,
    Mean,
}

impl From<RuleArg> for DecisionRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Median => DecisionRule::Median,
            RuleArg::Mean => DecisionRule::Mean,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieArg {
    /// Median of the tied λ values.
    Middle,
    /// Smallest tied λ.
    Smallest,
}

impl From<TieArg> for TieBreak {
    fn from(t: TieArg) -> Self {
        match t {
            TieArg::Middle => TieBreak::Middle,
            TieArg::Smallest => TieBreak::Smallest,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    InvariantPrediction,
    InvariantPrior,
}

impl From<ModeArg> for ScenarioMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::InvariantPrediction => ScenarioMode::InvariantPrediction,
            ModeArg::InvariantPrior => ScenarioMode::InvariantPrior,
        }
    }
}

/// Grid and sampling parameters of a recovery table.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct TableArgs {
    /// λ range, inclusive.
    #[arg(long = "lambda", default_value = "20..200")]
    pub lambda: Span,
    /// λ grid step.
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    /// t_past grid, inclusive, step 1.
    #[arg(long = "t-past-grid", default_value = "0..200")]
    pub t_past_grid: Span,
    /// Draws per sampled prior.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = RuleArg::Median)]
    pub rule: RuleArg,
}

impl Default for TableArgs {
    fn default() -> Self {
        TableArgs {
            lambda: Span::new(20.0, 200.0),
            step: 1.0,
            t_past_grid: Span::new(0.0, 200.0),
            samples: 1000,
            seed: 7,
            rule: RuleArg::Median,
        }
    }
}

impl TableArgs {
    pub fn params(&self) -> TableParams {
        TableParams {
            lambda_min: self.lambda.start,
            lambda_max: self.lambda.end,
            lambda_step: self.step,
            t_past_grid: self.t_past_grid.values(1.0),
            sample_count: self.samples,
            seed: self.seed,
            decision_rule: self.rule.into(),
        }
    }
}

/// Where artifacts go. Not part of the recorded configuration.
#[derive(Debug, Clone, Default, PartialEq, Args)]
pub struct OutArgs {
    /// Output directory [default: $EVENTDUR_OUT, else ./eventdur-out].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl OutArgs {
    pub fn resolve(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct BuildTableArgs {
    #[command(flatten)]
    pub table: TableArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RecoverArgs {
    /// Delimited file with `t_past` and `t_predicted` columns.
    #[arg(long)]
    pub pairs: PathBuf,
    /// Prebuilt table; when absent a table is built from the table options.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[command(flatten)]
    pub table_args: TableArgs,
    #[arg(long, value_enum, default_value_t = TieArg::Middle)]
    pub tie: TieArg,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    /// The invariant prediction, or the invariant prior's λ.
    #[arg(long)]
    pub fixed: f64,
    /// Unit label written next to the trajectory.
    #[arg(long, default_value = "minutes")]
    pub unit: String,
    /// t_past sweep, inclusive, step 1.
    #[arg(long = "t-past")]
    pub t_past: Span,
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[command(flatten)]
    pub table_args: TableArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct IngestArgs {
    /// Forecast interchange file (one JSON record per line).
    #[arg(long)]
    pub forecasts: PathBuf,
    /// Start of the wave; t_past and t_predicted are measured from it.
    #[arg(long, default_value = "2021-11-29")]
    pub t0: NaiveDate,
    /// Observed peak, for the ground-truth horizon.
    #[arg(long, default_value = "2022-01-13")]
    pub peak: Option<NaiveDate>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CaseArgs {
    /// Delimited case-count file with a report-date and a cumulative-count column.
    #[arg(long)]
    pub cases: PathBuf,
    #[arg(long, default_value = "Report Date")]
    pub date_column: String,
    #[arg(long, default_value = "Total Cases")]
    pub count_column: String,
    /// First day of the analysis window.
    #[arg(long, default_value = "2021-11-12")]
    pub start: NaiveDate,
    /// Last day of the analysis window.
    #[arg(long, default_value = "2022-01-14")]
    pub end: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct AnalysisArgs {
    /// Polynomial trend degree.
    #[arg(long, default_value_t = 6)]
    pub degree: usize,
    #[arg(long, default_value_t = 0.01)]
    pub discount_rate: f64,
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    /// Trailing smoothing window of the change-point scores, in days.
    #[arg(long, default_value_t = 5)]
    pub smoothing: usize,
    /// Report the k highest-scoring change points.
    #[arg(long, default_value_t = 3, conflicts_with = "threshold")]
    pub top_k: usize,
    /// Report every change point scoring at least this much instead.
    #[arg(long)]
    pub threshold: Option<f64>,
}

impl AnalysisArgs {
    pub fn sdar(&self) -> SdarParams {
        SdarParams {
            discount_rate: self.discount_rate,
            order: self.order,
            smoothing_days: self.smoothing,
        }
    }

    pub fn detection(&self) -> Detection {
        match self.threshold {
            Some(t) => Detection::Threshold(t),
            None => Detection::TopK(self.top_k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub cases: CaseArgs,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    /// Daily aggregates (as written by `ingest`) to pair with the case trend.
    #[arg(long)]
    pub aggregates: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub ingest: IngestArgs,
    #[command(flatten)]
    pub cases: CaseArgs,
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[command(flatten)]
    pub table_args: TableArgs,
    #[arg(long, value_enum, default_value_t = TieArg::Middle)]
    pub tie: TieArg,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum RunConfig {
    /// Sample priors over a λ grid and tabulate model predictions.
    BuildTable(BuildTableArgs),
    /// Recover priors for observed (t_past, t_predicted) pairs.
    Recover(RecoverArgs),
    /// Run an invariant-prediction or invariant-prior scenario.
    Simulate(SimulateArgs),
    /// Turn forecast records into filtered predictions and daily aggregates.
    Ingest(IngestArgs),
    /// Case-count transform, trend fit and change points.
    Analyze(AnalyzeArgs),
    /// Ingest, recover, simulate and analyze in one pass.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    #[command(flatten)]
    Run(RunConfig),
    /// Re-run the configuration recorded in a manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        /// Fail unless every artifact hashes to the recorded value.
        #[arg(long)]
        verify: bool,
    },
}

#[derive(Debug, Parser)]
#[command(name = "eventdur", version, about = "Bayesian event-duration prediction and prior recovery")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub out: OutArgs,
}
