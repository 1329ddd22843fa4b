//! Subcommand dispatch, artifact writing and run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use eventdur_core::forecast_ingest::{
    aggregate_daily, apply_filters, ground_truth_horizon, DailyAggregate,
};
use eventdur_core::prior_recovery::recover_prior_with;
use eventdur_core::scenario_sim::{
    run_invariant_prediction, run_invariant_prior, ScenarioConfig, ScenarioMode,
};
use eventdur_core::signal_analysis::{
    fit_trend, joint_dynamics, sdar_change_points, transform_cases, TrendFit,
};
use eventdur_core::{sample_poisson_prior, RecoveryTable, TieBreak};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::args::{
    AnalysisArgs, AnalyzeArgs, CaseArgs, IngestArgs, ModeArg, PipelineArgs, RecoverArgs,
    RunConfig, SimulateArgs, TableArgs,
};
use crate::case_file::read_case_file;
use crate::error::{AppError, AppResult};
use crate::forecast_file::read_predictions;
use crate::report::{self, num, opt, Table};
use crate::table_file::{build_table_parallel, read_table, table_to_string};

pub const MANIFEST_NAME: &str = "manifest.json";
const MANIFEST_FORMAT: &str = "eventdur-run-manifest";

/// Named output files, kept in memory until the run succeeds.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: BTreeMap<String, Vec<u8>>,
}

impl Artifacts {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.insert(name.to_owned(), bytes);
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.get(name).map(Vec::as_slice)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub tool_version: String,
    pub config: RunConfig,
    pub artifacts: Vec<ArtifactEntry>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Manifest {
    pub fn new(config: &RunConfig, artifacts: &Artifacts) -> Self {
        Manifest {
            format: MANIFEST_FORMAT.to_owned(),
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            config: config.clone(),
            artifacts: artifacts
                .files
                .iter()
                .map(|(name, bytes)| ArtifactEntry {
                    file: name.clone(),
                    bytes: bytes.len(),
                    sha256: sha256_hex(bytes),
                })
                .collect(),
        }
    }

    pub fn read(path: &Path) -> AppResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        let manifest: Manifest = serde_json::from_str(&text)
            .map_err(|e| AppError::input(e.to_string()).at(path.display().to_string()))?;
        if manifest.format != MANIFEST_FORMAT {
            return Err(AppError::input("not a run manifest").at(path.display().to_string()));
        }
        Ok(manifest)
    }

    /// Files whose recorded hash differs from `artifacts`.
    pub fn mismatches(&self, artifacts: &Artifacts) -> Vec<String> {
        let fresh = Manifest::new(&self.config, artifacts);
        let mut bad: Vec<String> = self
            .artifacts
            .iter()
            .filter(|e| !fresh.artifacts.contains(e))
            .map(|e| e.file.clone())
            .collect();
        bad.extend(
            fresh
                .artifacts
                .iter()
                .filter(|e| !self.artifacts.iter().any(|r| r.file == e.file))
                .map(|e| e.file.clone()),
        );
        bad
    }
}

/// Runs `config` and returns its artifacts without touching the disk.
pub fn execute(config: &RunConfig) -> AppResult<Artifacts> {
    let mut out = Artifacts::default();
    match config {
        RunConfig::BuildTable(a) => {
            let table = build_table_parallel(a.table.params())?;
            out.add("table.json", table_to_string(&table).into_bytes());
        }
        RunConfig::Recover(a) => recover(a, &mut out)?,
        RunConfig::Simulate(a) => simulate(a, &mut out)?,
        RunConfig::Ingest(a) => {
            ingest(a, &mut out)?;
        }
        RunConfig::Analyze(a) => analyze(a, &mut out)?,
        RunConfig::Pipeline(a) => pipeline(a, &mut out)?,
    }
    Ok(out)
}

/// Runs `config`, writes its artifacts and manifest into `dir`.
pub fn run(config: &RunConfig, dir: &Path) -> AppResult<Manifest> {
    let artifacts = execute(config)?;
    let manifest = Manifest::new(config, &artifacts);
    write_all(dir, &artifacts, &manifest)?;
    Ok(manifest)
}

/// Re-runs a manifest's configuration into `dir`. With `verify`, any
/// artifact differing from the recorded hash is an internal error.
pub fn replay(manifest_path: &Path, dir: &Path, verify: bool) -> AppResult<Manifest> {
    let recorded = Manifest::read(manifest_path)?;
    let artifacts = execute(&recorded.config)?;
    if verify {
        let bad = recorded.mismatches(&artifacts);
        if !bad.is_empty() {
            return Err(AppError::internal(format!(
                "replay differs from the manifest in {}",
                bad.join(", ")
            ))
            .at(manifest_path.display().to_string()));
        }
    }
    let manifest = Manifest::new(&recorded.config, &artifacts);
    write_all(dir, &artifacts, &manifest)?;
    Ok(manifest)
}

fn write_all(dir: &Path, artifacts: &Artifacts, manifest: &Manifest) -> AppResult<()> {
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    let write = |name: &str, bytes: &[u8]| {
        let path: PathBuf = dir.join(name);
        fs::write(&path, bytes).map_err(|e| AppError::io(&path, e))
    };
    for (name, bytes) in &artifacts.files {
        write(name, bytes)?;
    }
    write(MANIFEST_NAME, &report::json_pretty(manifest))
}

fn load_or_build(path: &Option<PathBuf>, args: &TableArgs, out: &mut Artifacts) -> AppResult<RecoveryTable> {
    match path {
        Some(p) => read_table(p),
        None => {
            let table = build_table_parallel(args.params())?;
            out.add("table.json", table_to_string(&table).into_bytes());
            Ok(table)
        }
    }
}

fn recover(a: &RecoverArgs, out: &mut Artifacts) -> AppResult<()> {
    let pairs = report::read_pairs(&a.pairs)?;
    let table = load_or_build(&a.table, &a.table_args, out)?;
    let tie: TieBreak = a.tie.into();
    let mut header = vec!["line"];
    header.extend(report::RECOVERED_HEADER);
    let mut t = Table::new(&header);
    for (line, t_past, t_predicted) in pairs {
        let r = recover_prior_with(&table, t_past, t_predicted, tie)
            .map_err(|e| AppError::from(e).at(format!("{}:{line}", a.pairs.display())))?;
        let mut cells = vec![line.to_string()];
        cells.extend(report::recovered_cells(&r));
        t.row(cells);
    }
    out.add("recovered.csv", t.into_bytes());
    Ok(())
}

fn simulate(a: &SimulateArgs, out: &mut Artifacts) -> AppResult<()> {
    let config = ScenarioConfig {
        mode: a.mode.into(),
        fixed_value: a.fixed,
        t_past_range: a.t_past.values(1.0),
        unit: a.unit.clone(),
        decision_rule: a.table_args.rule.into(),
    };
    let trajectory = match a.mode {
        ModeArg::InvariantPrediction => {
            let table = load_or_build(&a.table, &a.table_args, out)?;
            run_invariant_prediction(&config, &table)?
        }
        ModeArg::InvariantPrior => {
            let prior = sample_poisson_prior(a.fixed, a.table_args.samples, a.table_args.seed)?;
            run_invariant_prior(&config, &prior)?
        }
    };
    out.add("trajectory.csv", report::trajectory_csv(&trajectory));
    out.add(
        "trajectory_summary.json",
        report::json_pretty(&serde_json::json!({
            "mode": trajectory.mode.as_str(),
            "unit": trajectory.unit,
            "fixed": a.fixed,
            "points": trajectory.points.len(),
            "truncated_at": trajectory.truncated_at,
        })),
    );
    Ok(())
}

fn ingest(a: &IngestArgs, out: &mut Artifacts) -> AppResult<Vec<DailyAggregate>> {
    let predictions = read_predictions(&a.forecasts, a.t0)?;
    let (kept, filter_report) = apply_filters(predictions, a.t0);
    let aggregates = aggregate_daily(&kept);
    let dates: Vec<NaiveDate> = aggregates.iter().map(|d| d.date).collect();
    let truth = a.peak.map(|p| ground_truth_horizon(&dates, p)).unwrap_or_default();
    out.add("predictions.csv", report::predictions_csv(&kept));
    out.add("filter_report.json", report::filter_report_json(&filter_report));
    out.add("daily_aggregates.csv", report::aggregates_csv(&aggregates, &truth));
    Ok(aggregates)
}

/// Case series, trend and change points; returns the case trend.
fn analyze_cases(cases: &CaseArgs, analysis: &AnalysisArgs, out: &mut Artifacts) -> AppResult<TrendFit> {
    let (dates, totals) = read_case_file(&cases.cases, &cases.date_column, &cases.count_column)?;
    let series = transform_cases(&dates, &totals)
        .map_err(|e| AppError::from(e).at(cases.cases.display().to_string()))?
        .clip(cases.start, cases.end);
    if series.is_empty() {
        return Err(AppError::input(format!(
            "no case data between {} and {}",
            cases.start, cases.end
        ))
        .at(cases.cases.display().to_string()));
    }
    let fit = fit_trend(&series.dates, &series.smoothed, analysis.degree)?;
    let detection = analysis.detection();
    let cp = sdar_change_points(&series.smoothed, analysis.sdar(), detection)?;
    let raw: Vec<f64> = series.daily.iter().map(|&v| v as f64).collect();
    out.add(
        "cases_series.csv",
        report::series_csv(&series.dates, &raw, Some(&series.smoothed), &fit, Some(&cp.scores)),
    );
    out.add(
        "change_points.json",
        report::change_points_json(&series.dates, &cp, detection, &fit),
    );
    Ok(fit)
}

fn analyze_predictions(
    dates: &[NaiveDate],
    values: &[f64],
    case_fit: &TrendFit,
    degree: usize,
    out: &mut Artifacts,
) -> AppResult<()> {
    let fit = fit_trend(dates, values, degree)?;
    out.add("predictions_series.csv", report::series_csv(dates, values, None, &fit, None));
    let joint = joint_dynamics(case_fit, &fit)?;
    out.add("joint_dynamics.csv", report::joint_csv(&joint));
    out.add("joint_summary.json", report::joint_summary_json(&joint));
    Ok(())
}

fn analyze(a: &AnalyzeArgs, out: &mut Artifacts) -> AppResult<()> {
    let case_fit = analyze_cases(&a.cases, &a.analysis, out)?;
    if let Some(path) = &a.aggregates {
        let (dates, values) = report::read_aggregates(path)?;
        analyze_predictions(&dates, &values, &case_fit, a.analysis.degree, out)?;
    }
    Ok(())
}

fn pipeline(a: &PipelineArgs, out: &mut Artifacts) -> AppResult<()> {
    let aggregates = ingest(&a.ingest, out)?;
    if aggregates.is_empty() {
        return Err(AppError::input("no predictions survive filtering")
            .at(a.ingest.forecasts.display().to_string()));
    }
    let table = load_or_build(&a.table, &a.table_args, out)?;
    let tie: TieBreak = a.tie.into();
    let t0 = a.ingest.t0;
    let t_past = |d: NaiveDate| (d - t0).num_days() as f64;

    let mut header = vec!["date", "n", "mean_horizon"];
    header.extend(report::RECOVERED_HEADER);
    let mut recovered = Table::new(&header);
    for agg in &aggregates {
        let r = recover_prior_with(&table, t_past(agg.date), agg.mean_t_predicted, tie)
            .map_err(|e| AppError::from(e).at(format!("daily aggregate {}", agg.date)))?;
        let mut cells = vec![agg.date.to_string(), agg.count.to_string(), num(agg.mean_horizon)];
        cells.extend(report::recovered_cells(&r));
        recovered.row(cells);
    }
    out.add("recovered_priors.csv", recovered.into_bytes());

    out.add("scenarios.csv", scenarios(a, &aggregates, &table, tie)?);

    let case_fit = analyze_cases(&a.cases, &a.analysis, out)?;
    let dates: Vec<NaiveDate> = aggregates.iter().map(|d| d.date).collect();
    let values: Vec<f64> = aggregates.iter().map(|d| d.mean_t_predicted).collect();
    analyze_predictions(&dates, &values, &case_fit, a.analysis.degree, out)
}

/// The two limiting cases anchored at the first aggregate day: the first
/// day's prediction held fixed, and the first day's recovered prior held
/// fixed.
fn scenarios(
    a: &PipelineArgs,
    aggregates: &[DailyAggregate],
    table: &RecoveryTable,
    tie: TieBreak,
) -> AppResult<Vec<u8>> {
    let t0 = a.ingest.t0;
    let t_pasts: Vec<f64> = aggregates.iter().map(|d| (d.date - t0).num_days() as f64).collect();
    let first = &aggregates[0];
    let fixed_prediction = first.mean_t_predicted;

    let invariant_prediction: Vec<Option<f64>> = t_pasts
        .iter()
        .map(|&tp| {
            if tp > fixed_prediction {
                return Ok(None);
            }
            match recover_prior_with(table, tp, fixed_prediction, tie) {
                Ok(r) => Ok(Some(r.prior_median)),
                Err(eventdur_core::Error::NoCandidate { .. }) => Ok(None),
                Err(e) => Err(AppError::from(e)),
            }
        })
        .collect::<AppResult<_>>()?;

    let anchor = recover_prior_with(table, t_pasts[0], fixed_prediction, tie)?;
    let params = table.params();
    let index = ((anchor.lambda - params.lambda_min) / params.lambda_step).round() as usize;
    let prior = sample_poisson_prior(anchor.lambda, params.sample_count, params.row_seed(index))?;
    let trajectory = run_invariant_prior(
        &ScenarioConfig {
            mode: ScenarioMode::InvariantPrior,
            fixed_value: anchor.lambda,
            t_past_range: t_pasts.clone(),
            unit: "days".into(),
            decision_rule: params.decision_rule,
        },
        &prior,
    )?;

    let truth = a
        .ingest
        .peak
        .map(|p| ground_truth_horizon(&aggregates.iter().map(|d| d.date).collect::<Vec<_>>(), p));
    let mut t = Table::new(&[
        "date",
        "t_past",
        "human_t_predicted",
        "human_horizon",
        "ground_truth_horizon",
        "invariant_prediction_prior_median",
        "invariant_prior_t_predicted",
    ]);
    for (i, agg) in aggregates.iter().enumerate() {
        t.row([
            agg.date.to_string(),
            num(t_pasts[i]),
            num(agg.mean_t_predicted),
            num(agg.mean_horizon),
            truth.as_ref().map(|h| h[i].to_string()).unwrap_or_default(),
            opt(invariant_prediction[i]),
            opt(trajectory.points.get(i).map(|p| p.t_predicted)),
        ]);
    }
    Ok(t.into_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::{BuildTableArgs, Span};

    fn small_table() -> RunConfig {
        RunConfig::BuildTable(BuildTableArgs {
            table: TableArgs {
                lambda: Span::new(20.0, 30.0),
                t_past_grid: Span::new(0.0, 40.0),
                samples: 100,
                ..TableArgs::default()
            },
        })
    }

    #[test]
    fn manifest_records_hashes() {
        let artifacts = execute(&small_table()).unwrap();
        let manifest = Manifest::new(&small_table(), &artifacts);
        assert_eq!(manifest.artifacts.len(), 1);
        assert_eq!(manifest.artifacts[0].file, "table.json");
        assert_eq!(manifest.artifacts[0].sha256.len(), 64);
        assert!(manifest.mismatches(&artifacts).is_empty());

        let mut other = Artifacts::default();
        other.add("table.json", b"x".to_vec());
        other.add("extra.csv", Vec::new());
        assert_eq!(manifest.mismatches(&other), vec!["table.json", "extra.csv"]);
    }

    #[test]
    fn sha256_known_value() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
