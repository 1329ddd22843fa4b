//! The two limiting cases of the decision model.
//!
//! Holding the prediction fixed while `t_past` grows forces the recovered
//! prior down ("prior crash"); holding the prior fixed forces the prediction
//! up.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::duration_model::{predict, DecisionRule, SampledPrior};
use crate::error::{Error, Result};
use crate::prior_recovery::{recover_prior, RecoveryTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioMode {
    InvariantPrediction,
    InvariantPrior,
}

impl ScenarioMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioMode::InvariantPrediction => "invariant-prediction",
            ScenarioMode::InvariantPrior => "invariant-prior",
        }
    }
}

impl core::str::FromStr for ScenarioMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "invariant-prediction" | "invariant_prediction" => Ok(ScenarioMode::InvariantPrediction),
            "invariant-prior" | "invariant_prior" => Ok(ScenarioMode::InvariantPrior),
            other => Err(Error::InvalidArgument(format!("unknown scenario mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub mode: ScenarioMode,
    /// The held-constant t_predicted, or the held-constant λ.
    pub fixed_value: f64,
    pub t_past_range: Vec<f64>,
    /// Label only, e.g. "minutes" or "days".
    pub unit: String,
    pub decision_rule: DecisionRule,
}

impl ScenarioConfig {
    fn validate(&self, expected: ScenarioMode) -> Result<()> {
        if self.mode != expected {
            return Err(Error::InvalidArgument(format!(
                "scenario mode is {}, expected {}",
                self.mode.as_str(),
                expected.as_str()
            )));
        }
        if self.t_past_range.is_empty() {
            return Err(Error::InvalidArgument("t_past range is empty".into()));
        }
        if self.t_past_range.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "t_past range must be strictly increasing".into(),
            ));
        }
        if self.t_past_range.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidArgument("t_past values must be non-negative".into()));
        }
        if expected == ScenarioMode::InvariantPrediction {
            let last = self.t_past_range[self.t_past_range.len() - 1];
            if last > self.fixed_value {
                return Err(Error::InvalidArgument(format!(
                    "t_past {last} exceeds the invariant prediction {}",
                    self.fixed_value
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub t_past: f64,
    pub t_predicted: f64,
    /// λ of the recovered (or fixed) prior; `None` flags a point with no
    /// feasible prior.
    pub lambda: Option<f64>,
    pub prior_mean: Option<f64>,
    pub prior_median: Option<f64>,
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub mode: ScenarioMode,
    pub unit: String,
    pub points: Vec<TrajectoryPoint>,
    /// First t_past at which the fixed prior could no longer explain the
    /// observation; the trajectory stops there.
    pub truncated_at: Option<f64>,
}

/// Fixed prediction, recovered prior per `t_past`.
pub fn run_invariant_prediction(config: &ScenarioConfig, table: &RecoveryTable) -> Result<Trajectory> {
    config.validate(ScenarioMode::InvariantPrediction)?;
    let fixed = config.fixed_value;
    let points = config
        .t_past_range
        .iter()
        .map(|&t_past| {
            let recovered = match recover_prior(table, t_past, fixed) {
                Ok(r) => Some(r),
                Err(Error::NoCandidate { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(TrajectoryPoint {
                t_past,
                t_predicted: fixed,
                lambda: recovered.as_ref().map(|r| r.lambda),
                prior_mean: recovered.as_ref().map(|r| r.prior_mean),
                prior_median: recovered.as_ref().map(|r| r.prior_median),
                horizon: fixed - t_past,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        mode: ScenarioMode::InvariantPrediction,
        unit: config.unit.clone(),
        points,
        truncated_at: None,
    })
}

/// Fixed prior, model prediction per `t_past` (n = 1).
pub fn run_invariant_prior(config: &ScenarioConfig, prior: &SampledPrior) -> Result<Trajectory> {
    config.validate(ScenarioMode::InvariantPrior)?;
    let mean = prior.mean();
    let median = prior.median();
    let mut points = Vec::with_capacity(config.t_past_range.len());
    let mut truncated_at = None;
    for &t_past in &config.t_past_range {
        let t_predicted = match predict(prior, t_past, 1, config.decision_rule) {
            Ok(p) => p,
            Err(Error::EmptyPosterior { .. }) => {
                truncated_at = Some(t_past);
                break;
            }
            Err(e) => return Err(e),
        };
        points.push(TrajectoryPoint {
            t_past,
            t_predicted,
            lambda: Some(prior.lambda()),
            prior_mean: Some(mean),
            prior_median: Some(median),
            horizon: t_predicted - t_past,
        });
    }
    Ok(Trajectory {
        mode: ScenarioMode::InvariantPrior,
        unit: config.unit.clone(),
        points,
        truncated_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duration_model::sample_poisson_prior;
    use crate::prior_recovery::{build_table, TableParams};
    use alloc::vec;

    fn config(mode: ScenarioMode, fixed: f64, range: Vec<f64>) -> ScenarioConfig {
        ScenarioConfig {
            mode,
            fixed_value: fixed,
            t_past_range: range,
            unit: "minutes".into(),
            decision_rule: DecisionRule::Median,
        }
    }

    #[test]
    fn point_mass_prior_gives_constant_prediction() {
        let prior = SampledPrior::point_mass(50);
        let range: Vec<f64> = (0..=50).map(f64::from).collect();
        let traj = run_invariant_prior(&config(ScenarioMode::InvariantPrior, 50.0, range), &prior)
            .unwrap();
        assert_eq!(traj.points.len(), 51);
        for p in &traj.points {
            assert_eq!(p.t_predicted, 50.0);
            assert_eq!(p.horizon, 50.0 - p.t_past);
        }
        assert!(traj.truncated_at.is_none());
    }

    #[test]
    fn invariant_prior_truncates_past_support() {
        let prior = SampledPrior::from_draws(45.0, 0, &[40, 50]).unwrap();
        let traj = run_invariant_prior(
            &config(ScenarioMode::InvariantPrior, 45.0, vec![10.0, 45.0, 51.0, 60.0]),
            &prior,
        )
        .unwrap();
        assert_eq!(traj.points.len(), 2);
        assert_eq!(traj.truncated_at, Some(51.0));
    }

    #[test]
    fn invariant_prior_is_non_decreasing() {
        let prior = sample_poisson_prior(50.0, 1000, 7).unwrap();
        let range: Vec<f64> = (0..50).map(f64::from).collect();
        let traj =
            run_invariant_prior(&config(ScenarioMode::InvariantPrior, 50.0, range), &prior).unwrap();
        for w in traj.points.windows(2) {
            assert!(w[1].t_predicted >= w[0].t_predicted);
            assert_eq!(w[1].prior_mean, w[0].prior_mean);
        }
    }

    #[test]
    fn boundary_point_has_zero_horizon() {
        let table = build_table(TableParams {
            lambda_min: 20.0,
            lambda_max: 80.0,
            lambda_step: 1.0,
            t_past_grid: (0..=60).map(f64::from).collect(),
            sample_count: 1000,
            seed: 7,
            decision_rule: DecisionRule::Median,
        })
        .unwrap();
        let traj = run_invariant_prediction(
            &config(ScenarioMode::InvariantPrediction, 50.0, vec![50.0]),
            &table,
        )
        .unwrap();
        assert_eq!(traj.points[0].horizon, 0.0);
        assert_eq!(traj.points[0].t_predicted, 50.0);
    }

    #[test]
    fn config_validation() {
        let prior = SampledPrior::point_mass(10);
        assert!(run_invariant_prior(
            &config(ScenarioMode::InvariantPrediction, 10.0, vec![1.0]),
            &prior
        )
        .is_err());
        assert!(run_invariant_prior(
            &config(ScenarioMode::InvariantPrior, 10.0, vec![2.0, 1.0]),
            &prior
        )
        .is_err());
        assert!("sideways".parse::<ScenarioMode>().is_err());
    }
}
