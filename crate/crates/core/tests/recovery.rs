use eventdur_core::prior_recovery::{recover_prior_with, RecoveryTable};
use eventdur_core::scenario_sim::{
    run_invariant_prediction, run_invariant_prior, ScenarioConfig, ScenarioMode,
};
use eventdur_core::{
    build_table, recover_prior, recover_trajectory, sample_poisson_prior, DecisionRule,
    TableParams, TieBreak,
};
use proptest::prelude::*;

fn table(lambda: (f64, f64), t_past_max: u32, seed: u64) -> RecoveryTable {
    build_table(TableParams {
        lambda_min: lambda.0,
        lambda_max: lambda.1,
        lambda_step: 1.0,
        t_past_grid: (0..=t_past_max).map(f64::from).collect(),
        sample_count: 1000,
        seed,
        decision_rule: DecisionRule::Median,
    })
    .unwrap()
}

/// Plain scan: smallest error, then the requested tie rule over all
/// minimizers in grid order.
fn scan(table: &RecoveryTable, column: usize, observed: f64, tie: TieBreak) -> Option<f64> {
    let rows = table.rows();
    let errors: Vec<Option<f64>> = rows
        .iter()
        .map(|r| r.entries[column].map(|e| (e - observed).abs()))
        .collect();
    let best = errors.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
    let hits: Vec<usize> = (0..rows.len()).filter(|&i| errors[i] == Some(best)).collect();
    let pick = match tie {
        TieBreak::Smallest => *hits.first()?,
        TieBreak::Middle => hits[(hits.len().checked_sub(1)?) / 2],
    };
    Some(rows[pick].lambda)
}

#[test]
fn round_trip_on_every_cell() {
    let t = table((20.0, 39.0), 29, 3);
    for (i, row) in t.rows().iter().enumerate() {
        for (j, &tp) in t.t_past_grid().iter().enumerate() {
            let Some(entry) = t.entry(i, j) else { continue };
            for tie in [TieBreak::Middle, TieBreak::Smallest] {
                let r = recover_prior_with(&t, tp, entry, tie).unwrap();
                assert_eq!(r.match_error, 0.0);
                assert_eq!(r.table_t_predicted, entry, "lambda {} t_past {tp}", row.lambda);
            }
        }
    }
}

#[test]
fn far_prediction_recovers_lambda_max() {
    let t = table((20.0, 200.0), 20, 7);
    let max_entry = t.rows().iter().filter_map(|r| r.entries[10]).fold(0.0, f64::max);
    let r = recover_prior(&t, 10.0, 10.0 * max_entry).unwrap();
    assert_eq!(r.lambda, 200.0);
    assert!(r.match_error > 8.0 * max_entry);
}

#[test]
fn determinism() {
    let a = table((20.0, 60.0), 30, 11);
    let b = table((20.0, 60.0), 30, 11);
    assert_eq!(a, b);
    assert_eq!(
        recover_trajectory(&a, &[(3.0, 40.0), (20.0, 33.0)]),
        recover_trajectory(&b, &[(3.0, 40.0), (20.0, 33.0)])
    );
}

#[test]
fn prior_crash_is_non_increasing() {
    let t = table((20.0, 200.0), 60, 7);
    let pairs: Vec<(f64, f64)> = (30..50).map(|tp| (tp as f64, 50.0)).collect();
    let lambdas: Vec<f64> = recover_trajectory(&t, &pairs)
        .into_iter()
        .map(|r| r.unwrap().lambda)
        .collect();
    for w in lambdas.windows(2) {
        assert!(w[1] <= w[0], "{lambdas:?}");
    }
}

#[test]
fn fixed_lambda_column_recovers_near_constant_lambda() {
    let t = table((20.0, 200.0), 100, 5);
    let row = t.rows().iter().position(|r| r.lambda == 80.0).unwrap();
    let pairs: Vec<(f64, f64)> = (0..=70)
        .map(|tp| (tp as f64, t.entry(row, tp).unwrap()))
        .collect();
    for r in recover_trajectory(&t, &pairs) {
        let r = r.unwrap();
        assert_eq!(r.match_error, 0.0);
        // within one grid step
        assert!((r.lambda - 80.0).abs() <= 1.0, "{r:?}");
    }
}

#[test]
fn invariant_prior_and_recovery_are_dual() {
    let t = table((20.0, 200.0), 100, 7);
    let prior = sample_poisson_prior(80.0, 1000, t.params().row_seed(60)).unwrap();
    let traj = run_invariant_prior(
        &ScenarioConfig {
            mode: ScenarioMode::InvariantPrior,
            fixed_value: 80.0,
            t_past_range: (0..=70).map(f64::from).collect(),
            unit: "days".into(),
            decision_rule: DecisionRule::Median,
        },
        &prior,
    )
    .unwrap();
    let pairs: Vec<(f64, f64)> = traj.points.iter().map(|p| (p.t_past, p.t_predicted)).collect();
    for r in recover_trajectory(&t, &pairs) {
        let r = r.unwrap();
        assert_eq!(r.match_error, 0.0);
        assert!((r.lambda - 80.0).abs() <= 1.0, "{r:?}");
    }
}

#[test]
fn invariant_prediction_far_from_target_matches_column_scan() {
    let t = table((20.0, 200.0), 60, 7);
    let traj = run_invariant_prediction(
        &ScenarioConfig {
            mode: ScenarioMode::InvariantPrediction,
            fixed_value: 50.0,
            t_past_range: vec![5.0],
            unit: "minutes".into(),
            decision_rule: DecisionRule::Median,
        },
        &t,
    )
    .unwrap();
    assert_eq!(traj.points[0].lambda, scan(&t, 5, 50.0, TieBreak::Middle));
    assert_eq!(traj.points[0].horizon, 45.0);
}

#[test]
fn invariant_prediction_trajectory_shape() {
    let t = table((20.0, 200.0), 60, 7);
    let traj = run_invariant_prediction(
        &ScenarioConfig {
            mode: ScenarioMode::InvariantPrediction,
            fixed_value: 50.0,
            t_past_range: (30..=49).map(f64::from).collect(),
            unit: "minutes".into(),
            decision_rule: DecisionRule::Median,
        },
        &t,
    )
    .unwrap();
    assert_eq!(traj.points.len(), 20);
    for p in &traj.points {
        assert_eq!(p.t_predicted, 50.0);
        assert_eq!(p.horizon, 50.0 - p.t_past);
    }
    let first = traj.points[0].prior_median.unwrap();
    let last = traj.points[19].prior_median.unwrap();
    assert!(last < first);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn search_agrees_with_linear_scan(column in 0usize..40, observed_offset in 0.0f64..120.0, smallest in any::<bool>()) {
        let t = table((20.0, 80.0), 39, 13);
        let tie = if smallest { TieBreak::Smallest } else { TieBreak::Middle };
        let tp = column as f64;
        let observed = (tp + observed_offset).round();
        let got = recover_prior_with(&t, tp, observed, tie).map(|r| r.lambda).ok();
        prop_assert_eq!(got, scan(&t, column, observed, tie));
    }
}
