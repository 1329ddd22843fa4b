use chrono::{NaiveDate, TimeDelta};
use eventdur_core::forecast_ingest::{
    apply_filters, bin_date, discretize_mixture, median_bin, median_date, LogisticComponent,
    Prediction, BIN_COUNT,
};
use proptest::prelude::*;

fn d(y: i32, m: u32, day: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, day).unwrap()
}

fn logistic_cdf(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Closed-form CDF of one two-piece logistic component.
fn component_cdf(c: &LogisticComponent, x: f64) -> f64 {
    let total = c.left_width + c.right_width;
    if x < c.center {
        2.0 * c.left_width / total * logistic_cdf((x - c.center) / c.left_width)
    } else {
        c.left_width / total
            + 2.0 * c.right_width / total * (logistic_cdf((x - c.center) / c.right_width) - 0.5)
    }
}

fn mixture_window_median(components: &[LogisticComponent]) -> f64 {
    let cdf = |x: f64| components.iter().map(|c| c.weight * component_cdf(c, x)).sum::<f64>();
    let (lo_mass, hi_mass) = (cdf(0.0), cdf(1.0));
    let target = lo_mass + 0.5 * (hi_mass - lo_mass);
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn bimodal() -> Vec<LogisticComponent> {
    [0.2, 0.8]
        .iter()
        .map(|&center| LogisticComponent {
            center,
            left_width: 0.05,
            right_width: 0.05,
            weight: 0.5,
        })
        .collect()
}

#[test]
fn bimodal_median_sits_between_modes() {
    let comps = bimodal();
    let x = mixture_window_median(&comps);
    assert!((x - 0.5).abs() < 1e-9);
    let pmf = discretize_mixture(&comps).unwrap();
    let bin = median_bin(&pmf) as i64;
    assert!((bin - 50).abs() <= 1, "median bin {bin}");
    assert!(pmf[20] > 10.0 * pmf[50] && pmf[80] > 10.0 * pmf[50]);
}

#[test]
fn asymmetric_median_agrees_with_closed_form() {
    let comps = [
        LogisticComponent { center: 0.35, left_width: 0.03, right_width: 0.12, weight: 0.7 },
        LogisticComponent { center: 0.6, left_width: 0.08, right_width: 0.02, weight: 0.3 },
    ];
    let x = mixture_window_median(&comps);
    let pmf = discretize_mixture(&comps).unwrap();
    let bin = median_bin(&pmf) as f64;
    assert!((bin - x * 100.0).abs() <= 1.0, "bin {bin} vs continuous {}", x * 100.0);
}

#[test]
fn median_of_jan_2_is_34_days() {
    let (start, end) = (d(2021, 12, 3), d(2022, 2, 25));
    let t0 = d(2021, 11, 29);
    // first bin landing on 2022-01-02
    let bin = (0..BIN_COUNT).find(|&i| bin_date(i, start, end) == d(2022, 1, 2)).unwrap();
    let mut pmf = vec![0.0; BIN_COUNT];
    pmf[bin] = 1.0;
    let date = median_date(&pmf, start, end).unwrap();
    let p = Prediction::new("p", d(2021, 12, 20), date, start, end, t0);
    assert_eq!(p.t_predicted, 34);
}

/// Ten hand-labelled predictions:
/// 0-4 valid, 5 left end-point, 6 right end-point, 7-8 before t_0,
/// 9 predicted date before its own prediction date.
#[test]
fn labelled_fixture_counts() {
    let (s, e) = (d(2021, 12, 3), d(2022, 2, 25));
    let t0 = d(2021, 11, 29);
    let mk = |id: &str, made: NaiveDate, pred: NaiveDate| Prediction::new(id, made, pred, s, e, t0);
    let preds = vec![
        mk("a", d(2021, 12, 5), d(2022, 1, 10)),
        mk("a", d(2021, 12, 9), d(2022, 1, 12)),
        mk("b", d(2021, 12, 6), d(2022, 1, 2)),
        mk("c", d(2021, 12, 20), d(2022, 1, 20)),
        mk("d", d(2021, 12, 21), d(2021, 12, 30)),
        mk("e", d(2021, 12, 4), s),
        mk("e", d(2021, 12, 4), e),
        mk("f", d(2021, 11, 20), d(2022, 1, 5)),
        mk("g", d(2021, 12, 7), d(2021, 11, 25)),
        mk("h", d(2021, 12, 22), d(2021, 12, 15)),
    ];
    let (kept, report) = apply_filters(preds, t0);
    assert_eq!(
        (report.input_count, report.removed_endpoint, report.removed_pre_t0, report.removed_impossible, report.output_count),
        (10, 2, 2, 1, 5)
    );
    assert_eq!((report.participants_in, report.participants_out), (8, 4));
    for p in &kept {
        assert_eq!(p.horizon, p.t_predicted - p.t_past);
        assert!(p.t_past >= 0 && p.t_predicted >= p.t_past);
    }
}

fn pmf_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, BIN_COUNT).prop_filter_map("non-zero", |raw| {
        let total: f64 = raw.iter().sum();
        (total > 0.0).then(|| raw.iter().map(|v| v / total).collect())
    })
}

proptest! {
    #[test]
    fn shifting_right_never_moves_median_back(pmf in pmf_strategy()) {
        let (s, e) = (d(2021, 11, 12), d(2022, 2, 4));
        // shift right by one bin; the last bin absorbs the overflow
        let mut shifted = vec![0.0; BIN_COUNT];
        shifted[1..].copy_from_slice(&pmf[..BIN_COUNT - 1]);
        shifted[BIN_COUNT - 1] += pmf[BIN_COUNT - 1];
        let before = median_date(&pmf, s, e).unwrap();
        let after = median_date(&shifted, s, e).unwrap();
        let b0 = median_bin(&pmf);
        prop_assert!(after >= before);
        prop_assert!(after <= bin_date((b0 + 1).min(BIN_COUNT - 1), s, e));
    }

    #[test]
    fn discretized_mass_is_one(
        centers in prop::collection::vec(-0.2f64..1.2, 1..=5),
        widths in prop::collection::vec((0.01f64..0.5, 0.01f64..0.5), 5),
        raw_weights in prop::collection::vec(0.01f64..1.0, 5),
    ) {
        let k = centers.len();
        let total: f64 = raw_weights[..k].iter().sum();
        let comps: Vec<_> = (0..k).map(|i| LogisticComponent {
            center: centers[i],
            left_width: widths[i].0,
            right_width: widths[i].1,
            weight: raw_weights[i] / total,
        }).collect();
        let pmf = discretize_mixture(&comps).unwrap();
        prop_assert_eq!(pmf.len(), BIN_COUNT);
        prop_assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn filters_conserve_counts(days in prop::collection::vec((0i64..40, -20i64..90), 0..60)) {
        let (s, e) = (d(2021, 11, 12), d(2022, 2, 4));
        let t0 = d(2021, 11, 29);
        let preds: Vec<Prediction> = days.iter().enumerate().map(|(i, &(made, ahead))| {
            let made = s + TimeDelta::days(made);
            Prediction::new(format!("p{}", i % 7), made, made + TimeDelta::days(ahead), s, e, t0)
        }).collect();
        let (kept, r) = apply_filters(preds, t0);
        prop_assert_eq!(r.output_count + r.removed_endpoint + r.removed_pre_t0 + r.removed_impossible, r.input_count);
        prop_assert_eq!(kept.len(), r.output_count);
        for p in &kept {
            prop_assert_eq!(p.horizon, p.t_predicted - p.t_past);
            prop_assert!(p.t_past >= 0 && p.t_predicted >= p.t_past);
        }
    }
}
