//! Forward-model invariants, checked against an exhaustive per-draw
//! enumeration that never touches the pmf representation.

use std::collections::BTreeMap;

use eventdur_core::{
    posterior, predict, sample_poisson_prior, DecisionRule, LikelihoodSpec, SampledPrior,
};
use proptest::prelude::*;

/// Posterior by enumerating every raw draw: each draw contributes
/// `(1/t)^n / N` when `t >= t_past` and `t > 0`.
fn brute_force(draws: &[u32], t_past: f64, n: u32) -> BTreeMap<u32, f64> {
    let mut mass = BTreeMap::new();
    for &t in draws {
        if t == 0 || (t as f64) < t_past {
            continue;
        }
        let mut w = 1.0 / draws.len() as f64;
        for _ in 0..n {
            w /= t as f64;
        }
        *mass.entry(t).or_insert(0.0) += w;
    }
    let total: f64 = mass.values().sum();
    mass.values_mut().for_each(|v| *v /= total);
    mass
}

fn draws_strategy() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(prop::collection::vec(1u32..120, 1..10), 1..6).prop_map(|groups| {
        // at most 10 distinct values, repeated with varying multiplicity
        let mut out = Vec::new();
        for (i, g) in groups.iter().enumerate() {
            for _ in 0..=i {
                out.extend_from_slice(g);
            }
        }
        out
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_brute_force(draws in draws_strategy(), t_past in 0.0f64..120.0, n in 1u32..4) {
        let prior = SampledPrior::from_draws(0.0, 0, &draws).unwrap();
        prop_assume!(prior.support().len() <= 10);
        let lik = LikelihoodSpec::new(t_past, n).unwrap();
        match posterior(&prior, &lik, DecisionRule::Median) {
            Ok(post) => {
                let oracle = brute_force(&draws, t_past, n);
                prop_assert_eq!(post.support.len(), oracle.len());
                for (k, p) in &oracle {
                    prop_assert!((post.probability(*k) - p).abs() <= 1e-12);
                }
            }
            Err(_) => prop_assert!(brute_force(&draws, t_past, n).is_empty()),
        }
    }

    #[test]
    fn normalized_truncated_and_floored(lambda in 5.0f64..150.0, seed in any::<u64>(), t_past in 0.0f64..150.0) {
        let prior = sample_poisson_prior(lambda, 300, seed).unwrap();
        prop_assume!(prior.max_support() as f64 >= t_past && prior.max_support() > 0);
        let post = posterior(&prior, &LikelihoodSpec::new(t_past, 1).unwrap(), DecisionRule::Median).unwrap();
        let total: f64 = post.probabilities.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(post.probabilities.iter().all(|&p| p >= 0.0));
        prop_assert!(post.support.iter().all(|&k| k as f64 >= t_past));
        let lo = post.support[0] as f64;
        let hi = *post.support.last().unwrap() as f64;
        prop_assert!(post.median >= lo && post.median <= hi);
        prop_assert!(post.mean >= lo - 1e-9 && post.mean <= hi + 1e-9);
        prop_assert!(post.median >= t_past && post.mean >= t_past);
    }

    #[test]
    fn non_decreasing_in_t_past(lambda in 10.0f64..120.0, seed in any::<u64>()) {
        let prior = sample_poisson_prior(lambda, 400, seed).unwrap();
        for rule in [DecisionRule::Median, DecisionRule::Mean] {
            let mut last = f64::NEG_INFINITY;
            for t in 0..=prior.max_support() {
                let p = predict(&prior, t as f64, 1, rule).unwrap();
                prop_assert!(p >= last, "{rule:?} t_past={t}: {p} < {last}");
                last = p;
            }
        }
    }

    #[test]
    fn more_observations_lower_the_prediction(lambda in 10.0f64..120.0, seed in any::<u64>(), frac in 0.0f64..1.0) {
        let prior = sample_poisson_prior(lambda, 400, seed).unwrap();
        let t_past = (frac * prior.max_support() as f64).floor();
        let surviving = prior.support().iter().filter(|&&k| k > 0 && k as f64 >= t_past).count();
        for n in 1..4 {
            let a = predict(&prior, t_past, n, DecisionRule::Mean).unwrap();
            let b = predict(&prior, t_past, n + 1, DecisionRule::Mean).unwrap();
            if surviving >= 2 {
                prop_assert!(b < a);
            } else {
                prop_assert_eq!(a, b);
            }
            let a = predict(&prior, t_past, n, DecisionRule::Median).unwrap();
            let b = predict(&prior, t_past, n + 1, DecisionRule::Median).unwrap();
            prop_assert!(b <= a);
        }
    }

    #[test]
    fn empirical_pmf_is_consistent(lambda in 0.5f64..200.0, count in 1usize..500, seed in any::<u64>()) {
        let prior = sample_poisson_prior(lambda, count, seed).unwrap();
        prop_assert_eq!(prior.sample_count(), count);
        let drawn: u32 = prior.counts().iter().sum();
        prop_assert_eq!(drawn as usize, count);
        for (k, p) in prior.iter() {
            let c = prior.counts()[prior.support().binary_search(&k).unwrap()];
            prop_assert_eq!(p, c as f64 / count as f64);
        }
    }
}

#[test]
fn long_lived_prior_predicts_a_bit_beyond_its_mean() {
    let prior = sample_poisson_prior(79.0, 10_000, 7).unwrap();
    let p = predict(&prior, 79.0, 1, DecisionRule::Median).unwrap();
    assert!(p > 79.0 && p < 95.0, "{p}");
}
