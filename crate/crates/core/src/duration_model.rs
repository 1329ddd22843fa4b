//! Forward decision model: sampled Poisson priors, the truncated `(1/t)^n`
//! likelihood, the renormalized posterior and its median/mean summaries.

use alloc::format;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};

/// Cumulative mass counted as "reached one half" when locating a median.
/// The slack absorbs rounding in sums of reweighted probabilities.
pub(crate) const MEDIAN_THRESHOLD: f64 = 0.5 - 1e-12;

/// Posterior summary used as the model's prediction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum DecisionRule {
    #[default]
    Median,
    Mean,
}

impl DecisionRule {
    pub fn as_str(self) -> &'static str {
        match self {
            DecisionRule::Median => "median",
            DecisionRule::Mean => "mean",
        }
    }
}

impl core::str::FromStr for DecisionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "median" => Ok(DecisionRule::Median),
            "mean" => Ok(DecisionRule::Mean),
            other => Err(Error::InvalidArgument(format!(
                "unknown decision rule `{other}` (expected `median` or `mean`)"
            ))),
        }
    }
}

/// An empirical prior over integer durations built from a finite set of draws.
///
/// Probabilities are stored as draw counts, so `probability(k)` is exactly
/// `count(k) / sample_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPrior {
    lambda: f64,
    sample_count: usize,
    seed: u64,
    support: Vec<u32>,
    counts: Vec<u32>,
}

impl SampledPrior {
    /// Builds a prior from raw draws. `lambda` and `seed` are carried as
    /// provenance only.
    pub fn from_draws(lambda: f64, seed: u64, draws: &[u32]) -> Result<Self> {
        if draws.is_empty() {
            return Err(Error::InvalidArgument("a prior needs at least one draw".into()));
        }
        let mut sorted = draws.to_vec();
        sorted.sort_unstable();
        let mut support = Vec::new();
        let mut counts: Vec<u32> = Vec::new();
        for k in sorted {
            match support.last() {
                Some(&last) if last == k => *counts.last_mut().unwrap() += 1,
                _ => {
                    support.push(k);
                    counts.push(1);
                }
            }
        }
        Ok(SampledPrior {
            lambda,
            sample_count: draws.len(),
            seed,
            support,
            counts,
        })
    }

    /// A prior with all of its mass on `value`.
    pub fn point_mass(value: u32) -> Self {
        SampledPrior {
            lambda: f64::from(value),
            sample_count: 1,
            seed: 0,
            support: alloc::vec![value],
            counts: alloc::vec![1],
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Distinct sampled durations, ascending.
    pub fn support(&self) -> &[u32] {
        &self.support
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn probability(&self, k: u32) -> f64 {
        match self.support.binary_search(&k) {
            Ok(i) => f64::from(self.counts[i]) / self.sample_count as f64,
            Err(_) => 0.0,
        }
    }

    /// `(duration, probability)` pairs in ascending duration order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        let n = self.sample_count as f64;
        self.support
            .iter()
            .zip(&self.counts)
            .map(move |(&k, &c)| (k, f64::from(c) / n))
    }

    pub fn max_support(&self) -> u32 {
        *self.support.last().expect("prior support is never empty")
    }

    /// Empirical mean of the draws.
    pub fn mean(&self) -> f64 {
        let total: f64 = self
            .support
            .iter()
            .zip(&self.counts)
            .map(|(&k, &c)| f64::from(k) * f64::from(c))
            .sum();
        total / self.sample_count as f64
    }

    /// Smallest sampled duration whose cumulative mass reaches one half.
    pub fn median(&self) -> f64 {
        let half = self.sample_count as u64;
        let mut cum = 0u64;
        for (&k, &c) in self.support.iter().zip(&self.counts) {
            cum += u64::from(c);
            // cum / n >= 1/2 in exact integer arithmetic
            if 2 * cum >= half {
                return f64::from(k);
            }
        }
        f64::from(self.max_support())
    }
}

/// Elapsed duration plus the number of independent observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikelihoodSpec {
    t_past: f64,
    n_observations: u32,
}

impl LikelihoodSpec {
    pub fn new(t_past: f64, n_observations: u32) -> Result<Self> {
        if !t_past.is_finite() || t_past < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "t_past must be finite and non-negative, got {t_past}"
            )));
        }
        if n_observations == 0 {
            return Err(Error::InvalidArgument("n_observations must be at least 1".into()));
        }
        Ok(LikelihoodSpec {
            t_past,
            n_observations,
        })
    }

    pub fn t_past(&self) -> f64 {
        self.t_past
    }

    pub fn n_observations(&self) -> u32 {
        self.n_observations
    }

    /// Likelihood of elapsed time `t_past` given total duration `t_total`.
    /// Zero below `t_past`; zero-duration events carry no likelihood.
    pub fn weight(&self, t_total: u32) -> f64 {
        if t_total == 0 || f64::from(t_total) < self.t_past {
            0.0
        } else {
            libm::pow(f64::from(t_total), -f64::from(self.n_observations))
        }
    }
}

/// Normalized posterior over total durations with its summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorResult {
    pub support: Vec<u32>,
    pub probabilities: Vec<f64>,
    pub median: f64,
    pub mean: f64,
    pub decision_rule: DecisionRule,
}

impl PosteriorResult {
    /// The summary selected by `decision_rule`.
    pub fn prediction(&self) -> f64 {
        match self.decision_rule {
            DecisionRule::Median => self.median,
            DecisionRule::Mean => self.mean,
        }
    }

    pub fn probability(&self, t_total: u32) -> f64 {
        match self.support.binary_search(&t_total) {
            Ok(i) => self.probabilities[i],
            Err(_) => 0.0,
        }
    }
}

/// Draws `sample_count` Poisson(`lambda`) durations with a seeded ChaCha8
/// stream and returns their empirical pmf.
pub fn sample_poisson_prior(lambda: f64, sample_count: usize, seed: u64) -> Result<SampledPrior> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    if sample_count == 0 {
        return Err(Error::InvalidArgument("sample_count must be at least 1".into()));
    }
    let dist = Poisson::new(lambda)
        .map_err(|e| Error::InvalidArgument(format!("poisson({lambda}): {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<u32> = (0..sample_count)
        .map(|_| {
            let k: f64 = dist.sample(&mut rng);
            if k >= f64::from(u32::MAX) {
                u32::MAX
            } else {
                k as u32
            }
        })
        .collect();
    SampledPrior::from_draws(lambda, seed, &draws)
}

/// Reweights the prior by the truncated likelihood and renormalizes.
pub fn posterior(
    prior: &SampledPrior,
    likelihood: &LikelihoodSpec,
    decision_rule: DecisionRule,
) -> Result<PosteriorResult> {
    let mut support = Vec::new();
    let mut mass = Vec::new();
    for (k, p) in prior.iter() {
        let w = likelihood.weight(k);
        if w > 0.0 {
            support.push(k);
            mass.push(p * w);
        }
    }
    let total: f64 = mass.iter().sum();
    if support.is_empty() || !(total > 0.0) {
        return Err(Error::EmptyPosterior {
            t_past: likelihood.t_past(),
        });
    }
    for m in &mut mass {
        *m /= total;
    }

    let mean = support
        .iter()
        .zip(&mass)
        .map(|(&k, &p)| f64::from(k) * p)
        .sum();
    let median = weighted_median(&support, &mass);

    Ok(PosteriorResult {
        support,
        probabilities: mass,
        median,
        mean,
        decision_rule,
    })
}

/// The model's `t_predicted` for an elapsed duration `t_past`.
pub fn predict(
    prior: &SampledPrior,
    t_past: f64,
    n_observations: u32,
    decision_rule: DecisionRule,
) -> Result<f64> {
    let likelihood = LikelihoodSpec::new(t_past, n_observations)?;
    Ok(posterior(prior, &likelihood, decision_rule)?.prediction())
}

fn weighted_median(support: &[u32], probabilities: &[f64]) -> f64 {
    let mut cum = 0.0;
    for (&k, &p) in support.iter().zip(probabilities) {
        cum += p;
        if cum >= MEDIAN_THRESHOLD {
            return f64::from(k);
        }
    }
    f64::from(*support.last().expect("non-empty support"))
}
