//! One-sided partition test for the association statistic.
//!
//! The pooled targets `X ∪ Y` (2n values of `s`) are re-split into two halves
//! of size n. A partition counts against the hypothesis when its statistic is
//! at least the observed one (ties included). Because the statistic of a split
//! is `2·Σ_half − Σ_all`, only the sum over the candidate X-half is needed.
//!
//! Monte-Carlo sampling is cut into fixed-size chunks, each driven by its own
//! ChaCha stream of the plan seed, so the p-value does not depend on how many
//! threads run the chunks.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Associations, EatError, EatInput};

pub const DEFAULT_SAMPLES: u64 = 10_000;
pub const DEFAULT_EXACT_THRESHOLD: u64 = 200_000;
pub const MONTE_CARLO_CHUNK: u64 = 1_000;

/// Relative slack when comparing a partition statistic with the observed one.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PermutationMode {
    #[default]
    Auto,
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PermutationPlan {
    pub mode: PermutationMode,
    pub samples: u64,
    pub seed: u64,
    pub exact_threshold: u64,
}

impl Default for PermutationPlan {
    fn default() -> Self {
        Self {
            mode: PermutationMode::Auto,
            samples: DEFAULT_SAMPLES,
            seed: crate::DEFAULT_SEED,
            exact_threshold: DEFAULT_EXACT_THRESHOLD,
        }
    }
}

impl PermutationPlan {
    pub fn validate(&self) -> Result<(), EatError> {
        if self.samples == 0 {
            return Err(EatError::InvalidPlan("samples must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermutationOutcome {
    pub p: f64,
    pub method: Method,
    pub n_permutations: u64,
}

/// `C(2n, n)`, or `None` if it does not fit in a `u64`.
pub fn partition_count(n: usize) -> Option<u64> {
    let mut acc: u128 = 1;
    for i in 0..n as u128 {
        // acc * (2n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul(2 * n as u128 - i)? / (i + 1);
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

pub fn permutation_p(
    input: &EatInput,
    plan: &PermutationPlan,
) -> Result<PermutationOutcome, EatError> {
    let assoc = Associations::compute(input)?;
    permutation_p_from_scores(&assoc.x, &assoc.y, plan)
}

/// Partition test on precomputed associations of X and Y.
pub fn permutation_p_from_scores(
    x: &[f64],
    y: &[f64],
    plan: &PermutationPlan,
) -> Result<PermutationOutcome, EatError> {
    plan.validate()?;
    if x.is_empty() || y.is_empty() {
        return Err(EatError::EmptyGroup(if x.is_empty() { "X" } else { "Y" }));
    }
    if x.len() != y.len() {
        return Err(EatError::UnequalTargets {
            x: x.len(),
            y: y.len(),
        });
    }
    let n = x.len();
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let total: f64 = pooled.iter().sum();
    let observed = 2.0 * x.iter().sum::<f64>() - total;
    let scale = 1.0 + pooled.iter().map(|s| s.abs()).sum::<f64>();
    let counts = Threshold {
        total,
        cutoff: observed - TIE_TOLERANCE * scale,
    };

    let count = partition_count(n);
    let exact = match (plan.mode, count) {
        (_, None) | (PermutationMode::MonteCarlo, _) => false,
        (PermutationMode::Exact, Some(_)) => true,
        (PermutationMode::Auto, Some(c)) => c <= plan.exact_threshold,
    };

    if exact {
        let n_permutations = count.expect("checked above");
        let hits = exact_hits(&pooled, n, &counts);
        Ok(PermutationOutcome {
            p: hits as f64 / n_permutations as f64,
            method: Method::Exact,
            n_permutations,
        })
    } else {
        let hits = monte_carlo_hits(&pooled, n, &counts, plan.samples, plan.seed);
        Ok(PermutationOutcome {
            p: (1 + hits) as f64 / (1 + plan.samples) as f64,
            method: Method::MonteCarlo,
            n_permutations: plan.samples,
        })
    }
}

struct Threshold {
    total: f64,
    cutoff: f64,
}

impl Threshold {
    fn counts(&self, half_sum: f64) -> bool {
        2.0 * half_sum - self.total >= self.cutoff
    }
}

/// Enumerates all n-subsets of the 2n pooled values, split on the smallest
/// chosen index so branches run in parallel.
fn exact_hits(pooled: &[f64], n: usize, threshold: &Threshold) -> u64 {
    let m = pooled.len();
    (0..=m - n)
        .into_par_iter()
        .map(|first| count_subsets(pooled, first + 1, n - 1, pooled[first], threshold))
        .sum()
}

fn count_subsets(
    pooled: &[f64],
    start: usize,
    remaining: usize,
    sum: f64,
    threshold: &Threshold,
) -> u64 {
    if remaining == 0 {
        return u64::from(threshold.counts(sum));
    }
    let last_start = pooled.len() - remaining;
    (start..=last_start)
        .map(|i| count_subsets(pooled, i + 1, remaining - 1, sum + pooled[i], threshold))
        .sum()
}

fn monte_carlo_hits(
    pooled: &[f64],
    n: usize,
    threshold: &Threshold,
    samples: u64,
    seed: u64,
) -> u64 {
    let chunks = samples.div_ceil(MONTE_CARLO_CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let len = MONTE_CARLO_CHUNK.min(samples - chunk * MONTE_CARLO_CHUNK);
            (0..len)
                .filter(|_| {
                    let half: f64 = index::sample(&mut rng, pooled.len(), n)
                        .iter()
                        .map(|i| pooled[i])
                        .sum();
                    threshold.counts(half)
                })
                .count() as u64
        })
        .sum()
}
