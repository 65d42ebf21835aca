//! Grid search over the noise intensity and stability of the optimum
//! across demo counts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::MetricSet;

/// Default candidate intensities.
pub const DEFAULT_GRID: [f64; 24] = [
    0.0, 0.002, 0.004, 0.006, 0.008, 0.01, 0.012, 0.014, 0.016, 0.018, 0.02, 0.04, 0.06, 0.08,
    0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0,
];

/// Default number of noise draws averaged per candidate.
pub const DEFAULT_SEARCH_SEEDS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaGrid {
    candidates: Vec<f64>,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        Self {
            candidates: DEFAULT_GRID.to_vec(),
        }
    }
}

impl LambdaGrid {
    /// Candidates must be strictly increasing and inside `[0, 1]`.
    pub fn new(candidates: Vec<f64>) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::invalid("empty lambda grid"));
        }
        if candidates.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(Error::invalid("lambda candidates must lie in [0, 1]"));
        }
        if candidates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("lambda candidates must be strictly increasing"));
        }
        Ok(Self { candidates })
    }

    /// Sorts and deduplicates before validating.
    pub fn from_unordered(mut candidates: Vec<f64>) -> Result<Self> {
        candidates.sort_by(f64::total_cmp);
        candidates.dedup();
        Self::new(candidates)
    }

    pub fn candidates(&self) -> &[f64] {
        &self.candidates
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub lambda: f64,
    /// Metrics per noise seed, in seed order.
    pub per_seed: Vec<MetricSet>,
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSearchResult {
    pub candidates: Vec<CandidateScore>,
    pub optimal_lambda: f64,
    pub seeds_used: usize,
}

/// Evaluates every `(λ, seed)` pair with `evaluate` and returns the λ with
/// the best mean accuracy, the smaller λ on ties.
pub fn grid_search<F>(grid: &LambdaGrid, n_seeds: usize, evaluate: F) -> Result<LambdaSearchResult>
where
    F: Fn(f64, usize) -> Result<MetricSet> + Sync,
{
    let jobs = jobs(grid, n_seeds)?;
    let results = jobs
        .par_iter()
        .map(|&(c, s)| evaluate(grid.candidates[c], s))
        .collect::<Result<Vec<_>>>()?;
    Ok(select(grid, n_seeds, results))
}

/// [`grid_search`] evaluating one job at a time, for evaluators that are
/// memory hungry or parallel internally.
pub fn grid_search_sequential<F>(grid: &LambdaGrid, n_seeds: usize, mut evaluate: F) -> Result<LambdaSearchResult>
where
    F: FnMut(f64, usize) -> Result<MetricSet>,
{
    let results = jobs(grid, n_seeds)?
        .into_iter()
        .map(|(c, s)| evaluate(grid.candidates[c], s))
        .collect::<Result<Vec<_>>>()?;
    Ok(select(grid, n_seeds, results))
}

fn jobs(grid: &LambdaGrid, n_seeds: usize) -> Result<Vec<(usize, usize)>> {
    if n_seeds < 1 {
        return Err(Error::invalid("grid search needs at least one seed"));
    }
    Ok((0..grid.candidates.len())
        .flat_map(|c| (0..n_seeds).map(move |s| (c, s)))
        .collect())
}

fn select(grid: &LambdaGrid, n_seeds: usize, results: Vec<MetricSet>) -> LambdaSearchResult {
    let candidates: Vec<CandidateScore> = grid
        .candidates
        .iter()
        .enumerate()
        .map(|(c, &lambda)| {
            let per_seed = results[c * n_seeds..(c + 1) * n_seeds].to_vec();
            let mean_accuracy = per_seed.iter().map(|m| m.accuracy).sum::<f64>() / n_seeds as f64;
            CandidateScore {
                lambda,
                per_seed,
                mean_accuracy,
            }
        })
        .collect();
    let best = candidates
        .iter()
        .max_by(|a, b| {
            a.mean_accuracy
                .total_cmp(&b.mean_accuracy)
                .then(b.lambda.total_cmp(&a.lambda))
        })
        .expect("grid is non-empty");
    LambdaSearchResult {
        optimal_lambda: best.lambda,
        candidates,
        seeds_used: n_seeds,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityStats {
    /// Demo counts in ascending order.
    pub ks: Vec<usize>,
    pub optima: Vec<f64>,
    /// `|λ_i − λ_j|`.
    pub distance_matrix: Vec<Vec<f64>>,
    /// Range of `{λ_c : c ≥ i}` divided by `grid_max`.
    pub remaining_range: Vec<f64>,
    pub grid_max: f64,
}

/// Largest optimal λ, the default normalizer for [`stability_stats`].
pub fn max_optimum(optimal_by_k: &[(usize, f64)]) -> f64 {
    optimal_by_k.iter().map(|&(_, l)| l).fold(0.0, f64::max)
}

pub fn stability_stats(optimal_by_k: &[(usize, f64)], grid_max: f64) -> Result<StabilityStats> {
    if optimal_by_k.len() < 2 {
        return Err(Error::invalid("stability needs optima for at least two demo counts"));
    }
    let mut sorted = optimal_by_k.to_vec();
    sorted.sort_by_key(|&(k, _)| k);
    if sorted.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::invalid("duplicate demo count"));
    }
    let ks: Vec<usize> = sorted.iter().map(|&(k, _)| k).collect();
    let optima: Vec<f64> = sorted.iter().map(|&(_, l)| l).collect();
    let distance_matrix = optima
        .iter()
        .map(|a| optima.iter().map(|b| (a - b).abs()).collect())
        .collect();
    let remaining_range = (0..optima.len())
        .map(|i| {
            if grid_max == 0.0 {
                return 0.0;
            }
            let tail = &optima[i..];
            let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
            (hi - lo) / grid_max
        })
        .collect();
    Ok(StabilityStats {
        ks,
        optima,
        distance_matrix,
        remaining_range,
        grid_max,
    })
}
