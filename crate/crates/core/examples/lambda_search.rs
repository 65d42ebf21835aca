// Grid search for λ and the stability of the optimum across demo counts.
//
// The evaluator here is a synthetic accuracy curve; `harness::search_lambda`
// plugs a real few-shot evaluation into the same search.

use noisyicl::metrics::MetricSet;
use noisyicl::search::{grid_search, max_optimum, stability_stats, LambdaGrid};
use noisyicl::Result;

fn oracle(peak: f64) -> impl Fn(f64, usize) -> Result<MetricSet> + Sync {
    move |lambda, seed| {
        let jitter = (seed as f64 - 1.0) * 1e-4;
        let accuracy = 0.8 - (lambda - peak).abs() + jitter;
        Ok(MetricSet { accuracy, macro_f1: accuracy, ece1: 0.1 })
    }
}

pub fn run_example() -> Result<Vec<(usize, f64)>> {
    let grid = LambdaGrid::default();
    println!("{} candidates: {:?}", grid.candidates().len(), grid.candidates());

    let mut optima = Vec::new();
    for (k, peak) in [(0, 0.2), (1, 0.1), (2, 0.1), (4, 0.09)] {
        let result = grid_search(&grid, 3, oracle(peak))?;
        println!("k = {k}: optimal λ = {}", result.optimal_lambda);
        optima.push((k, result.optimal_lambda));
    }

    let stats = stability_stats(&optima, max_optimum(&optima))?;
    for (k, r) in stats.ks.iter().zip(&stats.remaining_range) {
        println!("k = {k}: remaining range {r:.3}");
    }
    for row in &stats.distance_matrix {
        println!("{}", row.iter().map(|d| format!("{d:.3}")).collect::<Vec<_>>().join(" "));
    }
    Ok(optima)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
