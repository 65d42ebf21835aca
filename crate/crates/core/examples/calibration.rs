// Accuracy, macro-F1, ECE₁ and the reliability table.

use noisyicl::metrics::{confidence_histograms, reliability_bins, MetricSet, DEFAULT_BINS};
use noisyicl::{PredictionRecord, Result};

pub fn run_example() -> Result<MetricSet> {
    // Four confident mistakes and six moderately confident hits.
    let mut records = vec![PredictionRecord::new(1, 0, 0.95); 4];
    records.extend(vec![PredictionRecord::new(0, 0, 0.55); 6]);

    let m = MetricSet::compute(&records, 2)?;
    println!("accuracy {:.3}  macro-F1 {:.3}  ECE1 {:.3}", m.accuracy, m.macro_f1, m.ece1);

    let bins = reliability_bins(&records, DEFAULT_BINS)?;
    println!("{:>12} {:>5} {:>8} {:>8}", "bin", "n", "acc", "conf");
    for b in bins.bins.iter().filter(|b| b.count > 0) {
        println!("({:.1}, {:.1}] {:>5} {:>8.3} {:>8.3}", b.lower, b.upper, b.count, b.accuracy, b.mean_confidence);
    }
    let (right, wrong) = confidence_histograms(&records, DEFAULT_BINS)?;
    println!("correct histogram {right:?}");
    println!("wrong histogram   {wrong:?}");
    Ok(m)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
