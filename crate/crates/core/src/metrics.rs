//! Classification and calibration metrics over prediction records.
//!
//! Confidence bins are `(0.1(j-1), 0.1j]` for `m = 10` (generally
//! `((j-1)/m, j/m]`), with the first bin also holding confidence 0. Empty
//! bins contribute nothing to ECE.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of confidence bins.
pub const DEFAULT_BINS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub predicted: usize,
    pub gold: usize,
    pub confidence: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<f64>>,
}

impl PredictionRecord {
    pub fn new(predicted: usize, gold: usize, confidence: f64) -> Self {
        Self {
            predicted,
            gold,
            confidence,
            probs: None,
        }
    }

    pub fn is_correct(&self) -> bool {
        self.predicted == self.gold
    }
}

fn non_empty(records: &[PredictionRecord]) -> Result<()> {
    if records.is_empty() {
        Err(Error::invalid("no prediction records"))
    } else {
        Ok(())
    }
}

pub fn accuracy(records: &[PredictionRecord]) -> Result<f64> {
    non_empty(records)?;
    let correct = records.iter().filter(|r| r.is_correct()).count();
    Ok(correct as f64 / records.len() as f64)
}

/// Unweighted mean of per-class F1 over `0..num_labels`; a class that is
/// never predicted or never gold (zero precision or recall) scores 0.
pub fn macro_f1(records: &[PredictionRecord], num_labels: usize) -> Result<f64> {
    non_empty(records)?;
    if num_labels < 2 {
        return Err(Error::invalid("macro-F1 needs at least two labels"));
    }
    let mut tp = vec![0usize; num_labels];
    let mut predicted = vec![0usize; num_labels];
    let mut gold = vec![0usize; num_labels];
    for r in records {
        if r.predicted >= num_labels || r.gold >= num_labels {
            return Err(Error::invalid(format!(
                "label outside 0..{num_labels}: predicted {}, gold {}",
                r.predicted, r.gold
            )));
        }
        predicted[r.predicted] += 1;
        gold[r.gold] += 1;
        if r.is_correct() {
            tp[r.gold] += 1;
        }
    }
    let total: f64 = (0..num_labels)
        .map(|c| {
            let precision = if predicted[c] == 0 { 0.0 } else { tp[c] as f64 / predicted[c] as f64 };
            let recall = if gold[c] == 0 { 0.0 } else { tp[c] as f64 / gold[c] as f64 };
            if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            }
        })
        .sum();
    Ok(total / num_labels as f64)
}

/// Zero-based bin of `confidence` among `m` right-closed bins.
pub fn bin_index(confidence: f64, m: usize) -> usize {
    let upper = |j: usize| j as f64 / m as f64;
    let mut j = ((confidence * m as f64).ceil() as usize).clamp(1, m);
    // correct for rounding in the product against the exact boundaries j/m
    while j > 1 && confidence <= upper(j - 1) {
        j -= 1;
    }
    while j < m && confidence > upper(j) {
        j += 1;
    }
    j - 1
}

fn check_inputs(records: &[PredictionRecord], m: usize) -> Result<()> {
    non_empty(records)?;
    if m == 0 {
        return Err(Error::invalid("need at least one bin"));
    }
    if let Some(r) = records.iter().find(|r| !(0.0..=1.0).contains(&r.confidence)) {
        return Err(Error::invalid(format!("confidence {} outside [0, 1]", r.confidence)));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub correct: usize,
    /// Fraction correct; 0 for an empty bin.
    pub accuracy: f64,
    /// Mean confidence; 0 for an empty bin.
    pub mean_confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityBins {
    pub m: usize,
    pub n: usize,
    pub bins: Vec<Bin>,
}

pub fn reliability_bins(records: &[PredictionRecord], m: usize) -> Result<ReliabilityBins> {
    check_inputs(records, m)?;
    let mut count = vec![0usize; m];
    let mut correct = vec![0usize; m];
    let mut conf_sum = vec![0f64; m];
    for r in records {
        let j = bin_index(r.confidence, m);
        count[j] += 1;
        conf_sum[j] += r.confidence;
        if r.is_correct() {
            correct[j] += 1;
        }
    }
    let bins = (0..m)
        .map(|j| {
            let (accuracy, mean_confidence) = if count[j] == 0 {
                (0.0, 0.0)
            } else {
                (correct[j] as f64 / count[j] as f64, conf_sum[j] / count[j] as f64)
            };
            Bin {
                lower: j as f64 / m as f64,
                upper: (j + 1) as f64 / m as f64,
                count: count[j],
                correct: correct[j],
                accuracy,
                mean_confidence,
            }
        })
        .collect();
    Ok(ReliabilityBins {
        m,
        n: records.len(),
        bins,
    })
}

impl ReliabilityBins {
    /// `(Σ_j |B_j|/n · |acc_j − conf_j|^p)^(1/p)`.
    pub fn ece(&self, p: f64) -> f64 {
        let sum: f64 = self
            .bins
            .iter()
            .filter(|b| b.count > 0)
            .map(|b| b.count as f64 / self.n as f64 * (b.accuracy - b.mean_confidence).abs().powf(p))
            .sum();
        sum.powf(1.0 / p)
    }
}

/// Expected calibration error with the L1 norm.
pub fn ece1(records: &[PredictionRecord], m: usize) -> Result<f64> {
    Ok(reliability_bins(records, m)?.ece(1.0))
}

/// Per-bin confidence counts split by correctness: `(correct, wrong)`.
pub fn confidence_histograms(records: &[PredictionRecord], m: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    check_inputs(records, m)?;
    let mut right = vec![0; m];
    let mut wrong = vec![0; m];
    for r in records {
        let j = bin_index(r.confidence, m);
        if r.is_correct() {
            right[j] += 1;
        } else {
            wrong[j] += 1;
        }
    }
    Ok((right, wrong))
}

/// Accuracy, macro-F1 and ECE₁ of one record set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub ece1: f64,
}

impl MetricSet {
    pub fn compute(records: &[PredictionRecord], num_labels: usize) -> Result<Self> {
        Ok(Self {
            accuracy: accuracy(records)?,
            macro_f1: macro_f1(records, num_labels)?,
            ece1: ece1(records, DEFAULT_BINS)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(p: usize, g: usize, c: f64) -> PredictionRecord {
        PredictionRecord::new(p, g, c)
    }

    #[test]
    fn accuracy_cases() {
        assert_eq!(accuracy(&[rec(1, 1, 0.9), rec(0, 0, 0.9)]).unwrap(), 1.0);
        assert_eq!(
            accuracy(&[rec(1, 1, 0.9), rec(0, 0, 0.9), rec(1, 1, 0.6), rec(0, 1, 0.6)]).unwrap(),
            0.75
        );
        assert_eq!(accuracy(&[rec(1, 0, 0.9)]).unwrap(), 0.0);
        assert!(accuracy(&[]).is_err());
    }

    #[test]
    fn macro_f1_cases() {
        let perfect = [rec(0, 0, 1.0), rec(1, 1, 1.0)];
        assert_eq!(macro_f1(&perfect, 2).unwrap(), 1.0);
        let half = [rec(0, 0, 1.0), rec(1, 0, 1.0), rec(0, 1, 1.0), rec(1, 1, 1.0)];
        assert!((macro_f1(&half, 2).unwrap() - 0.5).abs() < 1e-15);
        let absent = [rec(0, 0, 1.0), rec(1, 1, 1.0)];
        assert!((macro_f1(&absent, 3).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(macro_f1(&absent, 1).is_err());
        assert!(macro_f1(&[rec(3, 0, 1.0)], 2).is_err());
    }

    #[test]
    fn bin_boundaries() {
        assert_eq!(bin_index(0.0, 10), 0);
        assert_eq!(bin_index(0.1, 10), 0);
        assert_eq!(bin_index(0.1000001, 10), 1);
        assert_eq!(bin_index(0.3, 10), 2);
        assert_eq!(bin_index(0.7, 10), 6);
        assert_eq!(bin_index(1.0, 10), 9);
        assert_eq!(bin_index(0.55, 10), 5);
        assert_eq!(bin_index(0.95, 10), 9);
        for j in 1..=10 {
            assert_eq!(bin_index(j as f64 / 10.0, 10), j - 1);
        }
    }

    #[test]
    fn ece_hand_cases() {
        let all_right = vec![rec(0, 0, 0.95); 3];
        assert!((ece1(&all_right, 10).unwrap() - 0.05).abs() < 1e-12);

        let mut calibrated: Vec<_> = (0..8).map(|_| rec(1, 1, 0.8)).collect();
        calibrated.extend((0..2).map(|_| rec(1, 0, 0.8)));
        assert!(ece1(&calibrated, 10).unwrap().abs() < 1e-12);

        let mut two = vec![rec(1, 0, 0.95); 4];
        two.extend(vec![rec(0, 0, 0.55); 6]);
        assert!((ece1(&two, 10).unwrap() - 0.65).abs() < 1e-12);
        let bins = reliability_bins(&two, 10).unwrap();
        assert_eq!(bins.bins[5].count, 6);
        assert_eq!(bins.bins[5].accuracy, 1.0);
        assert!((bins.bins[5].mean_confidence - 0.55).abs() < 1e-12);
        assert_eq!(bins.bins[9].count, 4);
        assert_eq!(bins.bins[9].accuracy, 0.0);
        let (right, wrong) = confidence_histograms(&two, 10).unwrap();
        assert_eq!(right[5], 6);
        assert_eq!(wrong[9], 4);
        assert_eq!(right.iter().sum::<usize>() + wrong.iter().sum::<usize>(), 10);
    }

    #[test]
    fn reliability_layouts() {
        let spread: Vec<_> = (0..10).map(|j| rec(0, 0, 0.05 + 0.1 * j as f64)).collect();
        let bins = reliability_bins(&spread, 10).unwrap();
        assert!(bins.bins.iter().all(|b| b.count == 1));
        let top = reliability_bins(&[rec(0, 0, 1.0), rec(1, 0, 1.0)], 10).unwrap();
        assert_eq!(top.bins[9].count, 2);
        assert_eq!(top.bins.iter().map(|b| b.count).sum::<usize>(), 2);
        let (_, wrong) = confidence_histograms(&[rec(0, 0, 0.7), rec(1, 1, 0.9)], 10).unwrap();
        assert!(wrong.iter().all(|&c| c == 0));
    }

    #[test]
    fn rejects_bad_confidence() {
        assert!(ece1(&[rec(0, 0, 1.2)], 10).is_err());
        assert!(ece1(&[rec(0, 0, f64::NAN)], 10).is_err());
        assert!(ece1(&[], 10).is_err());
        assert!(confidence_histograms(&[], 10).is_err());
    }
}
