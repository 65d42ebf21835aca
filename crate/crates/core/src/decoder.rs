//! Label-space constrained prediction.
//!
//! Each verbalizer is scored as a teacher-forced continuation of the prompt;
//! the prediction is the best-scoring label and the label distribution `ẑ`
//! is the softmax of the label scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{softmax, LanguageModel};
use crate::tokenizer::BpeVocab;

/// How a multi-token verbalizer's token log-probabilities are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreMode {
    /// Joint log-probability of the whole verbalizer.
    #[default]
    Sum,
    /// Per-token mean, for length-normalized ablations.
    Mean,
}

/// Where the space between `Label:` and the verbalizer is tokenized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelJoin {
    /// A trailing space on the prompt moves onto the verbalizer, so the label
    /// is scored as ` positive`, exactly as it is tokenized in demo lines.
    #[default]
    MoveSpace,
    /// The prompt is encoded as is and the verbalizer gets a leading space
    /// only if the prompt does not already end with one.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ScoringOptions {
    #[serde(default)]
    pub mode: ScoreMode,
    #[serde(default)]
    pub join: LabelJoin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelDistribution {
    /// Renormalized probabilities over the label space.
    pub probs: Vec<f64>,
    /// `max(probs)`.
    pub confidence: f64,
    /// Argmax of `probs`, lowest index on ties.
    pub predicted: usize,
    /// Label log-probability scores before renormalization.
    pub raw_scores: Vec<f64>,
}

impl LabelDistribution {
    pub fn from_raw_scores(raw_scores: Vec<f64>) -> Result<Self> {
        if raw_scores.is_empty() {
            return Err(Error::invalid("empty label space"));
        }
        if raw_scores.iter().any(|s| s.is_nan()) {
            return Err(Error::invalid("NaN label score"));
        }
        let probs = softmax(&raw_scores);
        let mut predicted = 0;
        for (i, &p) in probs.iter().enumerate() {
            if p > probs[predicted] {
                predicted = i;
            }
        }
        Ok(Self {
            confidence: probs[predicted],
            predicted,
            probs,
            raw_scores,
        })
    }
}

/// Token ids of the prompt prefix and of every verbalizer continuation.
pub fn encode_for_scoring(
    vocab: &BpeVocab,
    prompt: &str,
    verbalizers: &[String],
    join: LabelJoin,
) -> (Vec<u32>, Vec<Vec<u32>>) {
    let (prefix, lead) = match join {
        LabelJoin::MoveSpace => (prompt.strip_suffix(' ').unwrap_or(prompt), " "),
        LabelJoin::Literal if prompt.ends_with(' ') => (prompt, ""),
        LabelJoin::Literal => (prompt, " "),
    };
    let conts = verbalizers
        .iter()
        .map(|v| vocab.encode(&format!("{lead}{v}")))
        .collect();
    (vocab.encode(prefix), conts)
}

/// Scores every verbalizer after `prompt` and renormalizes over the labels.
pub fn score_labels<M: LanguageModel + ?Sized>(
    model: &M,
    vocab: &BpeVocab,
    prompt: &str,
    verbalizers: &[String],
    opts: ScoringOptions,
) -> Result<LabelDistribution> {
    let (prefix, conts) = encode_for_scoring(vocab, prompt, verbalizers, opts.join);
    if prefix.is_empty() {
        return Err(Error::EmptySequence);
    }
    let longest = conts.iter().map(Vec::len).max().unwrap_or(0);
    let required = prefix.len() + longest.saturating_sub(1);
    if required > model.max_context() {
        return Err(Error::ContextOverflow {
            required,
            available: model.max_context(),
        });
    }
    let per_token = model.score_continuations(&prefix, &conts)?;
    let raw = per_token
        .iter()
        .map(|lps| {
            let sum: f64 = lps.iter().sum();
            match opts.mode {
                ScoreMode::Sum => sum,
                ScoreMode::Mean => sum / lps.len() as f64,
            }
        })
        .collect();
    LabelDistribution::from_raw_scores(raw)
}

/// The predicted label id together with its distribution.
pub fn predict<M: LanguageModel + ?Sized>(
    model: &M,
    vocab: &BpeVocab,
    prompt: &str,
    verbalizers: &[String],
    opts: ScoringOptions,
) -> Result<(usize, LabelDistribution)> {
    let dist = score_labels(model, vocab, prompt, verbalizers, opts)?;
    Ok((dist.predicted, dist))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_label_softmax() {
        let d = LabelDistribution::from_raw_scores(vec![-1.0, -2.0]).unwrap();
        assert!((d.probs[0] - 0.731_058_578_630_004_9).abs() < 1e-12);
        assert!((d.probs[1] - 0.268_941_421_369_995_1).abs() < 1e-12);
        assert_eq!(d.predicted, 0);
        assert!((d.confidence - 0.7311).abs() < 1e-4);
    }

    #[test]
    fn single_label_and_ties() {
        let d = LabelDistribution::from_raw_scores(vec![-3.5]).unwrap();
        assert_eq!(d.probs, vec![1.0]);
        assert_eq!(d.confidence, 1.0);
        let t = LabelDistribution::from_raw_scores(vec![-0.7; 4]).unwrap();
        assert_eq!(t.predicted, 0);
        assert!(t.probs.iter().all(|&p| (p - 0.25).abs() < 1e-15));
        assert!((t.confidence - 0.25).abs() < 1e-15);
    }

    #[test]
    fn space_handling() {
        let vocab = BpeVocab::gpt2().unwrap();
        let labels = vec!["positive".to_string()];
        let (p, c) = encode_for_scoring(&vocab, "Input: x, Label: ", &labels, LabelJoin::MoveSpace);
        assert_eq!(p, vocab.encode("Input: x, Label:"));
        assert_eq!(c[0], vocab.encode(" positive"));
        let mut joined = p.clone();
        joined.extend(&c[0]);
        assert_eq!(joined, vocab.encode("Input: x, Label: positive"));

        let (p, c) = encode_for_scoring(&vocab, "Input: x, Label: ", &labels, LabelJoin::Literal);
        assert_eq!(p, vocab.encode("Input: x, Label: "));
        assert_eq!(c[0], vocab.encode("positive"));
    }

    proptest! {
        #[test]
        fn shift_invariance(scores in prop::collection::vec(-30.0f64..0.0, 1..6), c in -50.0f64..50.0) {
            let a = LabelDistribution::from_raw_scores(scores.clone()).unwrap();
            let b = LabelDistribution::from_raw_scores(scores.iter().map(|s| s + c).collect()).unwrap();
            prop_assert_eq!(a.predicted, b.predicted);
            prop_assert!((a.confidence - b.confidence).abs() < 1e-9);
            for (x, y) in a.probs.iter().zip(&b.probs) {
                prop_assert!((x - y).abs() < 1e-9);
            }
            prop_assert!((a.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(a.confidence >= 1.0 / scores.len() as f64 - 1e-12);
        }

        #[test]
        fn argmax_invariant_under_affine_maps(
            scores in prop::collection::vec(-30.0f64..0.0, 2..6),
            scale in 0.01f64..10.0,
            shift in -10.0f64..10.0,
        ) {
            let a = LabelDistribution::from_raw_scores(scores.clone()).unwrap();
            let b = LabelDistribution::from_raw_scores(scores.iter().map(|s| s * scale + shift).collect()).unwrap();
            // distinct maxima only: an exact tie can be broken by rounding after scaling
            let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let ties = scores.iter().filter(|&&s| (s - max).abs() < 1e-9).count();
            prop_assume!(ties == 1);
            prop_assert_eq!(a.predicted, b.predicted);
        }
    }
}
