//! Normalized token and label entropy probes.
//!
//! Token entropy: entropy of the full next-token distribution after an
//! "empty" input, divided by `ln |V|`. Label entropy: entropy of the
//! predicted-label frequencies over repeated demo-only (query-less) prompts,
//! divided by `ln |U|`. Both lie in `[0, 1]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{sample_demos, TaskDataset};
use crate::decoder::{score_labels, ScoringOptions};
use crate::error::{Error, Result};
use crate::model::LanguageModel;
use crate::prompt::{build_queryless_prompt, PromptOptions};
use crate::rng::{derive_seed, SplitMix64};
use crate::tokenizer::BpeVocab;

/// The two empty inputs probed for token entropy.
pub const EMPTY_INPUTS: [&str; 2] = [" ", "Label: "];
/// Default number of query-less prompts per label-entropy estimate.
pub const DEFAULT_TRIES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyKind {
    Token,
    Label,
}

impl std::fmt::Display for EntropyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EntropyKind::Token => "token",
            EntropyKind::Label => "label",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyResult {
    pub value: f64,
    pub kind: EntropyKind,
    pub lambda: f64,
    /// The empty input (token kind) or dataset name (label kind).
    pub probe_input: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tries: Option<usize>,
}

/// `-Σ p ln p / ln n` with `0 ln 0 = 0`. A single-outcome support gives 0.
pub fn normalized_entropy(probs: &[f64]) -> f64 {
    if probs.len() < 2 {
        return 0.0;
    }
    let h: f64 = probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum();
    // adding +0.0 turns a negative zero into +0.0
    h / (probs.len() as f64).ln() + 0.0
}

/// Normalized entropy of empirical frequencies.
pub fn frequency_entropy(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let freqs: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
    normalized_entropy(&freqs)
}

pub fn token_entropy<M: LanguageModel + ?Sized>(
    model: &M,
    vocab: &BpeVocab,
    empty_input: &str,
    lambda: f64,
) -> Result<EntropyResult> {
    let tokens = vocab.encode(empty_input);
    if tokens.is_empty() {
        return Err(Error::invalid("empty input encodes to no tokens"));
    }
    let probs = model.next_token_logits(&tokens)?.softmax();
    Ok(EntropyResult {
        value: normalized_entropy(&probs),
        kind: EntropyKind::Token,
        lambda,
        probe_input: empty_input.to_string(),
        tries: None,
    })
}

/// What each query-less try contributes to the label frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tally {
    /// One count for the argmax label.
    #[default]
    Argmax,
    /// The renormalized label probabilities, averaged over tries.
    Expected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelEntropyOptions {
    pub k: usize,
    pub tries: usize,
    pub seed: u64,
    pub tally: Tally,
    pub prompt: PromptOptions,
    pub scoring: ScoringOptions,
}

impl Default for LabelEntropyOptions {
    fn default() -> Self {
        Self {
            k: 4,
            tries: DEFAULT_TRIES,
            seed: 0,
            tally: Tally::Argmax,
            prompt: PromptOptions::default(),
            scoring: ScoringOptions::default(),
        }
    }
}

/// Seed of the demo stream for try `index`.
pub fn try_seed(seed: u64, index: usize) -> u64 {
    derive_seed(seed, &format!("label-entropy/try/{index}"))
}

pub fn label_entropy<M: LanguageModel + ?Sized>(
    model: &M,
    vocab: &BpeVocab,
    ds: &TaskDataset,
    opts: &LabelEntropyOptions,
    lambda: f64,
) -> Result<EntropyResult> {
    if ds.has_neutral {
        return Err(Error::NeutralLabel(ds.name.clone()));
    }
    if opts.tries < 1 {
        return Err(Error::invalid("label entropy needs at least one try"));
    }
    if opts.k < 1 {
        return Err(Error::invalid("label entropy needs at least one demo"));
    }
    let dists = (0..opts.tries)
        .into_par_iter()
        .map(|t| {
            let mut rng = SplitMix64::new(try_seed(opts.seed, t));
            let demos = sample_demos(ds, opts.k, &mut rng, None)?;
            let prompt = build_queryless_prompt(&demos, &ds.label_space, ds.category, opts.prompt)?;
            score_labels(model, vocab, prompt.as_str(), &ds.label_space, opts.scoring)
        })
        .collect::<Result<Vec<_>>>()?;

    let value = match opts.tally {
        Tally::Argmax => {
            let mut counts = vec![0usize; ds.num_labels()];
            for d in &dists {
                counts[d.predicted] += 1;
            }
            frequency_entropy(&counts)
        }
        Tally::Expected => {
            let mut mean = vec![0f64; ds.num_labels()];
            for d in &dists {
                for (m, p) in mean.iter_mut().zip(&d.probs) {
                    *m += p / dists.len() as f64;
                }
            }
            normalized_entropy(&mean)
        }
    };
    Ok(EntropyResult {
        value,
        kind: EntropyKind::Label,
        lambda,
        probe_input: ds.name.clone(),
        tries: Some(opts.tries),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_and_one_hot() {
        let n = 50257;
        let uniform = vec![1.0 / n as f64; n];
        assert!((normalized_entropy(&uniform) - 1.0).abs() < 1e-9);
        let mut one_hot = vec![0.0; n];
        one_hot[17] = 1.0;
        assert_eq!(normalized_entropy(&one_hot), 0.0);
    }

    #[test]
    fn frequency_cases() {
        assert_eq!(frequency_entropy(&[512, 0]), 0.0);
        assert!((frequency_entropy(&[256, 256]) - 1.0).abs() < 1e-12);
        let expected = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln()) / 2f64.ln();
        assert!((frequency_entropy(&[384, 128]) - expected).abs() < 1e-12);
        assert!((frequency_entropy(&[384, 128]) - 0.8113).abs() < 1e-4);
        assert!(!frequency_entropy(&[0, 0, 5]).is_nan());
    }
}
