//! Experiment orchestration.
//!
//! For every noise repeat `r` the parameters are perturbed with the seed
//! `derive(seed, "noise/repeat/{r}")`. Every query of the chosen split is
//! then scored `tries_per_query` times. Each try draws its own `k` demos from
//! the same split, never including the query, using the stream
//! `derive(seed, "demos/k{k}/q{q}/t{t}")`.
//!
//! Demo streams do not depend on the repeat, so repeats differ only in their
//! noise and a λ = 0 run has identical repeats. Every stream is keyed rather
//! than drawn sequentially, so results are independent of thread count, and
//! repeat ranges run separately can be merged with [`RunResult::merge`].

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{sample_demos, SplitPair, TaskDataset};
use crate::decoder::{score_labels, ScoringOptions};
use crate::error::{Error, Result};
use crate::metrics::{MetricSet, PredictionRecord};
use crate::model::{load_weights, random_parameters, Gpt2, ModelConfig};
use crate::perturbation::{perturb, NoiseConfig, DEFAULT_SIGMA};
use crate::prompt::{build_prompt, PromptOptions};
use crate::rng::{derive_seed, SplitMix64};
use crate::search::{grid_search_sequential, LambdaGrid, LambdaSearchResult};
use crate::tensor::{hex, TensorMap};
use crate::tokenizer::BpeVocab;

/// Parameters, architecture and vocabulary of one model.
#[derive(Debug, Clone)]
pub struct ModelBundle {
    pub id: String,
    pub config: ModelConfig,
    pub params: TensorMap,
    pub vocab: BpeVocab,
    /// SHA-256 of the weight file, or of the parameter contents when the
    /// bundle was built in memory.
    pub weights_digest: String,
}

impl ModelBundle {
    pub fn new(id: impl Into<String>, config: ModelConfig, params: TensorMap, vocab: BpeVocab) -> Result<Self> {
        Gpt2::new(&params, &config)?;
        if vocab.vocab_size() > config.vocab_size {
            return Err(Error::Config(format!(
                "tokenizer has {} tokens but the model only {}",
                vocab.vocab_size(),
                config.vocab_size
            )));
        }
        let weights_digest = params.content_digest();
        Ok(Self {
            id: id.into(),
            config,
            params,
            vocab,
            weights_digest,
        })
    }

    /// Randomly initialised weights for `config` with the bundled GPT-2
    /// vocabulary. Needs `config.vocab_size` ≥ 50257.
    pub fn random(config: ModelConfig, seed: u64, scale: f32) -> Result<Self> {
        let params = random_parameters(&config, seed, scale)?;
        Self::new(format!("random-{seed}"), config, params, BpeVocab::gpt2()?)
    }

    /// Loads `model.safetensors` from `dir`, with `config.json` if present
    /// (GPT-2 small otherwise) and `vocab.json`/`merges.txt` if present
    /// (the bundled GPT-2 vocabulary otherwise).
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        if !dir.is_dir() {
            return Err(Error::MissingFile(dir.to_path_buf()));
        }
        let config_path = dir.join("config.json");
        let config = if config_path.exists() {
            ModelConfig::from_json_file(&config_path)?
        } else {
            ModelConfig::gpt2_small()
        };
        let weights_path = dir.join("model.safetensors");
        let params = load_weights(&weights_path, &config)?;
        let (vj, mt) = (dir.join("vocab.json"), dir.join("merges.txt"));
        let vocab = if vj.exists() && mt.exists() {
            BpeVocab::from_files(vj, mt)?
        } else {
            BpeVocab::gpt2()?
        };
        let id = dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "model".into());
        let mut bundle = Self::new(id, config, params, vocab)?;
        bundle.weights_digest = file_digest(&weights_path)?;
        Ok(bundle)
    }
}

/// SHA-256 of a file's bytes, hex encoded.
pub fn file_digest(path: impl AsRef<Path>) -> Result<String> {
    use sha2::{Digest, Sha256};
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex(&Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitKind {
    Validation,
    Test,
}

impl SplitKind {
    pub fn select(self, split: &SplitPair) -> &TaskDataset {
        match self {
            SplitKind::Validation => &split.validation,
            SplitKind::Test => &split.test,
        }
    }
}

fn default_tries() -> usize {
    2
}

fn default_repeats() -> usize {
    10
}

fn default_sigma() -> f64 {
    DEFAULT_SIGMA
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub dataset: String,
    pub split: SplitKind,
    /// Demos per prompt.
    pub k: usize,
    #[serde(default = "default_tries")]
    pub tries_per_query: usize,
    pub lambda: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub include: Option<Vec<String>>,
    #[serde(default = "default_repeats")]
    pub n_noise_repeats: usize,
    /// Index of the first repeat; lets a long run be split into pieces.
    #[serde(default)]
    pub first_repeat: usize,
    /// Root of every noise and demo stream.
    pub seed: u64,
    /// Use only the first `max_queries` records of the split.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_queries: Option<usize>,
    #[serde(default)]
    pub prompt: PromptOptions,
    #[serde(default)]
    pub scoring: ScoringOptions,
    #[serde(default)]
    pub model: String,
}

impl ExperimentSpec {
    pub fn new(dataset: impl Into<String>, split: SplitKind, k: usize, lambda: f64, seed: u64) -> Self {
        Self {
            dataset: dataset.into(),
            split,
            k,
            tries_per_query: default_tries(),
            lambda,
            sigma: DEFAULT_SIGMA,
            include: None,
            n_noise_repeats: default_repeats(),
            first_repeat: 0,
            seed,
            max_queries: None,
            prompt: PromptOptions::default(),
            scoring: ScoringOptions::default(),
            model: String::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tries_per_query < 1 {
            return Err(Error::invalid("tries_per_query must be positive"));
        }
        if self.n_noise_repeats < 1 {
            return Err(Error::invalid("n_noise_repeats must be positive"));
        }
        self.noise_config(0).validate()
    }

    pub fn noise_seed(&self, repeat: usize) -> u64 {
        noise_seed(self.seed, repeat)
    }

    pub fn noise_config(&self, repeat: usize) -> NoiseConfig {
        NoiseConfig {
            lambda: self.lambda,
            sigma: self.sigma,
            master_seed: self.noise_seed(repeat),
            include: self.include.clone(),
        }
    }

    pub fn demo_seed(&self, query: usize, try_index: usize) -> u64 {
        derive_seed(self.seed, &format!("demos/k{}/q{query}/t{try_index}", self.k))
    }

    pub fn repeats(&self) -> std::ops::Range<usize> {
        self.first_repeat..self.first_repeat + self.n_noise_repeats
    }
}

/// Seed of the parameter noise for `repeat` under the root `seed`.
pub fn noise_seed(seed: u64, repeat: usize) -> u64 {
    derive_seed(seed, &format!("noise/repeat/{repeat}"))
}

/// One scored (repeat, query, try).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub repeat: usize,
    pub query: usize,
    #[serde(rename = "try")]
    pub try_index: usize,
    #[serde(flatten)]
    pub prediction: PredictionRecord,
}

/// A (query, try) that could not be scored because the prompt overflowed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skip {
    pub repeat: usize,
    pub query: usize,
    #[serde(rename = "try")]
    pub try_index: usize,
    pub required: usize,
    pub available: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatResult {
    pub repeat: usize,
    pub noise_seed: u64,
    pub n_records: usize,
    pub n_skipped: usize,
    /// `None` when every query was skipped.
    pub metrics: Option<MetricSet>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: MetricSet,
    /// Population standard deviation over repeats.
    pub std: MetricSet,
    pub repeats: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub spec: ExperimentSpec,
    pub num_labels: usize,
    pub n_queries: usize,
    pub records: Vec<RunRecord>,
    pub skips: Vec<Skip>,
    pub repeats: Vec<RepeatResult>,
    pub aggregate: Option<Aggregate>,
}

impl RunResult {
    pub fn predictions(&self) -> Vec<PredictionRecord> {
        self.records.iter().map(|r| r.prediction.clone()).collect()
    }

    pub fn repeat_predictions(&self, repeat: usize) -> Vec<PredictionRecord> {
        self.records
            .iter()
            .filter(|r| r.repeat == repeat)
            .map(|r| r.prediction.clone())
            .collect()
    }

    pub fn skip_fraction(&self) -> f64 {
        let attempted = self.n_queries * self.spec.tries_per_query * self.repeats.len();
        if attempted == 0 {
            0.0
        } else {
            self.skips.len() as f64 / attempted as f64
        }
    }

    /// Combines runs of the same spec that cover disjoint repeat ranges.
    pub fn merge(mut self, other: RunResult) -> Result<RunResult> {
        let comparable = |s: &ExperimentSpec| {
            let mut s = s.clone();
            s.first_repeat = 0;
            s.n_noise_repeats = 0;
            s
        };
        if comparable(&self.spec) != comparable(&other.spec) {
            return Err(Error::invalid("cannot merge runs of different experiments"));
        }
        if self.repeats.iter().any(|a| other.repeats.iter().any(|b| a.repeat == b.repeat)) {
            return Err(Error::invalid("runs share a repeat index"));
        }
        self.records.extend(other.records);
        self.skips.extend(other.skips);
        self.repeats.extend(other.repeats);
        self.records.sort_by_key(|r| (r.repeat, r.query, r.try_index));
        self.skips.sort_by_key(|s| (s.repeat, s.query, s.try_index));
        self.repeats.sort_by_key(|r| r.repeat);
        self.spec.first_repeat = self.repeats[0].repeat;
        self.spec.n_noise_repeats = self.repeats.len();
        self.aggregate = aggregate(&self.repeats);
        Ok(self)
    }
}

fn aggregate(repeats: &[RepeatResult]) -> Option<Aggregate> {
    let sets: Vec<MetricSet> = repeats.iter().filter_map(|r| r.metrics).collect();
    if sets.is_empty() {
        return None;
    }
    let n = sets.len() as f64;
    let mean_of = |f: fn(&MetricSet) -> f64| sets.iter().map(f).sum::<f64>() / n;
    let std_of = |f: fn(&MetricSet) -> f64, mean: f64| {
        (sets.iter().map(|s| (f(s) - mean).powi(2)).sum::<f64>() / n).sqrt()
    };
    let mean = MetricSet {
        accuracy: mean_of(|m| m.accuracy),
        macro_f1: mean_of(|m| m.macro_f1),
        ece1: mean_of(|m| m.ece1),
    };
    let std = MetricSet {
        accuracy: std_of(|m| m.accuracy, mean.accuracy),
        macro_f1: std_of(|m| m.macro_f1, mean.macro_f1),
        ece1: std_of(|m| m.ece1, mean.ece1),
    };
    Some(Aggregate {
        mean,
        std,
        repeats: sets.len(),
    })
}

enum Outcome {
    Scored(RunRecord),
    Skipped(Skip),
}

fn perturbed<'a>(bundle: &'a ModelBundle, noise: &NoiseConfig) -> Result<Cow<'a, TensorMap>> {
    if noise.lambda == 0.0 {
        noise.validate()?;
        Ok(Cow::Borrowed(&bundle.params))
    } else {
        Ok(Cow::Owned(perturb(&bundle.params, noise)?))
    }
}

pub fn run_experiment(bundle: &ModelBundle, split: &SplitPair, spec: &ExperimentSpec) -> Result<RunResult> {
    spec.validate()?;
    let pool = spec.split.select(split);
    let n_queries = spec.max_queries.map_or(pool.len(), |m| m.min(pool.len()));
    if spec.k >= pool.len() {
        return Err(Error::invalid(format!(
            "k = {} needs at least {} records in the {:?} split, found {}",
            spec.k,
            spec.k + 1,
            spec.split,
            pool.len()
        )));
    }

    let mut records = Vec::new();
    let mut skips = Vec::new();
    let mut repeats = Vec::new();
    for repeat in spec.repeats() {
        let noise = spec.noise_config(repeat);
        let params = perturbed(bundle, &noise)?;
        let model = Gpt2::new(&params, &bundle.config)?;
        let jobs: Vec<(usize, usize)> = (0..n_queries)
            .flat_map(|q| (0..spec.tries_per_query).map(move |t| (q, t)))
            .collect();
        let outcomes = jobs
            .par_iter()
            .map(|&(query, try_index)| {
                let mut rng = SplitMix64::new(spec.demo_seed(query, try_index));
                let demos = sample_demos(pool, spec.k, &mut rng, Some(query))?;
                let target = &pool.records[query];
                let prompt = build_prompt(&demos, target, &pool.label_space, pool.category, spec.prompt)?;
                match score_labels(&model, &bundle.vocab, prompt.as_str(), &pool.label_space, spec.scoring) {
                    Ok(dist) => Ok(Outcome::Scored(RunRecord {
                        repeat,
                        query,
                        try_index,
                        prediction: PredictionRecord {
                            predicted: dist.predicted,
                            gold: target.label,
                            confidence: dist.confidence,
                            probs: Some(dist.probs),
                        },
                    })),
                    Err(Error::ContextOverflow { required, available }) => Ok(Outcome::Skipped(Skip {
                        repeat,
                        query,
                        try_index,
                        required,
                        available,
                    })),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<Vec<_>>>()?;

        let mut scored = Vec::new();
        let mut skipped = 0;
        for o in outcomes {
            match o {
                Outcome::Scored(r) => scored.push(r),
                Outcome::Skipped(s) => {
                    skipped += 1;
                    skips.push(s);
                }
            }
        }
        let predictions: Vec<PredictionRecord> = scored.iter().map(|r| r.prediction.clone()).collect();
        let metrics = if predictions.is_empty() {
            None
        } else {
            Some(MetricSet::compute(&predictions, pool.num_labels())?)
        };
        if skipped > 0 {
            log::warn!(
                "repeat {repeat}: skipped {skipped} of {} prompts (context overflow)",
                jobs.len()
            );
        }
        repeats.push(RepeatResult {
            repeat,
            noise_seed: noise.master_seed,
            n_records: scored.len(),
            n_skipped: skipped,
            metrics,
        });
        records.extend(scored);
    }

    let aggregate = aggregate(&repeats);
    Ok(RunResult {
        spec: spec.clone(),
        num_labels: pool.num_labels(),
        n_queries,
        records,
        skips,
        repeats,
        aggregate,
    })
}

/// Independent runs for each demo count in `ks`.
pub fn k_sweep(
    bundle: &ModelBundle,
    split: &SplitPair,
    spec: &ExperimentSpec,
    ks: &[usize],
) -> Result<BTreeMap<usize, RunResult>> {
    let mut out = BTreeMap::new();
    for &k in ks {
        let mut s = spec.clone();
        s.k = k;
        let result = run_experiment(bundle, split, &s)?;
        if result.aggregate.is_none() {
            log::warn!("k = {k}: every prompt overflowed the context; no metrics");
        }
        out.insert(k, result);
    }
    Ok(out)
}

/// Grid search where every `(λ, seed)` job is one noise repeat of `base`
/// with repeat index `seed`. An all-skipped job scores zero accuracy.
pub fn search_lambda(
    bundle: &ModelBundle,
    split: &SplitPair,
    base: &ExperimentSpec,
    grid: &LambdaGrid,
    n_seeds: usize,
) -> Result<LambdaSearchResult> {
    grid_search_sequential(grid, n_seeds, |lambda, seed| {
        let mut spec = base.clone();
        spec.lambda = lambda;
        spec.first_repeat = seed;
        spec.n_noise_repeats = 1;
        let run = run_experiment(bundle, split, &spec)?;
        Ok(run.repeats[0].metrics.unwrap_or(MetricSet {
            accuracy: 0.0,
            macro_f1: 0.0,
            ece1: 0.0,
        }))
    })
}
