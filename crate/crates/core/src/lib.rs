//! Noise-interpolated in-context learning workbench.
//!
//! The crate bundles everything needed to study how Gaussian parameter
//! interpolation (`θ' = (1-λ)θ + λ·N(0, σ²)`) changes the few-shot
//! classification behaviour and calibration of a GPT-2 class language model:
//!
//! - [`tensor`] / [`model`]: safetensors loading and a CPU GPT-2 forward pass
//! - [`tokenizer`]: byte-level BPE compatible with the GPT-2 vocabulary
//! - [`perturbation`]: reproducible, order-independent noise interpolation
//! - [`dataset`], [`prompt`], [`decoder`]: data splits, prompt templates and
//!   label-space constrained scoring
//! - [`metrics`], [`entropy`]: accuracy, macro-F1, ECE₁, reliability bins and
//!   the normalized token/label entropy probes
//! - [`search`], [`harness`], [`artifacts`]: λ grid search, experiment
//!   orchestration and on-disk run artifacts
//!
//! Runnable walkthroughs for each capability live in the crate's `examples/`
//! directory.

pub mod artifacts;
pub mod dataset;
pub mod decoder;
pub mod entropy;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod perturbation;
pub mod prompt;
pub mod rng;
pub mod search;
pub mod tensor;
pub mod tokenizer;

pub use crate::dataset::{Category, DatasetConfig, SplitPair, TaskDataset, TaskRecord};
pub use crate::decoder::{LabelDistribution, ScoreMode};
pub use crate::error::{Error, Result};
pub use crate::harness::{ExperimentSpec, ModelBundle, RunResult, SplitKind};
pub use crate::metrics::PredictionRecord;
pub use crate::model::{Gpt2, LanguageModel, Logits, ModelConfig};
pub use crate::perturbation::NoiseConfig;
pub use crate::prompt::PromptString;
pub use crate::tensor::{Tensor, TensorMap};
pub use crate::tokenizer::BpeVocab;
