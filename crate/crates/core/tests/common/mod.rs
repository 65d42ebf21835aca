#![allow(dead_code)]

use std::path::PathBuf;

use noisyicl::model::{load_weights, Gpt2};
use noisyicl::{Category, ModelBundle, ModelConfig, TaskDataset, TaskRecord, TensorMap};
use serde::Deserialize;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// A two-layer model over the full GPT-2 vocabulary with random weights.
pub fn tiny_config() -> ModelConfig {
    ModelConfig {
        n_layers: 2,
        n_heads: 2,
        d_model: 16,
        vocab_size: 50257,
        max_context: 256,
        layernorm_eps: 1e-5,
    }
}

pub fn tiny_bundle(seed: u64) -> ModelBundle {
    ModelBundle::random(tiny_config(), seed, 0.3).unwrap()
}

const POSITIVE: [&str; 8] = ["great", "lovely", "superb", "moving", "fun", "clever", "warm", "bright"];
const NEGATIVE: [&str; 8] = ["dull", "awful", "boring", "clumsy", "flat", "tedious", "weak", "bland"];
const NOUNS: [&str; 6] = ["film", "movie", "story", "cast", "script", "plot"];

/// `n` short sentiment sentences, labels alternating.
pub fn sentiment_dataset(n: usize) -> TaskDataset {
    let records = (0..n)
        .map(|i| {
            let label = i % 2;
            let adj = if label == 1 { POSITIVE[i / 2 % 8] } else { NEGATIVE[i / 2 % 8] };
            TaskRecord::single(format!("a {adj} {}", NOUNS[i % 6]), label)
        })
        .collect();
    TaskDataset::new(
        "synthetic-sst",
        Category::Single,
        vec!["negative".into(), "positive".into()],
        false,
        records,
    )
    .unwrap()
}

#[derive(Deserialize)]
pub struct LogitCase {
    pub tokens: Vec<u32>,
    pub last_logits: Vec<f32>,
    pub all_logits: Option<Vec<Vec<f32>>>,
}

#[derive(Deserialize)]
pub struct LogitGolden {
    pub cases: Vec<LogitCase>,
}

/// Largest absolute deviation from a reference logits file, over every
/// stored position, computed both without and with the KV cache.
pub fn max_logit_deviation(params: &TensorMap, config: &ModelConfig, golden: &LogitGolden) -> f32 {
    let model = Gpt2::new(params, config).unwrap();
    let mut worst = 0f32;
    let mut track = |a: &[f32], b: &[f32]| {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            worst = worst.max((x - y).abs());
        }
    };
    for case in &golden.cases {
        track(model.forward(&case.tokens).unwrap().values(), &case.last_logits);
        if let Some(all) = &case.all_logits {
            let ours = model.forward_all(&case.tokens).unwrap();
            for (o, r) in ours.iter().zip(all) {
                track(o.values(), r);
            }
            let mut cache = model.new_cache();
            for (i, &t) in case.tokens.iter().enumerate() {
                let step = model.extend(&mut cache, &[t]).unwrap();
                track(step[0].values(), &all[i]);
            }
        }
    }
    worst
}

pub fn load_golden(path: PathBuf) -> LogitGolden {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn tiny_reference() -> (TensorMap, ModelConfig, LogitGolden) {
    let dir = fixtures().join("tiny_gpt2");
    let config = ModelConfig::from_json_file(dir.join("config.json")).unwrap();
    let params = load_weights(dir.join("model.safetensors"), &config).unwrap();
    (params, config, load_golden(dir.join("reference_logits.json")))
}
