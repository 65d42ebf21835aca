mod common;

use noisyicl::model::{load_weights, Gpt2};
use noisyicl::{LanguageModel, ModelConfig};

#[test]
fn tiny_model_matches_reference_logits() {
    let (params, config, golden) = common::tiny_reference();
    let dev = common::max_logit_deviation(&params, &config, &golden);
    assert!(dev < 1e-4, "max deviation {dev}");
}

#[test]
fn tiny_model_label_scores_match_reference_log_softmax() {
    let (params, config, golden) = common::tiny_reference();
    let model = Gpt2::new(&params, &config).unwrap();
    let case = golden.cases.iter().find(|c| c.all_logits.is_some() && c.tokens.len() > 4).unwrap();
    let (prefix, cont) = case.tokens.split_at(3);
    let ours = model.continuation_logprobs(prefix, cont).unwrap();
    let all = case.all_logits.as_ref().unwrap();
    for (i, &tok) in cont.iter().enumerate() {
        let row: Vec<f64> = all[2 + i].iter().map(|&v| v as f64).collect();
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        let expect = row[tok as usize] - lse;
        assert!((ours[i] - expect).abs() < 1e-4, "{} vs {expect}", ours[i]);
    }
}

#[test]
fn hf_config_with_extra_keys_parses() {
    let cfg = ModelConfig::from_json_file(common::fixtures().join("tiny_gpt2/config.json")).unwrap();
    assert_eq!((cfg.n_layers, cfg.n_heads, cfg.d_model, cfg.vocab_size, cfg.max_context), (2, 4, 32, 512, 64));
}

#[test]
fn wrong_config_is_a_shape_error() {
    let mut cfg = ModelConfig::from_json_file(common::fixtures().join("tiny_gpt2/config.json")).unwrap();
    cfg.d_model = 64;
    let err = load_weights(common::fixtures().join("tiny_gpt2/model.safetensors"), &cfg).unwrap_err();
    assert!(matches!(err, noisyicl::Error::ShapeMismatch { .. }), "{err}");
}
