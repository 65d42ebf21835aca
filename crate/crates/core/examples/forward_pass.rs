// One GPT-2 forward pass and the most likely next tokens.
//
// Uses the checkpoint in `NOISYICL_MODEL_DIR` when set, otherwise a randomly
// initialised two-layer model over the GPT-2 vocabulary.
//
//     NOISYICL_MODEL_DIR=models/gpt2 cargo run --release --example forward_pass

use noisyicl::{Gpt2, LanguageModel, ModelBundle, ModelConfig, Result};

pub fn load_model() -> Result<ModelBundle> {
    match std::env::var_os("NOISYICL_MODEL_DIR") {
        Some(dir) => ModelBundle::load_dir(dir),
        None => {
            let config = ModelConfig {
                n_layers: 2,
                n_heads: 2,
                d_model: 32,
                vocab_size: 50257,
                max_context: 128,
                layernorm_eps: 1e-5,
            };
            ModelBundle::random(config, 0, 0.2)
        }
    }
}

pub fn run_example(prompt: &str) -> Result<Vec<(u32, f64)>> {
    let bundle = load_model()?;
    let model = Gpt2::new(&bundle.params, &bundle.config)?;
    let tokens = bundle.vocab.encode(prompt);
    let logits = model.next_token_logits(&tokens)?;
    let probs = logits.softmax();

    let mut ranked: Vec<(u32, f64)> = probs.iter().enumerate().map(|(i, &p)| (i as u32, p)).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    ranked.truncate(5);
    println!("model {} ({} parameters)", bundle.id, bundle.config.num_parameters());
    println!("prompt {prompt:?} -> top next tokens:");
    for &(id, p) in &ranked {
        println!("  {:>8.4}  {:?}", p, bundle.vocab.decode(&[id])?);
    }

    // Scoring a continuation reuses the prompt's key/value cache.
    let cont = bundle.vocab.encode(" Paris");
    let lp = model.sequence_logprob(&tokens, &cont)?;
    println!("log p(\" Paris\" | prompt) = {lp:.4}");
    Ok(ranked)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example("The capital of France is").map(|_| ())
}
