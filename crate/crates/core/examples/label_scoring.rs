// Label-space constrained prediction: each verbalizer is scored as a
// continuation of the prompt and the scores are renormalized.

use noisyicl::decoder::{score_labels, ScoreMode, ScoringOptions};
use noisyicl::prompt::{build_prompt, PromptOptions};
use noisyicl::{Category, Gpt2, LabelDistribution, ModelBundle, ModelConfig, Result, TaskRecord};

pub fn run_example() -> Result<LabelDistribution> {
    let bundle = match std::env::var_os("NOISYICL_MODEL_DIR") {
        Some(dir) => ModelBundle::load_dir(dir)?,
        None => ModelBundle::random(
            ModelConfig {
                n_layers: 2,
                n_heads: 2,
                d_model: 32,
                vocab_size: 50257,
                max_context: 256,
                layernorm_eps: 1e-5,
            },
            3,
            0.2,
        )?,
    };
    let model = Gpt2::new(&bundle.params, &bundle.config)?;
    let labels = vec!["negative".to_string(), "positive".to_string()];
    let demos = [TaskRecord::single("a warm, clever comedy", 1), TaskRecord::single("flat and tedious", 0)];
    let refs: Vec<&TaskRecord> = demos.iter().collect();
    let prompt = build_prompt(&refs, &TaskRecord::single("a bright, moving story", 1), &labels, Category::Single, PromptOptions::default())?;
    println!("{prompt}");

    let dist = score_labels(&model, &bundle.vocab, prompt.as_str(), &labels, ScoringOptions::default())?;
    for (label, (p, raw)) in labels.iter().zip(dist.probs.iter().zip(&dist.raw_scores)) {
        println!("  {label:<9} p = {p:.4}  log p = {raw:.4}");
    }
    println!("predicted {:?} with confidence {:.4}", labels[dist.predicted], dist.confidence);

    // Mean per-token scoring, for verbalizers of different token lengths.
    let mean = ScoringOptions { mode: ScoreMode::Mean, ..ScoringOptions::default() };
    let alt = score_labels(&model, &bundle.vocab, prompt.as_str(), &labels, mean)?;
    println!("mean-token scoring: {:?}", alt.probs);
    Ok(dist)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
