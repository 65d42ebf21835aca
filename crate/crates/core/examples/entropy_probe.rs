// Normalized next-token entropy of an empty input as the parameters are
// interpolated towards noise, and the label entropy of query-less prompts.

use noisyicl::entropy::{label_entropy, token_entropy, LabelEntropyOptions};
use noisyicl::harness::noise_seed;
use noisyicl::perturbation::{perturb, NoiseConfig};
use noisyicl::{Category, Gpt2, ModelBundle, ModelConfig, Result, TaskDataset, TaskRecord};

fn bundle() -> Result<ModelBundle> {
    match std::env::var_os("NOISYICL_MODEL_DIR") {
        Some(dir) => ModelBundle::load_dir(dir),
        None => ModelBundle::random(
            ModelConfig {
                n_layers: 2,
                n_heads: 2,
                d_model: 32,
                vocab_size: 50257,
                max_context: 256,
                layernorm_eps: 1e-5,
            },
            5,
            0.5,
        ),
    }
}

/// Mean token entropy of `"Label: "` per λ, averaged over `seeds` noise draws.
pub fn run_example(seeds: usize) -> Result<Vec<(f64, f64)>> {
    let bundle = bundle()?;
    let mut curve = Vec::new();
    for lambda in [0.0, 0.2, 0.5, 1.0] {
        let mut total = 0.0;
        for s in 0..seeds {
            let params = perturb(&bundle.params, &NoiseConfig::new(lambda, noise_seed(0, s)))?;
            let model = Gpt2::new(&params, &bundle.config)?;
            total += token_entropy(&model, &bundle.vocab, "Label: ", lambda)?.value;
        }
        curve.push((lambda, total / seeds as f64));
        println!("λ = {lambda:<4} mean token entropy {:.4}", total / seeds as f64);
    }

    let records = (0..40)
        .map(|i| TaskRecord::single(if i % 2 == 0 { "dull and flat" } else { "warm and clever" }, i % 2))
        .collect();
    let ds = TaskDataset::new("toy", Category::Single, vec!["negative".into(), "positive".into()], false, records)?;
    let model = Gpt2::new(&bundle.params, &bundle.config)?;
    let opts = LabelEntropyOptions { tries: 32, ..LabelEntropyOptions::default() };
    let h = label_entropy(&model, &bundle.vocab, &ds, &opts, 0.0)?;
    println!("label entropy over {} query-less prompts: {:.4}", opts.tries, h.value);
    Ok(curve)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example(3).map(|_| ())
}
