// A complete noisy few-shot evaluation with on-disk artifacts and replay.
//
// Runs a randomly initialised model on a synthetic sentiment set. Point
// `NOISYICL_MODEL_DIR` at a GPT-2 checkpoint to use real weights.

use noisyicl::artifacts::{read_records, write_run, PreparedData, RunManifest};
use noisyicl::dataset::{split, SPLIT_SEED};
use noisyicl::harness::run_experiment;
use noisyicl::{Category, DatasetConfig, ExperimentSpec, ModelBundle, ModelConfig, Result, RunResult, SplitKind};
use noisyicl::{TaskDataset, TaskRecord};

fn sentiment(n: usize) -> Result<TaskDataset> {
    let good = ["great", "warm", "clever", "moving"];
    let bad = ["dull", "flat", "tedious", "clumsy"];
    let records = (0..n)
        .map(|i| {
            let word = if i % 2 == 1 { good[i / 2 % 4] } else { bad[i / 2 % 4] };
            TaskRecord::single(format!("a {word} film, take {i}"), i % 2)
        })
        .collect();
    TaskDataset::new("toy-sentiment", Category::Single, vec!["negative".into(), "positive".into()], false, records)
}

pub fn run_example(queries: usize) -> Result<RunResult> {
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
            7,
            0.2,
        )?,
    };
    let ds = sentiment(200)?;
    let sp = split(&ds, SPLIT_SEED)?;

    let mut spec = ExperimentSpec::new("toy-sentiment", SplitKind::Test, 4, 0.01, 0);
    spec.n_noise_repeats = 3;
    spec.max_queries = Some(queries);
    let run = run_experiment(&bundle, &sp, &spec)?;

    for r in &run.repeats {
        if let Some(m) = r.metrics {
            println!("repeat {}: accuracy {:.3}  macro-F1 {:.3}  ECE1 {:.3}", r.repeat, m.accuracy, m.macro_f1, m.ece1);
        }
    }
    if let Some(agg) = run.aggregate {
        println!(
            "mean ± std: accuracy {:.3}±{:.3}  ECE1 {:.3}±{:.3}",
            agg.mean.accuracy, agg.std.accuracy, agg.mean.ece1, agg.std.ece1
        );
    }

    let out = tempfile::tempdir().expect("temporary directory");
    let data = PreparedData {
        config: DatasetConfig {
            name: ds.name.clone(),
            path: "in-memory".into(),
            format: None,
            category: ds.category,
            text_field: "text".into(),
            text2_field: None,
            aspect_field: None,
            label_field: "label".into(),
            labels: ds.label_space.clone(),
            label_values: None,
            has_neutral: false,
            max_len: None,
            split_seed: None,
        },
        dataset: ds,
        split: sp,
        split_seed: SPLIT_SEED,
        digest: "in-memory".into(),
    };
    write_run(out.path(), &RunManifest::new(None, &bundle, &data, &spec), &run)?;
    let back = read_records(out.path().join("records.jsonl"))?;
    assert_eq!(back, run.records);
    println!("{} records written to and read back from records.jsonl", back.len());
    Ok(run)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example(32).map(|_| ())
}
