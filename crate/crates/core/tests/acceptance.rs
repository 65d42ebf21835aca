//! Acceptance suite. Prints one `PASS`, `FAIL` or `SKIP` line per criterion
//! and exits non-zero if any criterion fails.
//!
//! Criteria 11 to 13 need the GPT-2 small checkpoint and are skipped unless
//! `NOISYICL_GPT2_DIR` names a directory holding `model.safetensors` and
//! `golden_logits.json` (see `scripts/make_golden_logits.py`). Criterion 13
//! also needs `NOISYICL_SST2_CONFIG`, a dataset config for SST-2 format data.
//! Rows suffixed `-sub` are always-on stand-ins on small random models.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use noisyicl::artifacts::{prepare_data, replay, write_run, RunManifest};
use noisyicl::dataset::split;
use noisyicl::entropy::{frequency_entropy, normalized_entropy, token_entropy};
use noisyicl::harness::{noise_seed, run_experiment};
use noisyicl::metrics::{ece1, macro_f1, PredictionRecord};
use noisyicl::model::{load_weights, Gpt2};
use noisyicl::perturbation::{perturb, perturb_with_threads, NoiseConfig};
use noisyicl::prompt::{build_prompt, build_queryless_prompt, PromptOptions};
use noisyicl::rng::{derive_seed, SplitMix64};
use noisyicl::search::{grid_search, stability_stats, LambdaGrid};
use noisyicl::{BpeVocab, Category, DatasetConfig, ExperimentSpec, ModelBundle, SplitKind, TaskDataset, TaskRecord};
use noisyicl::{ModelConfig, Tensor, TensorMap};

enum Outcome {
    Pass(String),
    Skip(String),
}

type Check = fn() -> Result<Outcome, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn unit(rng: &mut SplitMix64) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn random_map(rng: &mut SplitMix64) -> TensorMap {
    let specials = [0.0f32, -0.0, f32::MIN_POSITIVE / 4.0, 1e30, -1e-30, 1.0, -7.5];
    let mut map = TensorMap::new();
    for t in 0..1 + rng.below(5) {
        let shape: Vec<usize> = (0..1 + rng.below(3)).map(|_| 1 + rng.below(40) as usize).collect();
        let n: usize = shape.iter().product();
        let data = (0..n)
            .map(|_| {
                if rng.below(4) == 0 {
                    specials[rng.below(specials.len() as u64) as usize]
                } else {
                    (unit(rng) * 20.0 - 10.0) as f32
                }
            })
            .collect();
        map.insert(format!("h.{t}.w"), Tensor::new(shape, data).unwrap()).unwrap();
    }
    map
}

fn bits_equal(a: &TensorMap, b: &TensorMap) -> bool {
    a.names().eq(b.names())
        && a.iter().zip(b.iter()).all(|((_, x), (_, y))| {
            x.shape() == y.shape() && x.data().iter().zip(y.data()).all(|(p, q)| p.to_bits() == q.to_bits())
        })
}

fn c1_perturbation_identity() -> Result<Outcome, String> {
    let mut rng = SplitMix64::new(1);
    for i in 0..20 {
        let map = random_map(&mut rng);
        let out = perturb(&map, &NoiseConfig::new(0.0, rng.next_u64())).map_err(|e| e.to_string())?;
        ensure(bits_equal(&map, &out), || format!("map {i} changed at λ = 0"))?;
    }
    Ok(Outcome::Pass("20 random maps bitwise identical".into()))
}

fn normal_cdf(x: f64, sigma: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / (sigma * std::f64::consts::SQRT_2)))
}

fn c2_perturbation_statistics() -> Result<Outcome, String> {
    let n = 1_000_000;
    let mut map = TensorMap::new();
    map.insert("w", Tensor::new(vec![1000, 1000], vec![0.37; n]).unwrap()).unwrap();
    let out = perturb(&map, &NoiseConfig::new(1.0, 2024)).map_err(|e| e.to_string())?;
    let mut xs: Vec<f64> = out.get("w").unwrap().data().iter().map(|&v| v as f64).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let std = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    xs.sort_by(f64::total_cmp);
    let ks = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf(x, 0.02);
            (f - i as f64 / n as f64).max((i + 1) as f64 / n as f64 - f)
        })
        .fold(0.0, f64::max);
    let critical = 1.628 / (n as f64).sqrt();
    let detail = format!("mean {mean:.2e}, std {std:.5}, KS {ks:.5} < {critical:.5}");
    ensure(mean.abs() <= 2e-4, || format!("mean out of range: {detail}"))?;
    ensure((0.0196..=0.0204).contains(&std), || format!("std out of range: {detail}"))?;
    ensure(ks < critical, || format!("KS too large: {detail}"))?;
    Ok(Outcome::Pass(detail))
}

fn c3_parallel_determinism() -> Result<Outcome, String> {
    let cfg = ModelConfig {
        n_layers: 4,
        n_heads: 4,
        d_model: 128,
        vocab_size: 2000,
        max_context: 256,
        layernorm_eps: 1e-5,
    };
    let params = noisyicl::model::random_parameters(&cfg, 9, 0.02).map_err(|e| e.to_string())?;
    let noise = NoiseConfig::new(0.3, 77);
    let one = perturb_with_threads(&params, &noise, 1).map_err(|e| e.to_string())?;
    let eight = perturb_with_threads(&params, &noise, 8).map_err(|e| e.to_string())?;
    ensure(bits_equal(&one, &eight), || "1 and 8 workers differ".into())?;
    Ok(Outcome::Pass(format!("{} elements bitwise equal", params.num_elements())))
}

fn random_records(rng: &mut SplitMix64) -> (Vec<PredictionRecord>, usize) {
    let labels = 2 + rng.below(3) as usize;
    let n = 1 + rng.below(50) as usize;
    let used = 1 + rng.below(labels as u64) as usize;
    let records = (0..n)
        .map(|_| {
            let confidence = match rng.below(4) {
                0 => rng.below(11) as f64 / 10.0,
                1 => 1.0 / labels as f64,
                _ => unit(rng),
            };
            PredictionRecord::new(rng.below(used as u64) as usize, rng.below(used as u64) as usize, confidence)
        })
        .collect();
    (records, labels)
}

fn brute_force_ece(records: &[PredictionRecord], m: usize) -> f64 {
    let mut total = 0.0;
    for j in 1..=m {
        let lo = (j - 1) as f64 / m as f64;
        let hi = j as f64 / m as f64;
        let members: Vec<&PredictionRecord> = records
            .iter()
            .filter(|r| (r.confidence > lo || (j == 1 && r.confidence == 0.0)) && r.confidence <= hi)
            .collect();
        if members.is_empty() {
            continue;
        }
        let size = members.len() as f64;
        let acc = members.iter().filter(|r| r.predicted == r.gold).count() as f64 / size;
        let conf = members.iter().map(|r| r.confidence).sum::<f64>() / size;
        total += size / records.len() as f64 * (acc - conf).abs();
    }
    total
}

fn c4_ece_oracle() -> Result<Outcome, String> {
    let mut rng = SplitMix64::new(4);
    let mut worst = 0f64;
    for i in 0..200 {
        let (records, _) = random_records(&mut rng);
        let ours = ece1(&records, 10).map_err(|e| e.to_string())?;
        let dev = (ours - brute_force_ece(&records, 10)).abs();
        worst = worst.max(dev);
        ensure(dev <= 1e-12, || format!("set {i}: deviation {dev:e}"))?;
    }
    let hand_a = vec![PredictionRecord::new(1, 1, 0.95); 3];
    let mut hand_b = vec![PredictionRecord::new(1, 0, 0.95); 4];
    hand_b.extend(vec![PredictionRecord::new(0, 0, 0.55); 6]);
    let a = ece1(&hand_a, 10).map_err(|e| e.to_string())?;
    let b = ece1(&hand_b, 10).map_err(|e| e.to_string())?;
    ensure((a - 0.05).abs() <= 1e-12, || format!("hand case 0.05 gave {a}"))?;
    ensure((b - 0.65).abs() <= 1e-12, || format!("hand case 0.65 gave {b}"))?;
    Ok(Outcome::Pass(format!("200 sets, max deviation {worst:.1e}; hand cases {a:.12} and {b:.12}")))
}

fn brute_force_macro_f1(records: &[PredictionRecord], labels: usize) -> f64 {
    let mut confusion = vec![vec![0usize; labels]; labels];
    for r in records {
        confusion[r.gold][r.predicted] += 1;
    }
    let mut total = 0.0;
    for (c, row) in confusion.iter().enumerate() {
        let tp = row[c] as f64;
        let predicted: usize = confusion.iter().map(|g| g[c]).sum();
        let actual: usize = row.iter().sum();
        let precision = if predicted == 0 { 0.0 } else { tp / predicted as f64 };
        let recall = if actual == 0 { 0.0 } else { tp / actual as f64 };
        if precision + recall > 0.0 {
            total += 2.0 * precision * recall / (precision + recall);
        }
    }
    total / labels as f64
}

fn c5_macro_f1_oracle() -> Result<Outcome, String> {
    let mut rng = SplitMix64::new(5);
    let mut absent = 0;
    let mut worst = 0f64;
    for i in 0..200 {
        let (records, labels) = random_records(&mut rng);
        if (0..labels).any(|c| records.iter().all(|r| r.gold != c && r.predicted != c)) {
            absent += 1;
        }
        let ours = macro_f1(&records, labels).map_err(|e| e.to_string())?;
        let dev = (ours - brute_force_macro_f1(&records, labels)).abs();
        worst = worst.max(dev);
        ensure(dev <= 1e-12, || format!("set {i}: deviation {dev:e}"))?;
    }
    ensure(absent > 0, || "no absent-class case generated".into())?;
    Ok(Outcome::Pass(format!("200 sets ({absent} with an absent class), max deviation {worst:.1e}")))
}

fn c6_entropy_bounds() -> Result<Outcome, String> {
    let v = 50257;
    let uniform = normalized_entropy(&vec![1.0 / v as f64; v]);
    let mut one_hot = vec![0.0; v];
    one_hot[42] = 1.0;
    let hot = normalized_entropy(&one_hot);
    let split = frequency_entropy(&[384, 128]);
    ensure((uniform - 1.0).abs() <= 1e-9, || format!("uniform gave {uniform}"))?;
    ensure(hot == 0.0 && hot.is_sign_positive(), || format!("one-hot gave {hot}"))?;
    ensure((split - 0.8113).abs() <= 1e-4, || format!("384/128 gave {split}"))?;
    ensure(frequency_entropy(&[512, 0]) == 0.0, || "degenerate tally not 0".into())?;
    ensure((frequency_entropy(&[256, 256]) - 1.0).abs() <= 1e-12, || "even tally not 1".into())?;
    Ok(Outcome::Pass(format!("uniform {uniform:.12}, one-hot {hot}, 384/128 {split:.4}")))
}

fn c7_prompt_golden() -> Result<Outcome, String> {
    let opts = PromptOptions::default();
    let sentiment = vec!["negative".to_string(), "positive".to_string()];
    let render = |demos: &[&TaskRecord], q: &TaskRecord, cat| {
        build_prompt(demos, q, &sentiment, cat, opts).map(|p| p.text).map_err(|e| e.to_string())
    };
    let cases: Vec<(String, &str)> = vec![
        (
            render(&[&TaskRecord::single("good movie", 1)], &TaskRecord::single("bad film", 0), Category::Single)?,
            "Input: good movie, Label: positive\nInput: bad film, Label: ",
        ),
        (
            render(
                &[&TaskRecord::aspect("the pasta was superb", "food", 1)],
                &TaskRecord::aspect("we waited an hour", "service", 0),
                Category::Aspect,
            )?,
            "Input: the pasta was superb, Aspect: food, Label: positive\nInput: we waited an hour, Aspect: service, Label: ",
        ),
        (
            render(&[], &TaskRecord::pair("a man sleeps", "a person rests", 1), Category::Pair)?,
            "Input: a man sleeps, Text 2: a person rests, Label: ",
        ),
        (
            build_queryless_prompt(&[&TaskRecord::single("good", 1)], &sentiment, Category::Single, opts)
                .map_err(|e| e.to_string())?
                .text,
            "Input: good, Label: positive\nInput: , Label: ",
        ),
        (
            build_queryless_prompt(&[&TaskRecord::pair("a", "b", 0)], &sentiment, Category::Pair, opts)
                .map_err(|e| e.to_string())?
                .text,
            "Input: a, Text 2: b, Label: negative\nInput: , Text 2: , Label: ",
        ),
    ];
    for (i, (got, want)) in cases.iter().enumerate() {
        ensure(got == want, || format!("case {i}: {got:?} != {want:?}"))?;
    }
    let four: Vec<TaskRecord> = (0..4).map(|i| TaskRecord::single(format!("x{i}"), i % 2)).collect();
    let refs: Vec<&TaskRecord> = four.iter().collect();
    let q = build_queryless_prompt(&refs, &sentiment, Category::Single, opts).map_err(|e| e.to_string())?;
    let lines: Vec<&str> = q.text.split('\n').collect();
    ensure(lines.len() == 5 && lines[4] == "Input: , Label: ", || format!("4-demo layout: {:?}", q.text))?;
    let query = TaskRecord::single("q", 0);
    let bare = render(&[], &query, Category::Single)?;
    ensure(render(&refs, &query, Category::Single)?.ends_with(&bare), || "zero-demo prompt is not a suffix".into())?;
    ensure(build_queryless_prompt(&[], &sentiment, Category::Single, opts).is_err(), || {
        "query-less prompt accepted no demos".into()
    })?;
    Ok(Outcome::Pass("5 worked examples byte-exact, 4-demo layout and suffix property hold".into()))
}

#[derive(serde::Deserialize)]
struct SplitGolden {
    validation: Vec<usize>,
    test: Vec<usize>,
}

fn c8_split_determinism() -> Result<Outcome, String> {
    let text = std::fs::read_to_string(common::fixtures().join("split_golden.json")).map_err(|e| e.to_string())?;
    let golden: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let mut sizes = Vec::new();
    for n in [800usize, 1024, 2000] {
        let want: SplitGolden = serde_json::from_value(golden[n.to_string()].clone()).map_err(|e| e.to_string())?;
        let records = (0..n).map(|i| TaskRecord::single(format!("record {i}"), i % 2)).collect();
        let ds = TaskDataset::new("synthetic", Category::Single, vec!["a".into(), "b".into()], false, records)
            .map_err(|e| e.to_string())?;
        let sp = split(&ds, 42).map_err(|e| e.to_string())?;
        ensure(sp.validation_indices == want.validation, || format!("n = {n}: validation indices differ"))?;
        ensure(sp.test_indices == want.test, || format!("n = {n}: test indices differ"))?;
        ensure(sp.validation_indices.iter().all(|i| !sp.test_indices.contains(i)), || {
            format!("n = {n}: splits overlap")
        })?;
        let expect_test = if n > 512 { 512 } else { n / 2 };
        ensure(sp.test.len() == expect_test && sp.validation.len() == 512.min(n - expect_test), || {
            format!("n = {n}: sizes {} / {}", sp.validation.len(), sp.test.len())
        })?;
        for (pos, &orig) in sp.test_indices.iter().enumerate() {
            ensure(sp.test.records[pos] == ds.records[orig], || format!("n = {n}: test record {pos} mismatched"))?;
        }
        sizes.push(format!("{n}→{}/{}", sp.validation.len(), sp.test.len()));
    }
    let mut rng = SplitMix64::new(42);
    for (i, v) in golden["splitmix64_seed42_first5"].as_array().unwrap().iter().enumerate() {
        let want: u64 = v.as_str().unwrap().parse().unwrap();
        ensure(rng.next_u64() == want, || format!("SplitMix64 output {i} differs"))?;
    }
    for entry in golden["derive_seed"].as_array().unwrap() {
        let parent: u64 = entry["parent"].as_str().unwrap().parse().unwrap();
        let want: u64 = entry["seed"].as_str().unwrap().parse().unwrap();
        let label = entry["label"].as_str().unwrap();
        ensure(derive_seed(parent, label) == want, || format!("derive_seed({parent}, {label:?}) differs"))?;
    }
    Ok(Outcome::Pass(format!("golden indices match ({})", sizes.join(", "))))
}

fn random_string(rng: &mut SplitMix64) -> String {
    const RANGES: [(u32, u32); 8] = [
        (0x20, 0x7e),
        (0x09, 0x0d),
        (0xa0, 0x17f),
        (0x370, 0x3ff),
        (0x400, 0x4ff),
        (0x4e00, 0x4fff),
        (0x1f300, 0x1f64f),
        (0x10000, 0x10fff),
    ];
    let len = rng.below(40) as usize;
    (0..len)
        .map(|_| {
            let (lo, hi) = RANGES[rng.below(RANGES.len() as u64) as usize];
            char::from_u32(lo + rng.below((hi - lo + 1) as u64) as u32).unwrap_or('?')
        })
        .collect()
}

fn c9_tokenizer() -> Result<Outcome, String> {
    let vocab = BpeVocab::gpt2().map_err(|e| e.to_string())?;
    let mut rng = SplitMix64::new(9);
    for i in 0..1000 {
        let s = random_string(&mut rng);
        let back = vocab.decode(&vocab.encode(&s)).map_err(|e| e.to_string())?;
        ensure(back == s, || format!("string {i} {s:?} round-tripped to {back:?}"))?;
    }
    #[derive(serde::Deserialize)]
    struct Entry {
        text: String,
        ids: Vec<u32>,
    }
    let text = std::fs::read_to_string(common::fixtures().join("tokenizer_golden.json")).map_err(|e| e.to_string())?;
    let golden: Vec<Entry> = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    for e in &golden {
        let ours = vocab.encode(&e.text);
        ensure(ours == e.ids, || format!("{:?}: {ours:?} != {:?}", e.text, e.ids))?;
    }
    Ok(Outcome::Pass(format!("1000 random strings round-trip; {} golden encodings match", golden.len())))
}

fn c10_stability() -> Result<Outcome, String> {
    let stats = stability_stats(&[(0, 0.2), (1, 0.1), (2, 0.1)], 0.2).map_err(|e| e.to_string())?;
    ensure(stats.remaining_range[..2] == [0.5, 0.0], || format!("remaining range {:?}", stats.remaining_range))?;
    let two = stability_stats(&[(0, 0.1), (4, 0.3)], 0.3).map_err(|e| e.to_string())?;
    ensure((two.distance_matrix[0][1] - 0.2).abs() < 1e-15, || "distance 0.1↔0.3 is not 0.2".into())?;
    let mut rng = SplitMix64::new(10);
    for i in 0..200 {
        let n = 2 + rng.below(8) as usize;
        let optima: Vec<(usize, f64)> = (0..n).map(|k| (k, unit(&mut rng))).collect();
        let s = stability_stats(&optima, 1.0).map_err(|e| e.to_string())?;
        let d = &s.distance_matrix;
        ensure((0..n).all(|a| d[a][a] == 0.0 && (0..n).all(|b| d[a][b] == d[b][a])), || {
            format!("matrix {i} not symmetric with zero diagonal")
        })?;
    }
    Ok(Outcome::Pass("hand case [0.5, 0.0]; 200 random matrices symmetric with zero diagonal".into()))
}

fn gpt2_dir() -> Option<PathBuf> {
    std::env::var_os("NOISYICL_GPT2_DIR").map(PathBuf::from)
}

fn skip_no_weights() -> Result<Outcome, String> {
    Ok(Outcome::Skip("set NOISYICL_GPT2_DIR to a GPT-2 small checkpoint directory".into()))
}

fn c11_forward_parity() -> Result<Outcome, String> {
    let Some(dir) = gpt2_dir() else { return skip_no_weights() };
    let config = ModelConfig::gpt2_small();
    let params = load_weights(dir.join("model.safetensors"), &config).map_err(|e| e.to_string())?;
    let golden = common::load_golden(dir.join("golden_logits.json"));
    ensure(golden.cases.len() == 5, || format!("expected 5 prompts, found {}", golden.cases.len()))?;
    let dev = common::max_logit_deviation(&params, &config, &golden);
    ensure(dev < 1e-3, || format!("max deviation {dev:e}"))?;
    Ok(Outcome::Pass(format!("5 prompts, max deviation {dev:.2e}")))
}

fn c11_sub_tiny_parity() -> Result<Outcome, String> {
    let (params, config, golden) = common::tiny_reference();
    let dev = common::max_logit_deviation(&params, &config, &golden);
    ensure(dev < 1e-3, || format!("max deviation {dev:e}"))?;
    Ok(Outcome::Pass(format!(
        "random 2-layer GPT-2 vs reference implementation, {} prompts, max deviation {dev:.2e}",
        golden.cases.len()
    )))
}

fn c12_token_entropy_trend() -> Result<Outcome, String> {
    let Some(dir) = gpt2_dir() else { return skip_no_weights() };
    let bundle = ModelBundle::load_dir(&dir).map_err(|e| e.to_string())?;
    let mut means = Vec::new();
    for lambda in [0.0, 0.2, 0.5, 1.0] {
        let mut total = 0.0;
        for seed in 0..10 {
            let noise = NoiseConfig::new(lambda, noise_seed(0, seed));
            let params = perturb(&bundle.params, &noise).map_err(|e| e.to_string())?;
            let model = Gpt2::new(&params, &bundle.config).map_err(|e| e.to_string())?;
            total += token_entropy(&model, &bundle.vocab, "Label: ", lambda).map_err(|e| e.to_string())?.value;
        }
        means.push(total / 10.0);
    }
    ensure(means.windows(2).all(|w| w[0] < w[1]), || format!("not increasing: {means:?}"))?;
    Ok(Outcome::Pass(format!("mean Hₙᵗ {means:.4?}")))
}

fn desk_run(bundle: &ModelBundle, model_dir: PathBuf, cfg: &DatasetConfig, spec: &ExperimentSpec) -> Result<f64, String> {
    let data = prepare_data(cfg).map_err(|e| e.to_string())?;
    let run = run_experiment(bundle, &data.split, spec).map_err(|e| e.to_string())?;
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifest = RunManifest::new(Some(model_dir), bundle, &data, spec);
    write_run(out.path(), &manifest, &run).map_err(|e| e.to_string())?;
    for f in ["manifest.json", "records.jsonl", "metrics.csv", "summary.json", "bins.csv", "histograms.csv"] {
        ensure(out.path().join(f).is_file(), || format!("{f} not written"))?;
    }
    let again = replay(out.path().join("manifest.json"), None).map_err(|e| e.to_string())?;
    ensure(again == run, || "replay differs from the original run".into())?;
    run.aggregate.map(|a| a.mean.accuracy).ok_or_else(|| "no metrics".into())
}

fn c13_desk_scale() -> Result<Outcome, String> {
    let Some(dir) = gpt2_dir() else { return skip_no_weights() };
    let Some(cfg) = std::env::var_os("NOISYICL_SST2_CONFIG") else {
        return Ok(Outcome::Skip("set NOISYICL_SST2_CONFIG to an SST-2 dataset config".into()));
    };
    let bundle = ModelBundle::load_dir(&dir).map_err(|e| e.to_string())?;
    let cfg = DatasetConfig::from_file(cfg).map_err(|e| e.to_string())?;
    let mut spec = ExperimentSpec::new(cfg.name.clone(), SplitKind::Test, 4, 0.0, 0);
    spec.max_queries = Some(128);
    spec.n_noise_repeats = 3;
    let acc = desk_run(&bundle, dir, &cfg, &spec)?;
    ensure((0.50..=0.70).contains(&acc), || format!("baseline accuracy {acc:.4} outside [0.50, 0.70]"))?;
    Ok(Outcome::Pass(format!("baseline accuracy {acc:.4}; artifacts written; replay bitwise identical")))
}

fn c13_sub_pipeline() -> Result<Outcome, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let model_dir = dir.path().join("model");
    let bundle = common::tiny_bundle(13);
    bundle.params.save_safetensors(model_dir.join("model.safetensors")).map_err(|e| e.to_string())?;
    let config_json = serde_json::to_string(&bundle.config).map_err(|e| e.to_string())?;
    std::fs::write(model_dir.join("config.json"), config_json).map_err(|e| e.to_string())?;
    let bundle = ModelBundle::load_dir(&model_dir).map_err(|e| e.to_string())?;

    let data_path = dir.path().join("sst.jsonl");
    let lines: Vec<String> = common::sentiment_dataset(300)
        .records
        .iter()
        .map(|r| serde_json::json!({"sentence": r.text, "label": r.label}).to_string())
        .collect();
    std::fs::write(&data_path, lines.join("\n")).map_err(|e| e.to_string())?;
    let cfg = DatasetConfig {
        name: "synthetic-sst".into(),
        path: data_path,
        format: None,
        category: Category::Single,
        text_field: "sentence".into(),
        text2_field: None,
        aspect_field: None,
        label_field: "label".into(),
        labels: vec!["negative".into(), "positive".into()],
        label_values: None,
        has_neutral: false,
        max_len: None,
        split_seed: None,
    };
    let mut spec = ExperimentSpec::new("synthetic-sst", SplitKind::Test, 4, 0.05, 0);
    spec.max_queries = Some(128);
    spec.n_noise_repeats = 3;
    let acc = desk_run(&bundle, model_dir, &cfg, &spec)?;
    Ok(Outcome::Pass(format!(
        "random 2-layer model, 128 queries × 2 tries × 3 repeats (accuracy {acc:.3}); artifacts written; replay bitwise identical"
    )))
}

fn c14_scope_statement() -> Result<Outcome, String> {
    println!(
        "       Not reproduced at desk scale: the published per-dataset accuracy, macro-F1 and ECE₁ cells \
         and all GPT-J rows (different split RNG and demo sampling; 6B model cost), and the full-scale λ grid search."
    );
    let grid = LambdaGrid::default();
    let result = grid_search(&grid, 3, |lambda, _| {
        let accuracy = 1.0 - (lambda - 0.1).abs();
        Ok(noisyicl::metrics::MetricSet {
            accuracy,
            macro_f1: accuracy,
            ece1: 0.0,
        })
    })
    .map_err(|e| e.to_string())?;
    ensure(result.optimal_lambda == 0.1, || format!("synthetic oracle returned {}", result.optimal_lambda))?;
    Ok(Outcome::Pass("grid search under a synthetic oracle peaked at 0.1 returns 0.1".into()))
}

fn main() {
    let criteria: [(&str, &str, Check); 16] = [
        ("1", "perturbation identity at λ = 0", c1_perturbation_identity),
        ("2", "perturbation statistics at λ = 1, σ = 0.02", c2_perturbation_statistics),
        ("3", "perturbation determinism, 1 vs 8 workers", c3_parallel_determinism),
        ("4", "ECE₁ against brute force and hand cases", c4_ece_oracle),
        ("5", "macro-F1 against confusion-matrix brute force", c5_macro_f1_oracle),
        ("6", "normalized entropy bounds", c6_entropy_bounds),
        ("7", "prompt templates byte-exact", c7_prompt_golden),
        ("8", "seed-42 split determinism", c8_split_determinism),
        ("9", "tokenizer round trip and golden ids", c9_tokenizer),
        ("10", "stability statistics", c10_stability),
        ("11", "GPT-2 small forward parity", c11_forward_parity),
        ("11-sub", "forward parity on a small reference model", c11_sub_tiny_parity),
        ("12", "token entropy increases with λ", c12_token_entropy_trend),
        ("13", "desk-scale SST-2 run and replay", c13_desk_scale),
        ("13-sub", "end-to-end pipeline and replay on a random model", c13_sub_pipeline),
        ("14", "scope statement and synthetic grid search", c14_scope_statement),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Ok(Outcome::Pass(d)) => ("PASS", d),
            Ok(Outcome::Skip(d)) => ("SKIP", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("[{tag}] {id:<6} {name}: {detail} ({secs:.2}s)");
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
