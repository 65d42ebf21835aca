//! On-disk outputs and replay.
//!
//! A run directory holds `manifest.json`, `records.jsonl`, `metrics.csv`,
//! `summary.json`, `bins.csv` and `histograms.csv`. The manifest alone is
//! enough to rerun the experiment with [`replay`].

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dataset::{split, DatasetConfig, SplitPair, TaskDataset, SPLIT_SEED};
use crate::entropy::EntropyKind;
use crate::error::{Error, Result};
use crate::harness::{file_digest, run_experiment, ExperimentSpec, ModelBundle, RunRecord, RunResult};
use crate::metrics::{confidence_histograms, reliability_bins, PredictionRecord, ReliabilityBins, DEFAULT_BINS};
use crate::search::{LambdaSearchResult, StabilityStats};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// A dataset loaded from its config and split.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub config: DatasetConfig,
    pub dataset: TaskDataset,
    pub split: SplitPair,
    pub split_seed: u64,
    /// SHA-256 of the raw data file.
    pub digest: String,
}

pub fn prepare_data(config: &DatasetConfig) -> Result<PreparedData> {
    let dataset = config.load()?;
    let split_seed = config.split_seed.unwrap_or(SPLIT_SEED);
    let split = split(&dataset, split_seed)?;
    Ok(PreparedData {
        config: config.clone(),
        digest: file_digest(&config.path)?,
        dataset,
        split,
        split_seed,
    })
}

/// Seconds since the Unix epoch, 0 if the clock is before it.
pub fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    /// Seconds since the Unix epoch.
    pub created_unix: u64,
    pub model_dir: Option<PathBuf>,
    pub weights_digest: String,
    pub dataset: DatasetConfig,
    pub dataset_digest: String,
    pub split_seed: u64,
    pub spec: ExperimentSpec,
}

impl RunManifest {
    pub fn new(model_dir: Option<PathBuf>, bundle: &ModelBundle, data: &PreparedData, spec: &ExperimentSpec) -> Self {
        Self {
            tool_version: TOOL_VERSION.to_string(),
            created_unix: unix_now(),
            model_dir,
            weights_digest: bundle.weights_digest.clone(),
            dataset: data.config.clone(),
            dataset_digest: data.digest.clone(),
            split_seed: data.split_seed,
            spec: spec.clone(),
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

pub fn write_jsonl<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    for row in rows {
        serde_json::to_writer(&mut w, row)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads one JSON object per non-blank line.
pub fn read_jsonl<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Record {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    read_jsonl(path)
}

/// Reads any JSONL with `predicted`, `gold` and `confidence` fields.
pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<PredictionRecord>> {
    read_jsonl(path)
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct MetricsRow {
    repeat: String,
    noise_seed: Option<u64>,
    n_records: Option<usize>,
    n_skipped: Option<usize>,
    accuracy: Option<f64>,
    macro_f1: Option<f64>,
    ece1: Option<f64>,
}

/// One row per repeat, then `mean` and `std` rows when any repeat scored.
pub fn write_metrics_csv(path: impl AsRef<Path>, run: &RunResult) -> Result<()> {
    let mut rows: Vec<MetricsRow> = run
        .repeats
        .iter()
        .map(|r| MetricsRow {
            repeat: r.repeat.to_string(),
            noise_seed: Some(r.noise_seed),
            n_records: Some(r.n_records),
            n_skipped: Some(r.n_skipped),
            accuracy: r.metrics.map(|m| m.accuracy),
            macro_f1: r.metrics.map(|m| m.macro_f1),
            ece1: r.metrics.map(|m| m.ece1),
        })
        .collect();
    if let Some(agg) = &run.aggregate {
        for (label, m) in [("mean", agg.mean), ("std", agg.std)] {
            rows.push(MetricsRow {
                repeat: label.into(),
                noise_seed: None,
                n_records: None,
                n_skipped: None,
                accuracy: Some(m.accuracy),
                macro_f1: Some(m.macro_f1),
                ece1: Some(m.ece1),
            });
        }
    }
    write_csv(path.as_ref(), rows)
}

pub fn write_bins_csv(path: impl AsRef<Path>, bins: &ReliabilityBins) -> Result<()> {
    write_csv(path.as_ref(), &bins.bins)
}

#[derive(Serialize)]
struct HistogramRow {
    lower: f64,
    upper: f64,
    correct: usize,
    incorrect: usize,
}

pub fn write_histograms_csv(path: impl AsRef<Path>, records: &[PredictionRecord], m: usize) -> Result<()> {
    let (correct, incorrect) = confidence_histograms(records, m)?;
    let rows = (0..m).map(|j| HistogramRow {
        lower: j as f64 / m as f64,
        upper: (j + 1) as f64 / m as f64,
        correct: correct[j],
        incorrect: incorrect[j],
    });
    write_csv(path.as_ref(), rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyRow {
    pub lambda: f64,
    pub seed: u64,
    pub kind: EntropyKind,
    /// Probe input or dataset name.
    pub input: String,
    pub value: f64,
}

pub fn write_entropy_csv(path: impl AsRef<Path>, rows: &[EntropyRow]) -> Result<()> {
    write_csv(path.as_ref(), rows)
}

#[derive(Serialize)]
struct SearchRow {
    lambda: f64,
    seed: usize,
    accuracy: f64,
    macro_f1: f64,
    ece1: f64,
}

pub fn write_search_csv(path: impl AsRef<Path>, result: &LambdaSearchResult) -> Result<()> {
    let rows = result.candidates.iter().flat_map(|c| {
        c.per_seed.iter().enumerate().map(move |(seed, m)| SearchRow {
            lambda: c.lambda,
            seed,
            accuracy: m.accuracy,
            macro_f1: m.macro_f1,
            ece1: m.ece1,
        })
    });
    write_csv(path.as_ref(), rows)
}

#[derive(Serialize)]
struct StabilityRow {
    k: usize,
    optimal_lambda: f64,
    remaining_range: f64,
}

/// Writes the per-k optima to `path` and the pairwise distance matrix to a
/// sibling file with a `_distances` suffix.
pub fn write_stability_csv(path: impl AsRef<Path>, stats: &StabilityStats) -> Result<PathBuf> {
    let path = path.as_ref();
    let rows = stats.ks.iter().enumerate().map(|(i, &k)| StabilityRow {
        k,
        optimal_lambda: stats.optima[i],
        remaining_range: stats.remaining_range[i],
    });
    write_csv(path, rows)?;

    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let dist_path = path.with_file_name(format!("{stem}_distances.csv"));
    let mut w = csv::Writer::from_writer(create(&dist_path)?);
    let mut header = vec!["k".to_string()];
    header.extend(stats.ks.iter().map(|k| k.to_string()));
    w.write_record(&header)?;
    for (i, row) in stats.distance_matrix.iter().enumerate() {
        let mut rec = vec![stats.ks[i].to_string()];
        rec.extend(row.iter().map(|d| d.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(&dist_path, e))?;
    Ok(dist_path)
}

/// Writes every artifact of one run into `dir`.
pub fn write_run(dir: impl AsRef<Path>, manifest: &RunManifest, run: &RunResult) -> Result<()> {
    let dir = dir.as_ref();
    write_json(dir.join("manifest.json"), manifest)?;
    write_jsonl(dir.join("records.jsonl"), &run.records)?;
    write_metrics_csv(dir.join("metrics.csv"), run)?;
    write_json(dir.join("summary.json"), &Summary::of(run))?;
    if !run.skips.is_empty() {
        write_jsonl(dir.join("skips.jsonl"), &run.skips)?;
    }
    let predictions = run.predictions();
    if !predictions.is_empty() {
        write_bins_csv(dir.join("bins.csv"), &reliability_bins(&predictions, DEFAULT_BINS)?)?;
        write_histograms_csv(dir.join("histograms.csv"), &predictions, DEFAULT_BINS)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub dataset: String,
    pub k: usize,
    pub lambda: f64,
    pub repeats: usize,
    pub n_queries: usize,
    pub skip_fraction: f64,
    pub aggregate: Option<crate::harness::Aggregate>,
}

impl Summary {
    pub fn of(run: &RunResult) -> Self {
        Self {
            dataset: run.spec.dataset.clone(),
            k: run.spec.k,
            lambda: run.spec.lambda,
            repeats: run.repeats.len(),
            n_queries: run.n_queries,
            skip_fraction: run.skip_fraction(),
            aggregate: run.aggregate,
        }
    }
}

/// Reruns the experiment described by a manifest.
///
/// `model_dir` overrides the recorded directory. Fails if the weights or
/// data file no longer match the recorded digests.
pub fn replay(manifest_path: impl AsRef<Path>, model_dir: Option<&Path>) -> Result<RunResult> {
    let manifest: RunManifest = read_json(manifest_path)?;
    let dir = model_dir
        .map(Path::to_path_buf)
        .or(manifest.model_dir.clone())
        .ok_or_else(|| Error::Config("manifest has no model directory; pass one explicitly".into()))?;
    let bundle = ModelBundle::load_dir(&dir)?;
    if bundle.weights_digest != manifest.weights_digest {
        return Err(Error::Config(format!("weights in {} differ from the manifest", dir.display())));
    }
    let data = prepare_data(&manifest.dataset)?;
    if data.digest != manifest.dataset_digest {
        return Err(Error::Config(format!(
            "data file {} differs from the manifest",
            manifest.dataset.path.display()
        )));
    }
    let mut split_cfg = manifest.dataset.clone();
    split_cfg.split_seed = Some(manifest.split_seed);
    let data = if data.split_seed == manifest.split_seed { data } else { prepare_data(&split_cfg)? };
    run_experiment(&bundle, &data.split, &manifest.spec)
}
