//! Labeled classification data, verbalizer tables and the split protocol.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Seed of the canonical split shuffle.
pub const SPLIT_SEED: u64 = 42;
/// Maximum records per split.
pub const SPLIT_SIZE: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    /// One input sentence.
    Single,
    /// A sentence plus an aspect term.
    Aspect,
    /// Two sentences.
    Pair,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text2: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aspect: Option<String>,
    pub label: usize,
}

impl TaskRecord {
    pub fn single(text: impl Into<String>, label: usize) -> Self {
        Self {
            text: text.into(),
            text2: None,
            aspect: None,
            label,
        }
    }

    pub fn aspect(text: impl Into<String>, aspect: impl Into<String>, label: usize) -> Self {
        Self {
            text: text.into(),
            text2: None,
            aspect: Some(aspect.into()),
            label,
        }
    }

    pub fn pair(text: impl Into<String>, text2: impl Into<String>, label: usize) -> Self {
        Self {
            text: text.into(),
            text2: Some(text2.into()),
            aspect: None,
            label,
        }
    }

    /// Whether exactly the fields of `category` are present.
    pub fn fits(&self, category: Category) -> bool {
        match category {
            Category::Single => self.text2.is_none() && self.aspect.is_none(),
            Category::Aspect => self.text2.is_none() && self.aspect.is_some(),
            Category::Pair => self.text2.is_some() && self.aspect.is_none(),
        }
    }

    fn char_len(&self) -> usize {
        self.text.chars().count() + self.text2.as_deref().map_or(0, |t| t.chars().count())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskDataset {
    pub name: String,
    pub category: Category,
    /// Verbalizers; a record's label indexes this list.
    pub label_space: Vec<String>,
    pub has_neutral: bool,
    pub records: Vec<TaskRecord>,
}

impl TaskDataset {
    pub fn new(
        name: impl Into<String>,
        category: Category,
        label_space: Vec<String>,
        has_neutral: bool,
        records: Vec<TaskRecord>,
    ) -> Result<Self> {
        let ds = Self {
            name: name.into(),
            category,
            label_space,
            has_neutral,
            records,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        validate_label_space(&self.label_space)?;
        for (i, r) in self.records.iter().enumerate() {
            if r.label >= self.label_space.len() {
                return Err(Error::Record {
                    line: i + 1,
                    message: format!("label {} outside label space of {}", r.label, self.label_space.len()),
                });
            }
            if !r.fits(self.category) {
                return Err(Error::Record {
                    line: i + 1,
                    message: format!("fields do not match category {:?}", self.category),
                });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn num_labels(&self) -> usize {
        self.label_space.len()
    }

    fn subset(&self, indices: &[usize]) -> Self {
        Self {
            name: self.name.clone(),
            category: self.category,
            label_space: self.label_space.clone(),
            has_neutral: self.has_neutral,
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
        }
    }
}

fn validate_label_space(labels: &[String]) -> Result<()> {
    if labels.len() < 2 {
        return Err(Error::invalid("label space needs at least two verbalizers"));
    }
    for (i, l) in labels.iter().enumerate() {
        if l.is_empty() {
            return Err(Error::invalid("empty verbalizer"));
        }
        if labels[..i].contains(l) {
            return Err(Error::invalid(format!("duplicate verbalizer `{l}`")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileFormat {
    Jsonl,
    Csv,
}

/// Per-dataset loading recipe, read from TOML or JSON.
///
/// ```toml
/// name = "sst2"
/// path = "sst2.jsonl"          # relative to the config file
/// category = "single"
/// text_field = "sentence"
/// label_field = "label"
/// labels = ["negative", "positive"]
/// label_values = ["0", "1"]    # optional: raw values in file order of `labels`
/// has_neutral = false
/// max_len = 500                # optional character limit
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub name: String,
    pub path: PathBuf,
    #[serde(default)]
    pub format: Option<FileFormat>,
    pub category: Category,
    pub text_field: String,
    #[serde(default)]
    pub text2_field: Option<String>,
    #[serde(default)]
    pub aspect_field: Option<String>,
    pub label_field: String,
    pub labels: Vec<String>,
    #[serde(default)]
    pub label_values: Option<Vec<String>>,
    #[serde(default)]
    pub has_neutral: bool,
    #[serde(default)]
    pub max_len: Option<usize>,
    #[serde(default)]
    pub split_seed: Option<u64>,
}

impl DatasetConfig {
    /// Parses a `.toml` or `.json` config; a relative `path` is resolved
    /// against the config's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: Self = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)?
        } else {
            toml::from_str(&text)?
        };
        if cfg.path.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.path = dir.join(&cfg.path);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        validate_label_space(&self.labels)?;
        if let Some(values) = &self.label_values {
            if values.len() != self.labels.len() {
                return Err(Error::invalid("label_values must match labels in length"));
            }
        }
        match self.category {
            Category::Aspect if self.aspect_field.is_none() => {
                Err(Error::invalid("aspect category requires aspect_field"))
            }
            Category::Pair if self.text2_field.is_none() => {
                Err(Error::invalid("pair category requires text2_field"))
            }
            _ => Ok(()),
        }
    }

    pub fn format(&self) -> FileFormat {
        self.format.unwrap_or_else(|| {
            if self.path.extension().is_some_and(|e| e == "csv") {
                FileFormat::Csv
            } else {
                FileFormat::Jsonl
            }
        })
    }

    pub fn load(&self) -> Result<TaskDataset> {
        match self.format() {
            FileFormat::Jsonl => load_jsonl(&self.path, self),
            FileFormat::Csv => load_csv(&self.path, self),
        }
    }

    fn label_index(&self, line: usize, raw: &str) -> Result<usize> {
        let raw = raw.trim();
        if let Some(values) = &self.label_values {
            if let Some(i) = values.iter().position(|v| v == raw) {
                return Ok(i);
            }
        } else if let Some(i) = self.labels.iter().position(|v| v == raw) {
            return Ok(i);
        } else if let Ok(i) = raw.parse::<usize>() {
            if i < self.labels.len() {
                return Ok(i);
            }
        }
        Err(Error::UnknownLabel {
            line,
            value: raw.to_string(),
        })
    }

    fn build_record(&self, line: usize, get: impl Fn(&str) -> Option<String>) -> Result<TaskRecord> {
        let field = |name: &str| {
            get(name).ok_or_else(|| Error::MissingField {
                line,
                field: name.to_string(),
            })
        };
        let text = field(&self.text_field)?;
        let text2 = match (&self.category, &self.text2_field) {
            (Category::Pair, Some(f)) => Some(field(f)?),
            _ => None,
        };
        let aspect = match (&self.category, &self.aspect_field) {
            (Category::Aspect, Some(f)) => Some(field(f)?),
            _ => None,
        };
        let label = self.label_index(line, &field(&self.label_field)?)?;
        Ok(TaskRecord {
            text,
            text2,
            aspect,
            label,
        })
    }

    fn finish(&self, records: Vec<TaskRecord>) -> Result<TaskDataset> {
        let records = match self.max_len {
            Some(limit) => records.into_iter().filter(|r| r.char_len() <= limit).collect(),
            None => records,
        };
        TaskDataset::new(
            self.name.clone(),
            self.category,
            self.labels.clone(),
            self.has_neutral,
            records,
        )
    }
}

fn json_scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

/// Reads one JSON object per line, in file order. Blank lines are skipped.
pub fn load_jsonl(path: impl AsRef<Path>, cfg: &DatasetConfig) -> Result<TaskDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let obj: Value = serde_json::from_str(&line).map_err(|e| Error::Record {
            line: line_no,
            message: format!("malformed JSON: {e}"),
        })?;
        let Value::Object(map) = obj else {
            return Err(Error::Record {
                line: line_no,
                message: "expected a JSON object".into(),
            });
        };
        records.push(cfg.build_record(line_no, |f| map.get(f).and_then(json_scalar))?);
    }
    cfg.finish(records)
}

/// Reads a CSV file with a header row. Line numbers count the header as 1.
pub fn load_csv(path: impl AsRef<Path>, cfg: &DatasetConfig) -> Result<TaskDataset> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::NotFound => {
            Error::MissingFile(path.to_path_buf())
        }
        _ => Error::Csv(e),
    })?;
    let headers = reader.headers()?.clone();
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line_no = i + 2;
        let row = row.map_err(|e| Error::Record {
            line: line_no,
            message: e.to_string(),
        })?;
        records.push(cfg.build_record(line_no, |f| {
            headers
                .iter()
                .position(|h| h == f)
                .and_then(|c| row.get(c))
                .map(str::to_string)
        })?);
    }
    cfg.finish(records)
}

/// Validation and test partitions of one shuffled dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPair {
    pub validation: TaskDataset,
    pub test: TaskDataset,
    /// Original record indices, in split order.
    pub validation_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// The canonical shuffled order of `n` records.
pub fn shuffled_order(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    SplitMix64::new(seed).shuffle(&mut order);
    order
}

/// `(validation, test)` sizes for `n` records.
///
/// The test split is the last 512 shuffled records, the validation split the
/// first 512 or whatever remains when fewer than 1024 exist. Datasets of 512
/// or fewer records are halved so that both splits are non-empty.
pub fn split_sizes(n: usize) -> (usize, usize) {
    let test = if n > SPLIT_SIZE { SPLIT_SIZE } else { n / 2 };
    (SPLIT_SIZE.min(n - test), test)
}

/// Shuffles with [`SplitMix64`] Fisher–Yates and carves out the two splits.
pub fn split(ds: &TaskDataset, seed: u64) -> Result<SplitPair> {
    let n = ds.len();
    if n < 2 {
        return Err(Error::DatasetTooSmall { n, needed: 2 });
    }
    let order = shuffled_order(n, seed);
    let (val_len, test_len) = split_sizes(n);
    let validation_indices = order[..val_len].to_vec();
    let test_indices = order[n - test_len..].to_vec();
    Ok(SplitPair {
        validation: ds.subset(&validation_indices),
        test: ds.subset(&test_indices),
        validation_indices,
        test_indices,
    })
}

/// Draws `k` distinct indices of `0..pool_len` uniformly without replacement,
/// in draw order, never returning `exclude`.
pub fn sample_demo_indices(
    pool_len: usize,
    k: usize,
    rng: &mut SplitMix64,
    exclude: Option<usize>,
) -> Result<Vec<usize>> {
    let mut candidates: Vec<usize> = (0..pool_len).filter(|&i| Some(i) != exclude).collect();
    if k > candidates.len() {
        return Err(Error::invalid(format!(
            "cannot draw {k} demos from a pool of {}",
            candidates.len()
        )));
    }
    for i in 0..k {
        let j = i + rng.below((candidates.len() - i) as u64) as usize;
        candidates.swap(i, j);
    }
    candidates.truncate(k);
    Ok(candidates)
}

/// Demo sequence `G` of `k` records from `ds`.
pub fn sample_demos<'a>(
    ds: &'a TaskDataset,
    k: usize,
    rng: &mut SplitMix64,
    exclude: Option<usize>,
) -> Result<Vec<&'a TaskRecord>> {
    Ok(sample_demo_indices(ds.len(), k, rng, exclude)?
        .into_iter()
        .map(|i| &ds.records[i])
        .collect())
}
