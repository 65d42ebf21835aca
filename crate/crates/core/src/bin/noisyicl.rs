//! Command-line front end. Settings come from an optional TOML file given
//! with `--config`; flags override the file.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use noisyicl::artifacts::{
    prepare_data, read_predictions, replay, unix_now, write_bins_csv, write_entropy_csv, write_histograms_csv, write_json,
    write_run, write_search_csv, write_stability_csv, EntropyRow, PreparedData, RunManifest, Summary,
};
use noisyicl::decoder::{ScoreMode, ScoringOptions};
use noisyicl::entropy::{label_entropy, token_entropy, LabelEntropyOptions, Tally, DEFAULT_TRIES, EMPTY_INPUTS};
use noisyicl::harness::{k_sweep, noise_seed, run_experiment, search_lambda, ExperimentSpec, ModelBundle, SplitKind};
use noisyicl::metrics::{reliability_bins, MetricSet};
use noisyicl::model::Gpt2;
use noisyicl::perturbation::{perturb, NoiseConfig, DEFAULT_SIGMA};
use noisyicl::rng::derive_seed;
use noisyicl::search::{
    grid_search, max_optimum, stability_stats, LambdaGrid, LambdaSearchResult, DEFAULT_GRID, DEFAULT_SEARCH_SEEDS,
};
use noisyicl::{DatasetConfig, Error, Result, TensorMap};

#[derive(Parser)]
#[command(name = "noisyicl", version, about = "Noise-interpolated in-context learning experiments")]
struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "NOISYICL_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Few-shot evaluation at one λ over several noise repeats.
    Evaluate(EvaluateArgs),
    /// Grid search for the λ with the best mean accuracy.
    SearchLambda(SearchArgs),
    /// Normalized token or label entropy of perturbed models.
    ProbeEntropy(ProbeArgs),
    /// Metrics and reliability bins of a records file.
    Report(ReportArgs),
}

#[derive(Args, Default)]
struct Common {
    /// TOML file with any of the options below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory with model.safetensors and optionally config.json.
    #[arg(long, env = "NOISYICL_MODEL_DIR")]
    model_dir: Option<PathBuf>,
    /// Dataset config file, or a name looked up as `<name>.toml` or
    /// `<name>.json` in the data directory.
    #[arg(long, env = "NOISYICL_DATASET")]
    dataset: Option<PathBuf>,
    /// Directory holding dataset configs.
    #[arg(long, env = "NOISYICL_DATA_DIR")]
    data_dir: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    split: Option<SplitArg>,
    /// Demos per prompt.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Noise repeats.
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    first_repeat: Option<usize>,
    /// Demo resamplings per query; for label entropy, query-less prompts.
    #[arg(long)]
    tries: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_queries: Option<usize>,
    /// Glob patterns of tensors to perturb; all when absent.
    #[arg(long, value_delimiter = ',')]
    include: Option<Vec<String>>,
    #[arg(long, value_enum)]
    score_mode: Option<ScoreModeArg>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: Common,
    /// Run once per demo count, e.g. `0,1,2,4,8`.
    #[arg(long, value_delimiter = ',')]
    k_sweep: Option<Vec<usize>>,
    /// Rerun the experiment recorded in a manifest.
    #[arg(long, conflicts_with = "k_sweep")]
    replay: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    common: Common,
    /// Comma separated candidates; the default 24-value grid when absent.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    /// Seeds per candidate.
    #[arg(long)]
    seeds: Option<usize>,
    /// Search once per demo count.
    #[arg(long, value_delimiter = ',')]
    k_sweep: Option<Vec<usize>>,
    /// Also write optimum stability across the swept demo counts.
    #[arg(long, requires = "k_sweep")]
    stability: bool,
    /// Score candidates with `1 - |λ - peak|` instead of a model.
    #[arg(long)]
    synthetic_oracle_peak: Option<f64>,
}

#[derive(Args)]
struct ProbeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    lambdas: Vec<f64>,
    /// Noise seeds per λ.
    #[arg(long, default_value_t = 1)]
    seeds: usize,
    /// Empty inputs for the token probe.
    #[arg(long)]
    input: Vec<String>,
    #[arg(long, value_enum, default_value = "argmax")]
    tally: TallyArg,
}

#[derive(Args)]
struct ReportArgs {
    /// JSONL with `predicted`, `gold` and `confidence` per line.
    #[arg(long)]
    records: PathBuf,
    /// Label count; one more than the largest label seen when absent.
    #[arg(long)]
    num_labels: Option<usize>,
    #[arg(long, default_value_t = 10)]
    bins: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum SplitArg {
    Validation,
    Test,
}

#[derive(Clone, Copy, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ScoreModeArg {
    Sum,
    Mean,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Token,
    Label,
}

#[derive(Clone, Copy, ValueEnum)]
enum TallyArg {
    Argmax,
    Expected,
}

/// Contents of a `--config` file.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    model_dir: Option<PathBuf>,
    dataset: Option<PathBuf>,
    data_dir: Option<PathBuf>,
    out: Option<PathBuf>,
    split: Option<SplitArg>,
    k: Option<usize>,
    lambda: Option<f64>,
    sigma: Option<f64>,
    repeats: Option<usize>,
    first_repeat: Option<usize>,
    tries: Option<usize>,
    seed: Option<u64>,
    max_queries: Option<usize>,
    include: Option<Vec<String>>,
    score_mode: Option<ScoreModeArg>,
}

impl FileConfig {
    fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
            _ => Error::Io {
                path: path.to_path_buf(),
                source: e,
            },
        })?;
        let mut cfg: Self = toml::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.model_dir, &mut cfg.dataset, &mut cfg.data_dir, &mut cfg.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

/// Flags merged over the config file.
struct Settings {
    model_dir: Option<PathBuf>,
    dataset: Option<PathBuf>,
    data_dir: Option<PathBuf>,
    out: Option<PathBuf>,
    split: Option<SplitKind>,
    k: Option<usize>,
    lambda: Option<f64>,
    sigma: f64,
    repeats: Option<usize>,
    first_repeat: usize,
    tries: Option<usize>,
    seed: u64,
    max_queries: Option<usize>,
    include: Option<Vec<String>>,
    score_mode: ScoreMode,
}

impl Settings {
    fn resolve(c: Common) -> Result<Self> {
        let f = match &c.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let split = c.split.or(f.split).map(|s| match s {
            SplitArg::Validation => SplitKind::Validation,
            SplitArg::Test => SplitKind::Test,
        });
        let score_mode = match c.score_mode.or(f.score_mode) {
            Some(ScoreModeArg::Mean) => ScoreMode::Mean,
            _ => ScoreMode::Sum,
        };
        Ok(Self {
            model_dir: c.model_dir.or(f.model_dir),
            dataset: c.dataset.or(f.dataset),
            data_dir: c.data_dir.or(f.data_dir),
            out: c.out.or(f.out),
            split,
            k: c.k.or(f.k),
            lambda: c.lambda.or(f.lambda),
            sigma: c.sigma.or(f.sigma).unwrap_or(DEFAULT_SIGMA),
            repeats: c.repeats.or(f.repeats),
            first_repeat: c.first_repeat.or(f.first_repeat).unwrap_or(0),
            tries: c.tries.or(f.tries),
            seed: c.seed.or(f.seed).unwrap_or(0),
            max_queries: c.max_queries.or(f.max_queries),
            include: c.include.or(f.include),
            score_mode,
        })
    }

    fn bundle(&self) -> Result<ModelBundle> {
        let dir = self
            .model_dir
            .as_ref()
            .ok_or_else(|| Error::Config("no model directory: pass --model-dir or set NOISYICL_MODEL_DIR".into()))?;
        ModelBundle::load_dir(dir)
    }

    fn data(&self) -> Result<PreparedData> {
        let path = self
            .dataset
            .as_ref()
            .ok_or_else(|| Error::Config("no dataset config: pass --dataset or set NOISYICL_DATASET".into()))?;
        let resolved = if path.is_file() {
            path.clone()
        } else {
            let dir = self.data_dir.clone().unwrap_or_default();
            ["toml", "json"]
                .iter()
                .map(|ext| dir.join(path).with_extension(ext))
                .find(|p| p.is_file())
                .ok_or_else(|| Error::MissingFile(path.clone()))?
        };
        prepare_data(&DatasetConfig::from_file(resolved)?)
    }

    fn out(&self, default: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(default))
    }

    fn spec(&self, dataset: &str, default_split: SplitKind) -> ExperimentSpec {
        let mut spec = ExperimentSpec::new(
            dataset,
            self.split.unwrap_or(default_split),
            self.k.unwrap_or(4),
            self.lambda.unwrap_or(0.0),
            self.seed,
        );
        spec.sigma = self.sigma;
        spec.include = self.include.clone();
        spec.first_repeat = self.first_repeat;
        spec.max_queries = self.max_queries;
        spec.scoring = ScoringOptions {
            mode: self.score_mode,
            ..ScoringOptions::default()
        };
        if let Some(r) = self.repeats {
            spec.n_noise_repeats = r;
        }
        if let Some(t) = self.tries {
            spec.tries_per_query = t;
        }
        if let Some(dir) = &self.model_dir {
            spec.model = dir.display().to_string();
        }
        spec
    }
}

fn print_metrics(label: &str, m: &MetricSet) {
    println!(
        "{label}: accuracy {:.4}  macro-F1 {:.4}  ECE1 {:.4}",
        m.accuracy, m.macro_f1, m.ece1
    );
}

/// One `mean±std` row in percent, plus run size.
fn print_summary(s: &Summary) {
    let cell = |m: f64, sd: f64| format!("{:.2}±{:.2}", 100.0 * m, 100.0 * sd);
    match &s.aggregate {
        Some(agg) => println!(
            "{:<12} k={:<2} λ={:<8} Acc {}  MF1 {}  ECE1 {}",
            s.dataset,
            s.k,
            s.lambda,
            cell(agg.mean.accuracy, agg.std.accuracy),
            cell(agg.mean.macro_f1, agg.std.macro_f1),
            cell(agg.mean.ece1, agg.std.ece1),
        ),
        None => println!(
            "{:<12} k={:<2} λ={:<8} every prompt overflowed the context window; no metrics",
            s.dataset, s.k, s.lambda
        ),
    }
    println!(
        "  {} repeats, {} queries, {:.1}% of prompts skipped",
        s.repeats,
        s.n_queries,
        100.0 * s.skip_fraction
    );
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let settings = Settings::resolve(args.common)?;
    let out = settings.out("runs/evaluate");
    if let Some(manifest_path) = &args.replay {
        let run = replay(manifest_path, settings.model_dir.as_deref())?;
        let mut manifest: RunManifest = noisyicl::artifacts::read_json(manifest_path)?;
        manifest.created_unix = unix_now();
        write_run(&out, &manifest, &run)?;
        print_summary(&Summary::of(&run));
        return Ok(());
    }

    let bundle = settings.bundle()?;
    let data = settings.data()?;
    let spec = settings.spec(&data.dataset.name, SplitKind::Test);
    match &args.k_sweep {
        Some(ks) => {
            let runs = k_sweep(&bundle, &data.split, &spec, ks)?;
            let mut summaries = BTreeMap::new();
            for (k, run) in &runs {
                let manifest = RunManifest::new(settings.model_dir.clone(), &bundle, &data, &run.spec);
                write_run(out.join(format!("k{k}")), &manifest, run)?;
                let summary = Summary::of(run);
                print_summary(&summary);
                summaries.insert(k.to_string(), summary);
            }
            write_json(out.join("sweep.json"), &summaries)?;
        }
        None => {
            let run = run_experiment(&bundle, &data.split, &spec)?;
            let manifest = RunManifest::new(settings.model_dir.clone(), &bundle, &data, &spec);
            write_run(&out, &manifest, &run)?;
            print_summary(&Summary::of(&run));
        }
    }
    println!("artifacts written to {}", out.display());
    Ok(())
}

fn synthetic_search(grid: &LambdaGrid, seeds: usize, peak: f64) -> Result<LambdaSearchResult> {
    grid_search(grid, seeds, |lambda, _| {
        let accuracy = 1.0 - (lambda - peak).abs();
        Ok(MetricSet {
            accuracy,
            macro_f1: accuracy,
            ece1: 0.0,
        })
    })
}

fn search(args: SearchArgs) -> Result<()> {
    let settings = Settings::resolve(args.common)?;
    let out = settings.out("runs/search");
    let grid = match args.grid {
        Some(g) => LambdaGrid::from_unordered(g)?,
        None => LambdaGrid::new(DEFAULT_GRID.to_vec())?,
    };
    let seeds = args.seeds.unwrap_or(DEFAULT_SEARCH_SEEDS);
    let ks = args.k_sweep.clone().unwrap_or_else(|| vec![settings.k.unwrap_or(4)]);

    let mut optima = Vec::new();
    let mut results = BTreeMap::new();
    if let Some(peak) = args.synthetic_oracle_peak {
        for &k in &ks {
            results.insert(k, synthetic_search(&grid, seeds, peak)?);
        }
    } else {
        let bundle = settings.bundle()?;
        let data = settings.data()?;
        let base = settings.spec(&data.dataset.name, SplitKind::Validation);
        for &k in &ks {
            let mut spec = base.clone();
            spec.k = k;
            log::info!("searching λ for k = {k}");
            results.insert(k, search_lambda(&bundle, &data.split, &spec, &grid, seeds)?);
        }
    }
    for (k, result) in &results {
        let path = if ks.len() == 1 {
            out.join("search.csv")
        } else {
            out.join(format!("search_k{k}.csv"))
        };
        write_search_csv(&path, result)?;
        println!("k={k}: optimal λ = {}", result.optimal_lambda);
        optima.push((*k, result.optimal_lambda));
    }
    write_json(out.join("search.json"), &results)?;

    if args.stability {
        let stats = stability_stats(&optima, max_optimum(&optima))?;
        let dist = write_stability_csv(out.join("stability.csv"), &stats)?;
        for (k, r) in stats.ks.iter().zip(&stats.remaining_range) {
            println!("k={k}: remaining range {r:.4}");
        }
        println!("distance matrix written to {}", dist.display());
    }
    println!("artifacts written to {}", out.display());
    Ok(())
}

fn perturbed<'a>(bundle: &'a ModelBundle, noise: &NoiseConfig) -> Result<Cow<'a, TensorMap>> {
    if noise.lambda == 0.0 {
        Ok(Cow::Borrowed(&bundle.params))
    } else {
        Ok(Cow::Owned(perturb(&bundle.params, noise)?))
    }
}

fn probe(args: ProbeArgs) -> Result<()> {
    let settings = Settings::resolve(args.common)?;
    let out = settings.out("runs/entropy");
    let data = match args.kind {
        KindArg::Label => Some(settings.data()?),
        KindArg::Token => None,
    };
    if let Some(d) = data.as_ref().filter(|d| d.dataset.has_neutral) {
        return Err(Error::NeutralLabel(d.dataset.name.clone()));
    }
    let bundle = settings.bundle()?;
    let inputs: Vec<String> = if args.input.is_empty() {
        EMPTY_INPUTS.iter().map(|s| s.to_string()).collect()
    } else {
        args.input.clone()
    };
    if args.seeds < 1 {
        return Err(Error::InvalidArgument("--seeds must be positive".into()));
    }

    let mut rows = Vec::new();
    for &lambda in &args.lambdas {
        for repeat in settings.first_repeat..settings.first_repeat + args.seeds {
            let noise = NoiseConfig {
                lambda,
                sigma: settings.sigma,
                master_seed: noise_seed(settings.seed, repeat),
                include: settings.include.clone(),
            };
            noise.validate()?;
            let params = perturbed(&bundle, &noise)?;
            let model = Gpt2::new(&params, &bundle.config)?;
            match &data {
                None => {
                    for input in &inputs {
                        let r = token_entropy(&model, &bundle.vocab, input, lambda)?;
                        rows.push(EntropyRow {
                            lambda,
                            seed: noise.master_seed,
                            kind: r.kind,
                            input: input.clone(),
                            value: r.value,
                        });
                    }
                }
                Some(data) => {
                    let split = settings.split.unwrap_or(SplitKind::Test);
                    let opts = LabelEntropyOptions {
                        k: settings.k.unwrap_or(4),
                        tries: settings.tries.unwrap_or(DEFAULT_TRIES),
                        seed: derive_seed(settings.seed, "label-entropy"),
                        tally: match args.tally {
                            TallyArg::Argmax => Tally::Argmax,
                            TallyArg::Expected => Tally::Expected,
                        },
                        scoring: ScoringOptions {
                            mode: settings.score_mode,
                            ..ScoringOptions::default()
                        },
                        ..LabelEntropyOptions::default()
                    };
                    let r = label_entropy(&model, &bundle.vocab, split.select(&data.split), &opts, lambda)?;
                    rows.push(EntropyRow {
                        lambda,
                        seed: noise.master_seed,
                        kind: r.kind,
                        input: r.probe_input,
                        value: r.value,
                    });
                }
            }
        }
    }
    for row in &rows {
        println!("λ={} seed={} {} {:?}: {:.6}", row.lambda, row.seed, row.kind, row.input, row.value);
    }
    let path = out.join("entropy.csv");
    write_entropy_csv(&path, &rows)?;
    println!("written to {}", path.display());
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let records = read_predictions(&args.records)?;
    if records.is_empty() {
        return Err(Error::InvalidArgument(format!("{} holds no records", args.records.display())));
    }
    let seen = records.iter().map(|r| r.predicted.max(r.gold)).max().unwrap_or(0) + 1;
    let num_labels = args.num_labels.unwrap_or(seen);
    let metrics = MetricSet::compute(&records, num_labels)?;
    let bins = reliability_bins(&records, args.bins)?;
    println!("{} records, {num_labels} labels", records.len());
    print_metrics("overall", &metrics);
    println!("ECE1 over {} bins: {:.4}", args.bins, bins.ece(1.0));
    for b in &bins.bins {
        println!(
            "  ({:.2}, {:.2}]  n={:<6} acc={:.4}  conf={:.4}",
            b.lower, b.upper, b.count, b.accuracy, b.mean_confidence
        );
    }
    if let Some(out) = &args.out {
        write_bins_csv(out.join("bins.csv"), &bins)?;
        write_histograms_csv(out.join("histograms.csv"), &records, args.bins)?;
        write_json(out.join("metrics.json"), &metrics)?;
        println!("artifacts written to {}", out.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Evaluate(a) => evaluate(a),
        Command::SearchLambda(a) => search(a),
        Command::ProbeEntropy(a) => probe(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
