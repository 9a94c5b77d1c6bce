//! `geollm`: drives the prompt, dataset, baseline and evaluation pipeline
//! from the command line. Each subcommand reads and writes plain files in a
//! run directory.

mod commands;
mod config;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use geollm::adapter::AdapterError;
use geollm::baseline::BaselineError;
use geollm::dataset::{CorpusFormat, DatasetError, SourceKind, SplitTag};
use geollm::eval::EvalError;
use geollm::label::LabelError;
use geollm::mapdata::MapError;
use geollm::prompt::{Ablation, PromptError};

use commands::{BaselineKind, BaselineOptions, KnowledgeKind};
use config::{parse_ablation, ConfigError, RunConfig};
use run::RunDir;

#[derive(Parser)]
#[command(name = "geollm", version, about = "Geospatial prompts, datasets, baselines and evaluation")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Run config (TOML). Defaults to <out>/config.toml when present.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Task name used in prompts.
    #[arg(long, global = true)]
    task: Option<String>,
    /// Training subset size for exports and baselines.
    #[arg(long, global = true)]
    size: Option<usize>,
    /// Place snapshot (JSONL).
    #[arg(long, global = true)]
    snapshot: Option<PathBuf>,
    /// Run directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalSplit {
    Val,
    Test,
}

impl From<EvalSplit> for SplitTag {
    fn from(s: EvalSplit) -> Self {
        match s {
            EvalSplit::Val => SplitTag::Val,
            EvalSplit::Test => SplitTag::Test,
        }
    }
}

#[derive(Args, Clone)]
struct OracleArgs {
    #[arg(long, value_enum, default_value = "coordinates-only")]
    knowledge: KnowledgeKind,
    /// Noise scale in label units.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Uniform noise half-width in tenths.
    #[arg(long, default_value_t = 5)]
    half_width: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic world, dataset, place snapshot and address book.
    Synth {
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 12)]
        bumps: usize,
        #[arg(long, default_value_t = 400)]
        places: usize,
        #[arg(long, default_value_t = 0.0)]
        noise_sd: f64,
    },
    /// Validate a task source and copy it into the run directory.
    Ingest {
        #[arg(long)]
        source: Option<PathBuf>,
        /// raster | cluster-table | zip-centroid
        #[arg(long)]
        kind: Option<SourceKind>,
    },
    /// Importance-sample raster cells into dataset.csv.
    Sample {
        #[arg(long)]
        n: Option<usize>,
    },
    /// Partition the dataset and fit the label binner on the training pool.
    Split,
    /// Build a place snapshot from Overpass around every sample.
    FetchPlaces,
    /// Resolve addresses and nearby places and render whole prompts.
    Prompts,
    /// Write train/val/test fine-tuning corpora.
    ExportFinetune {
        #[arg(long, default_value = "chat")]
        format: CorpusFormat,
        #[arg(long, default_value = "whole-prompt")]
        ablation: String,
    },
    /// Write few-shot contexts for a test subset.
    ExportFewshot {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        test_size: Option<usize>,
        #[arg(long, default_value = "whole-prompt")]
        ablation: String,
    },
    /// Answer a corpus file with the mock oracle (synthetic runs only).
    MockAnswer {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "mock")]
        name: String,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Validate a predictions file and store it in the run directory.
    ImportPredictions {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        name: Option<String>,
        #[arg(long, value_enum, default_value = "test")]
        split: EvalSplit,
    },
    /// Train a k-NN or GBT baseline and predict the test split.
    Baseline {
        #[arg(long, value_enum, default_value = "knn")]
        model: BaselineKind,
        #[arg(long, default_value_t = geollm::baseline::DEFAULT_K)]
        k: usize,
        #[arg(long, default_value_t = 200)]
        trees: usize,
        /// Append a hashed text embedding of this width to GBT features.
        #[arg(long)]
        embed_dim: Option<usize>,
    },
    /// Score a predictions file.
    Evaluate {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long, value_enum, default_value = "test")]
        split: EvalSplit,
    },
    /// Export and evaluate every prompt ablation.
    Ablate {
        /// Answer with the mock oracle instead of reading predictions.
        #[arg(long)]
        mock: bool,
        #[command(flatten)]
        oracle: OracleArgs,
        /// Directory holding <slug>.jsonl predictions.
        #[arg(long)]
        predictions_dir: Option<PathBuf>,
        #[arg(long, default_value = "chat")]
        format: CorpusFormat,
    },
    /// Per-point errors as GeoJSON plus a CSV twin.
    ErrorMap {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Results table from reports: task:size:model=report.json
    Table {
        #[arg(long = "entry", required = true)]
        entries: Vec<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Synth { .. } => "synth",
            Command::Ingest { .. } => "ingest",
            Command::Sample { .. } => "sample",
            Command::Split => "split",
            Command::FetchPlaces => "fetch-places",
            Command::Prompts => "prompts",
            Command::ExportFinetune { .. } => "export-finetune",
            Command::ExportFewshot { .. } => "export-fewshot",
            Command::MockAnswer { .. } => "mock-answer",
            Command::ImportPredictions { .. } => "import-predictions",
            Command::Baseline { .. } => "baseline",
            Command::Evaluate { .. } => "evaluate",
            Command::Ablate { .. } => "ablate",
            Command::ErrorMap { .. } => "error-map",
            Command::Table { .. } => "table",
        }
    }

    /// Commands whose effective config is written back to the run directory.
    fn updates_config(&self) -> bool {
        matches!(
            self,
            Command::Synth { .. }
                | Command::Ingest { .. }
                | Command::Sample { .. }
                | Command::Split
                | Command::FetchPlaces
                | Command::Prompts
        )
    }
}

/// Exit codes, one per failure class.
mod exit {
    pub const FAILURE: u8 = 1;
    pub const CONFIG: u8 = 3;
    pub const INVALID_INPUT: u8 = 4;
    pub const OVERLAP: u8 = 5;
    pub const INSUFFICIENT_DATA: u8 = 6;
    pub const PROVIDER: u8 = 7;
    pub const UNDEFINED_METRIC: u8 = 8;
    pub const IO: u8 = 9;
}

fn dataset_code(e: &DatasetError) -> u8 {
    match e {
        DatasetError::OverlapDetected { .. } => exit::OVERLAP,
        DatasetError::InsufficientCells { .. } | DatasetError::TooFewSamples { .. } => exit::INSUFFICIENT_DATA,
        DatasetError::Label(l) => label_code(l),
        DatasetError::Io(_) => exit::IO,
        _ => exit::INVALID_INPUT,
    }
}

fn label_code(e: &LabelError) -> u8 {
    match e {
        LabelError::TooFewValues { .. } | LabelError::DegenerateDistribution => exit::INSUFFICIENT_DATA,
        LabelError::Io(_) => exit::IO,
        _ => exit::INVALID_INPUT,
    }
}

fn baseline_code(e: &BaselineError) -> u8 {
    match e {
        BaselineError::InsufficientTrainingData { .. } => exit::INSUFFICIENT_DATA,
        BaselineError::ProviderUnavailable(_) => exit::PROVIDER,
        BaselineError::Io(_) => exit::IO,
        _ => exit::INVALID_INPUT,
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return exit::CONFIG;
        }
        if let Some(e) = cause.downcast_ref::<DatasetError>() {
            return dataset_code(e);
        }
        if let Some(e) = cause.downcast_ref::<LabelError>() {
            return label_code(e);
        }
        if let Some(e) = cause.downcast_ref::<BaselineError>() {
            return baseline_code(e);
        }
        if let Some(e) = cause.downcast_ref::<AdapterError>() {
            return match e {
                AdapterError::Dataset(d) => dataset_code(d),
                AdapterError::Baseline(b) => baseline_code(b),
                AdapterError::ProviderUnavailable(_) => exit::PROVIDER,
                AdapterError::Io(_) => exit::IO,
                _ => exit::INVALID_INPUT,
            };
        }
        if let Some(e) = cause.downcast_ref::<MapError>() {
            return match e {
                MapError::ProviderUnavailable { .. } | MapError::QuotaExceeded { .. } => exit::PROVIDER,
                MapError::Io(_) => exit::IO,
                _ => exit::INVALID_INPUT,
            };
        }
        if let Some(e) = cause.downcast_ref::<PromptError>() {
            return match e {
                PromptError::InsufficientTrainingData { .. } => exit::INSUFFICIENT_DATA,
                _ => exit::INVALID_INPUT,
            };
        }
        if let Some(e) = cause.downcast_ref::<EvalError>() {
            return match e {
                EvalError::ZeroVariance | EvalError::EmptyInput | EvalError::TooFewPairs { .. } => {
                    exit::UNDEFINED_METRIC
                }
                EvalError::Io(_) => exit::IO,
                _ => exit::INVALID_INPUT,
            };
        }
        if cause.is::<std::io::Error>() {
            return exit::IO;
        }
    }
    exit::FAILURE
}

fn load_config(g: &Global) -> Result<RunConfig> {
    let cwd = std::env::current_dir().context("current directory")?;
    let mut cfg = match &g.config {
        Some(path) => {
            let mut c = RunConfig::load(path)?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            c.resolve(&cwd.join(base));
            c
        }
        None => {
            let out = cwd.join(g.out.clone().unwrap_or_else(|| PathBuf::from("run")));
            let stored = out.join("config.toml");
            let mut c = if stored.exists() {
                RunConfig::load(&stored)?
            } else {
                RunConfig::default()
            };
            c.resolve(&out);
            c.out = out;
            c
        }
    };
    if let Some(out) = &g.out {
        cfg.out = cwd.join(out);
    }
    // Inputs recorded by earlier stages fill whatever --config leaves unset.
    let stored = cfg.out.join("config.toml");
    if g.config.is_some() && stored.exists() {
        let mut previous = RunConfig::load(&stored)?;
        previous.resolve(&cfg.out);
        cfg.fill_inputs_from(&previous);
    }
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(t) = &g.task {
        cfg.task.name = t.clone();
    }
    if let Some(s) = g.size {
        cfg.splits.size = s;
    }
    if let Some(s) = &g.snapshot {
        cfg.map.snapshot = Some(cwd.join(s));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn ablation_arg(slug: &str) -> Result<Ablation> {
    parse_ablation(slug)
}

fn dispatch(command: Command, run: &RunDir, cfg: &mut RunConfig) -> Result<()> {
    let knowledge = |o: &OracleArgs| commands::knowledge(o.knowledge, o.sigma, o.half_width);
    match command {
        Command::Synth {
            n,
            bumps,
            places,
            noise_sd,
        } => commands::synth(run, cfg, n, bumps, places, noise_sd),
        Command::Ingest { source, kind } => {
            let cwd = std::env::current_dir()?;
            commands::ingest(run, cfg, source.map(|s| cwd.join(s)), kind)
        }
        Command::Sample { n } => commands::sample(run, cfg, n),
        Command::Split => commands::split(run, cfg),
        Command::FetchPlaces => commands::fetch_places(run, cfg),
        Command::Prompts => commands::prompts(run, cfg),
        Command::ExportFinetune { format, ablation } => {
            commands::export_finetune(run, cfg, format, ablation_arg(&ablation)?)
        }
        Command::ExportFewshot { k, test_size, ablation } => commands::export_fewshot(
            run,
            cfg,
            k.unwrap_or(cfg.fewshot.k),
            test_size.unwrap_or(cfg.fewshot.test_size),
            ablation_arg(&ablation)?,
        ),
        Command::MockAnswer { input, name, oracle } => {
            commands::mock_answer(run, cfg, &input, &name, knowledge(&oracle))
        }
        Command::ImportPredictions { input, name, split } => {
            commands::import_predictions(run, &input, name.as_deref(), split.into())
        }
        Command::Baseline {
            model,
            k,
            trees,
            embed_dim,
        } => commands::baseline(
            run,
            cfg,
            &BaselineOptions {
                kind: model,
                k,
                trees,
                embed_dim,
            },
        ),
        Command::Evaluate { predictions, split } => commands::evaluate_cmd(run, &predictions, split.into()),
        Command::Ablate {
            mock,
            oracle,
            predictions_dir,
            format,
        } => commands::ablate(
            run,
            cfg,
            format,
            mock.then(|| knowledge(&oracle)),
            predictions_dir.as_deref(),
        ),
        Command::ErrorMap { predictions, output } => commands::error_map(run, cfg, &predictions, output),
        Command::Table { entries, output } => commands::table(run, &entries, output),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let started = chrono::Utc::now();
    let name = cli.command.name();
    let mut cfg = match load_config(&cli.global) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let run = RunDir::new(&cfg.out);
    let saves_config = cli.command.updates_config();
    let result = dispatch(cli.command, &run, &mut cfg).and_then(|()| {
        if saves_config {
            run.save_config(&cfg)?;
        }
        Ok(())
    });
    if let Err(e) = run::record_stage(&run.root, name, started, result.is_ok()) {
        log::warn!("could not update manifest.json: {e:#}");
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            run.rollback();
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
