//! `bondrisk`: synthetic credit-bond market generation, default-probability
//! labeling, preprocessing, model training and evaluation as chained stages.

mod config;
mod stages;

use bondrisk_core::models::Variant;
use bondrisk_core::CoreError;
use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_CONFIG: u8 = 2;
const EXIT_MISSING_INPUT: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(
    name = "bondrisk",
    about = "Credit-bond default-risk pipeline: generate, label, preprocess, train, predict, evaluate, report",
    version
)]
struct Cli {
    /// JSON configuration file; explicit flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Global seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for per-bond labeling and other parallel sections.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GenerateArgs {
    /// Output bonds file (JSON lines).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    n_bonds: Option<usize>,
    #[arg(long)]
    default_fraction: Option<f64>,
    #[arg(long)]
    min_life: Option<usize>,
    #[arg(long)]
    max_life: Option<usize>,
}

#[derive(Args)]
struct LabelArgs {
    #[arg(long)]
    bonds: PathBuf,
    /// Output labels CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output bonds with the prior-probability column filled.
    #[arg(long)]
    bonds_out: Option<PathBuf>,
    /// Moving-average window for the spread estimator.
    #[arg(long)]
    omega: Option<usize>,
    /// Acceleration horizon of the backward estimator, trading days.
    #[arg(long)]
    n_accel: Option<u32>,
    /// Estimator weights as gmm,cs,backward.
    #[arg(long)]
    weights: Option<String>,
}

#[derive(Args)]
struct PreprocessArgs {
    /// Labeled bonds (JSON lines with the prior column filled).
    #[arg(long)]
    bonds: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    variant: Option<String>,
    /// Expected window size; must match the dataset.
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-epoch loss trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    ckpt: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Rolling mode: feed the model its own previous predictions through
    /// the prior-probability column. Requires --bonds.
    #[arg(long)]
    rolling: bool,
    #[arg(long)]
    bonds: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    ckpt: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Labeled bonds for the latent-grade reference comparison.
    #[arg(long)]
    bonds: Option<PathBuf>,
    /// Labels CSV for the persistence baseline.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Write a per-seed grid cell JSON for `report --grid`.
    #[arg(long)]
    cell: Option<PathBuf>,
    /// Plot-ready CSV of predicted vs reference probabilities.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory holding cell_*.json files.
    #[arg(long)]
    grid: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    /// Run every stage (the default and only mode).
    #[arg(long)]
    all: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic bond market.
    Generate(GenerateArgs),
    /// Annotate bonds with daily default probabilities.
    Label(LabelArgs),
    /// Fill, standardize, window, split and balance into a dataset.
    Preprocess(PreprocessArgs),
    /// Train a forecaster variant on a preprocessed dataset.
    Train(TrainArgs),
    /// Predict next-day default probabilities for the test split.
    Predict(PredictArgs),
    /// Compute test metrics and the rating-reference comparison.
    Evaluate(EvaluateArgs),
    /// Aggregate evaluation cells into the comparison table.
    Report(ReportArgs),
    /// Run all stages into one directory.
    Pipeline(PipelineArgs),
}

/// Default output root: the BONDRISK_OUT environment variable or the
/// current directory.
fn out_root() -> PathBuf {
    std::env::var_os("BONDRISK_OUT").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
}

fn resolve_out(explicit: Option<PathBuf>, default_name: &str) -> PathBuf {
    explicit.unwrap_or_else(|| out_root().join(default_name))
}

fn parse_weights(text: &str) -> Result<[f64; 3], CoreError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(CoreError::Config(format!(
            "weights must be three comma-separated numbers, got {text:?}"
        )));
    }
    let mut out = [0.0; 3];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| CoreError::Config(format!("bad weight {part:?}")))?;
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<(), CoreError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CoreError::Config(format!("thread pool: {e}")))?;
    }

    match cli.command {
        Command::Generate(args) => {
            if let Some(n) = args.n_bonds {
                config.n_bonds = n;
            }
            if let Some(f) = args.default_fraction {
                config.default_fraction = f;
            }
            if let Some(v) = args.min_life {
                config.min_life = v;
            }
            if let Some(v) = args.max_life {
                config.max_life = v;
            }
            config.validate()?;
            let out = resolve_out(args.out, "bonds.jsonl");
            stages::run_generate(&config, &out)
        }
        Command::Label(args) => {
            if let Some(omega) = args.omega {
                config.omega = omega;
            }
            if let Some(n) = args.n_accel {
                config.n_accel = n;
            }
            if let Some(w) = &args.weights {
                config.weights = parse_weights(w)?;
            }
            config.validate()?;
            let out = resolve_out(args.out, "labels.csv");
            let bonds_out = args
                .bonds_out
                .unwrap_or_else(|| out_root().join("bonds_labeled.jsonl"));
            stages::run_label(&config, &args.bonds, &out, &bonds_out)
        }
        Command::Preprocess(args) => {
            config.validate()?;
            let window = args.window.unwrap_or(config.window);
            let out = resolve_out(args.out, &format!("dataset_w{window}.bin"));
            stages::run_preprocess(&config, &args.bonds, &args.labels, window, &out)
        }
        Command::Train(args) => {
            if let Some(epochs) = args.epochs {
                config.epochs = epochs;
            }
            config.validate()?;
            let variant: Option<Variant> = match &args.variant {
                Some(text) => Some(text.parse()?),
                None => None,
            };
            let out = resolve_out(args.out, "model.ckpt");
            stages::run_train(
                &config,
                &args.dataset,
                variant,
                args.window,
                cli.seed,
                &out,
                args.trace.as_deref(),
            )
        }
        Command::Predict(args) => {
            config.validate()?;
            if args.rolling && args.bonds.is_none() {
                return Err(CoreError::Config("--rolling requires --bonds".into()));
            }
            let out = resolve_out(args.out, "predictions.csv");
            let rolling = if args.rolling { args.bonds.as_deref() } else { None };
            stages::run_predict(&config, &args.ckpt, &args.dataset, &out, rolling)
        }
        Command::Evaluate(args) => {
            config.validate()?;
            let out = resolve_out(args.out, "report.csv");
            stages::run_evaluate(
                &config,
                &args.ckpt,
                &args.dataset,
                args.bonds.as_deref(),
                args.labels.as_deref(),
                &out,
                args.cell.as_deref(),
                args.plot.as_deref(),
            )
        }
        Command::Report(args) => {
            config.validate()?;
            let out = resolve_out(args.out, "table.csv");
            stages::run_report(&config, &args.grid, &out)
        }
        Command::Pipeline(args) => {
            config.validate()?;
            let out = resolve_out(args.out, "run");
            stages::run_pipeline(&config, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                CoreError::Config(_) | CoreError::Domain(_) => EXIT_CONFIG,
                CoreError::MissingInput(_) => EXIT_MISSING_INPUT,
                CoreError::Numerical(_) => EXIT_NUMERICAL,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}
