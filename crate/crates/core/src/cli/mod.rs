//! The `longtail-sar` command line.
//!
//! Each subcommand reads its inputs from files, runs one stage and writes
//! its outputs plus a resolved-config snapshot. Settings come from flags,
//! then the `--config` file, then defaults. Exit status: 0 on success,
//! [`EXIT_CONTRACT`] for contract violations (bad input, bad config, stage
//! errors), [`EXIT_IO`] for filesystem failures.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::imageproc::NoiseVariance;
use crate::knn::Metric;
use crate::metrics::AucAverage;

pub use config::{Settings, KNOWN_KEYS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONTRACT: i32 = 1;
pub const EXIT_IO: i32 = 2;

/// Exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_io() {
        EXIT_IO
    } else {
        EXIT_CONTRACT
    }
}

#[derive(Debug, Parser)]
#[command(name = "longtail-sar", version, about = "Long-tail SAR classification pipeline")]
pub struct Cli {
    /// Flat `key = value` config file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Seed for generation and sampling (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 lets the runtime decide (default 0).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Distance metric: euclidean or cosine (default euclidean).
    #[arg(long, global = true)]
    pub metric: Option<Metric>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic long-tail embedding file.
    Gen(GenArgs),
    /// Lee-filter every PGM/PNG raster in a directory.
    Denoise(DenoiseArgs),
    /// Stack SAR, denoised and translated EO chips into composites.
    Compose(ComposeArgs),
    /// Clean, balance and train the subset ensemble.
    Fit(FitArgs),
    /// Predict classes and probabilities for an embedding file.
    Predict(PredictArgs),
    /// Score predictions against labelled embeddings.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Output embedding file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Number of classes (default 10).
    #[arg(long)]
    pub n_classes: Option<usize>,
    /// Size of the largest class (default 10000).
    #[arg(long)]
    pub head_size: Option<usize>,
    /// Largest over smallest class size (default 1000).
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Embedding dimension (default 16).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Within-class standard deviation (default 1).
    #[arg(long)]
    pub spread: Option<f64>,
    /// Standard deviation of class centroids (default 1).
    #[arg(long)]
    pub separation: Option<f64>,
    /// Also write a balanced holdout drawn from the same centroids.
    #[arg(long)]
    pub holdout: Option<PathBuf>,
    /// Holdout samples per class (default 100).
    #[arg(long)]
    pub holdout_per_class: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    /// Directory of input rasters.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Directory for filtered rasters (same names and formats).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Odd window side in [3, 15] (default 7).
    #[arg(long)]
    pub window: Option<usize>,
    /// `auto` or a fixed variance on the [0, 1] intensity scale.
    #[arg(long)]
    pub noise_variance: Option<NoiseVariance>,
}

#[derive(Debug, Args)]
pub struct ComposeArgs {
    /// Original SAR chips.
    #[arg(long)]
    pub sar: Option<PathBuf>,
    /// Lee-filtered chips, matched to SAR by file stem.
    #[arg(long)]
    pub denoised: Option<PathBuf>,
    /// Translated EO chips.
    #[arg(long)]
    pub eo: Option<PathBuf>,
    /// Directory for `.ltcr` composites and the report.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Composite side length (default 56).
    #[arg(long)]
    pub size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Training embedding file.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Output directory for the manifest, members and reports.
    #[arg(long)]
    pub model_dir: Option<PathBuf>,
    /// Number of balanced subsets (default 7).
    #[arg(long)]
    pub subsets: Option<usize>,
    /// Neighbours per member (default 3).
    #[arg(long)]
    pub k: Option<usize>,
    /// Samples per class per subset (default: smallest class after cleaning).
    #[arg(long)]
    pub per_class_target: Option<usize>,
    /// NearMiss shortlist size per opposing sample (default 3).
    #[arg(long)]
    pub shortlist_m: Option<usize>,
    /// Opposing neighbours averaged by NearMiss (default 3).
    #[arg(long)]
    pub nearmiss_k: Option<usize>,
    /// L2-normalize embeddings before fitting and predicting.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub normalize: Option<bool>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Model manifest, or the directory holding `manifest.txt`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Embedding file to score.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Output predictions CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Predictions CSV from `predict`.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Embedding file whose labels are the ground truth.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Directory for `report.csv` and `per_class.csv`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// macro, weighted or micro (default macro).
    #[arg(long)]
    pub auc_average: Option<AucAverage>,
}

/// Settings shared by every subcommand.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Globals {
    pub seed: u64,
    pub metric: Metric,
}

/// Runs a parsed command line.
pub fn execute(cli: Cli) -> Result<()> {
    let mut settings = Settings::load(cli.config.as_deref())?;
    let globals = Globals {
        seed: settings.get("seed", cli.seed, 0)?,
        metric: settings.get("metric", cli.metric, Metric::Euclidean)?,
    };
    let threads = settings.get("threads", cli.threads, 0usize)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))?;
    pool.install(|| match cli.command {
        Command::Gen(a) => commands::gen(a, globals, settings),
        Command::Denoise(a) => commands::denoise(a, globals, settings),
        Command::Compose(a) => commands::compose(a, globals, settings),
        Command::Fit(a) => commands::fit(a, globals, settings),
        Command::Predict(a) => commands::predict(a, globals, settings),
        Command::Evaluate(a) => commands::evaluate(a, globals, settings),
    })
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status. Usage errors count as contract errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONTRACT } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    run(std::env::args_os())
}
