use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "uqbench",
    version,
    about = "Selective prediction, calibration and C-OOD evaluation of classifier prediction logs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the metric suite for one log.
    Eval(EvalArgs),
    /// Fit temperature scaling on a calibration split and compare metrics.
    Calibrate(CalibrateArgs),
    /// Build C-OOD severity levels from a class pool and profile detection.
    Cood(CoodArgs),
    /// Evaluate several logs or reports and correlate their metrics.
    Compare(CompareArgs),
    /// Cross-check engine metrics against brute-force reference implementations.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    /// `.csv` files are CSV, anything else UQL1.
    Auto,
    Csv,
    Uql1,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KappaArgs {
    /// Confidence function: softmax-response, negative-entropy, mc-dropout or raw-score.
    #[arg(long, default_value = "softmax-response")]
    pub kappa: String,
    /// Temperature applied to logits before κ.
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MetricArgs {
    /// Number of equal-width ECE bins.
    #[arg(long, default_value_t = 15)]
    pub bins: usize,
    /// Selective-accuracy targets for SAC coverage.
    #[arg(long, value_delimiter = ',', default_values_t = [0.95, 0.99])]
    pub sac: Vec<f64>,
    /// Coverage set for the restricted AURC.
    #[arg(long, value_delimiter = ',')]
    pub coverages: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub log: PathBuf,
    #[command(flatten)]
    pub kappa: KappaArgs,
    #[command(flatten)]
    pub metrics: MetricArgs,
    /// Input log format.
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    pub format: InputFormat,
    /// Model id recorded in the report; defaults to the log file stem.
    #[arg(long)]
    pub model: Option<String>,
    /// Output directory; without it the report goes to stdout only.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub log: PathBuf,
    #[command(flatten)]
    pub kappa: KappaArgs,
    #[command(flatten)]
    pub metrics: MetricArgs,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    pub format: InputFormat,
    /// Size of the stratified calibration split.
    #[arg(long, default_value_t = 5000)]
    pub calib_size: usize,
    #[arg(long, env = "UQBENCH_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CoodArgs {
    /// In-distribution log.
    #[arg(long)]
    pub log: PathBuf,
    /// Class pool: a `class_id,split,score` table (`.csv`) or a UQL1 log
    /// whose label column holds OOD class ids.
    #[arg(long)]
    pub pool: PathBuf,
    #[command(flatten)]
    pub kappa: KappaArgs,
    /// κ the pool table was scored with; defaults to the ID κ.
    #[arg(long)]
    pub pool_kappa: Option<String>,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    pub format: InputFormat,
    /// Classes per severity group; defaults to the ID class count.
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long, env = "UQBENCH_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 150)]
    pub est_size: usize,
    #[arg(long, default_value_t = 50)]
    pub test_size: usize,
    /// Classes with fewer samples are dropped from a UQL1 pool.
    #[arg(long, default_value_t = 200)]
    pub min_samples: usize,
    /// Pool class ids to exclude.
    #[arg(long, value_delimiter = ',')]
    pub exclude: Vec<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompareArgs {
    /// Logs to evaluate (repeatable).
    #[arg(long)]
    pub log: Vec<PathBuf>,
    /// Existing report JSON files (repeatable).
    #[arg(long)]
    pub report: Vec<PathBuf>,
    #[command(flatten)]
    pub kappa: KappaArgs,
    #[command(flatten)]
    pub metrics: MetricArgs,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    pub format: InputFormat,
    /// `baseline:variant` model id pairs for relative-improvement deltas.
    #[arg(long)]
    pub pair: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OracleArgs {
    #[arg(long)]
    pub log: PathBuf,
    #[command(flatten)]
    pub kappa: KappaArgs,
    #[arg(long, default_value_t = 15)]
    pub bins: usize,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    pub format: InputFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
