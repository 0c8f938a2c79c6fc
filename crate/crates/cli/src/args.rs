use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lrcp_core::lrcp::RetainRatio;
use lrcp_core::{Centering, Scoring, SubspaceMethod};
use serde::Serialize;

/// Low-rank compressibility guided token pruning.
///
/// Set LRCP_THREADS to bound the worker pool.
#[derive(Debug, Parser)]
#[command(name = "lrcp", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compress one token matrix to a fixed budget.
    Compress(CompressArgs),
    /// Explained-variance spectra and Rank@v for one or more layers.
    Spectrum(SpectrumArgs),
    /// Subspace stability under random dropout or LRCP pruning.
    Stability(StabilityArgs),
    /// Generate a synthetic token matrix.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Check LRCP's selection against exhaustive enumeration.
    Oracle(OracleArgs),
    /// Time compression over a range of token counts.
    Bench(BenchArgs),
    /// Per-stage keep counts and retention for a staged plan.
    Plan(PlanArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputDtype {
    F32,
    F64,
}

#[derive(Debug, Args, Serialize)]
pub struct CompressArgs {
    /// Input .npy file of shape (N, D).
    pub input: PathBuf,
    /// Dimension r of the dominant subspace.
    #[arg(long, default_value_t = 4)]
    pub rank: usize,
    /// Number of tokens to keep.
    #[arg(long)]
    pub budget: usize,
    #[arg(long, default_value_t = Scoring::ResidualDescending)]
    #[serde(serialize_with = "as_display")]
    pub scoring: Scoring,
    /// Output the selected rows without merging discarded tokens.
    #[arg(long)]
    pub no_merge: bool,
    #[arg(long, default_value_t = Centering::None)]
    #[serde(serialize_with = "as_display")]
    pub center: Centering,
    #[arg(long, default_value_t = SubspaceMethod::Pca)]
    #[serde(serialize_with = "as_display")]
    pub subspace: SubspaceMethod,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputDtype::F64)]
    pub dtype: OutputDtype,
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    /// .npy file (2-D or 3-D stack) or a directory of per-layer .npy files.
    pub input: PathBuf,
    /// Percentages v for Rank@v.
    #[arg(long, value_delimiter = ',', default_values_t = [90.0, 95.0])]
    pub variance: Vec<f64>,
    /// Leading components to compute (default: min(N, D), or 64 above 512).
    #[arg(long)]
    pub components: Option<usize>,
    /// JSON report path.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional CSV of per-component fractions.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityModeArg {
    Random,
    Pruned,
}

#[derive(Debug, Args, Serialize)]
pub struct StabilityArgs {
    /// .npy file (2-D or 3-D stack) or a directory of per-layer .npy files.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = StabilityModeArg::Random)]
    pub mode: StabilityModeArg,
    /// Fractions of tokens to drop.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.8])]
    pub drop: Vec<f64>,
    /// Trials per drop ratio in random mode.
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 4)]
    pub rank: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseArg {
    Gaussian,
    StudentT,
}

#[derive(Debug, Subcommand)]
pub enum SynthCommand {
    /// Planted low-rank matrix plus noise.
    LowRank(LowRankArgs),
    /// Low-rank background tokens plus orthogonal outlier tokens.
    Outliers(OutlierArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct LowRankArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    /// Planted singular values, non-increasing; their count is the rank.
    #[arg(long, value_delimiter = ',', required = true)]
    pub spectrum: Vec<f64>,
    /// Entry-wise noise standard deviation.
    #[arg(long, conflicts_with = "relative_noise")]
    pub sigma: Option<f64>,
    /// Noise Frobenius norm as a fraction of the signal's.
    #[arg(long)]
    pub relative_noise: Option<f64>,
    #[arg(long, value_enum, default_value_t = NoiseArg::Gaussian)]
    pub noise: NoiseArg,
    /// Degrees of freedom for student-t noise.
    #[arg(long, default_value_t = 5.0)]
    pub dof: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output .npy path; a .json sidecar with the ground truth is written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct OutlierArgs {
    #[arg(long)]
    pub background: usize,
    #[arg(long)]
    pub outliers: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 4)]
    pub rank: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct OracleArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub rank: usize,
    #[arg(long)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Optional JSON report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [512, 1024, 2048, 4096])]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 4096)]
    pub dim: usize,
    #[arg(long, default_value_t = 4)]
    pub rank: usize,
    #[arg(long, default_value_t = 64)]
    pub budget: usize,
    /// Runs per size; the median is reported.
    #[arg(long, default_value_t = 5)]
    pub repeat: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV output path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct PlanArgs {
    /// Visual tokens entering the first stage.
    #[arg(long)]
    pub tokens: usize,
    /// Per-stage retain ratios, e.g. `1/6,1/3` or `0.5,33.3%`.
    #[arg(long, value_delimiter = ',', required = true)]
    #[serde(serialize_with = "ratios_as_f64")]
    pub ratios: Vec<RetainRatio>,
    /// Number of LLM layers.
    #[arg(long, default_value_t = 32)]
    pub layers: usize,
    /// LLM layers where stages after the first run.
    #[arg(long, value_delimiter = ',', default_values_t = [16])]
    pub at: Vec<usize>,
    /// Optional JSON output path; the plan is always printed.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn as_display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn ratios_as_f64<S: serde::Serializer>(v: &[RetainRatio], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|r| r.value()))
}
