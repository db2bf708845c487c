use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use entangle_core::harness::OutputFormat;

#[derive(Parser, Debug)]
#[command(
    name = "entangle",
    version,
    about = "Eigenstate entanglement sweeps for coupled chaotic Floquet systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

impl Cli {
    pub fn log_level(&self) -> &'static str {
        match self.verbose {
            0 => "warn",
            1 => "info",
            _ => "debug",
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Entropies, moments, λ₁, λ₂ and IPRs over a Λ grid.
    Sweep(SweepArgs),
    /// Distribution of the scaled entanglement variable u at small Λ.
    Udist(UdistArgs),
    /// Rescaled IPR against the purity term, flagged by the RMT envelope.
    IprRatio(IprRatioArgs),
    /// SVG figures from a saved sweep.json, or from a fresh sweep.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Rmt,
    Kr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

/// Flags shared by every subcommand. Flags given explicitly override the
/// `--config` file.
#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,

    /// Subsystem dimension N.
    #[arg(long)]
    pub n: Option<usize>,

    /// Comma-separated values or `logspace:a:b:m` with endpoint values a, b.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_grid: Option<String>,

    /// RMT ensemble size; the kicked rotor always runs once.
    #[arg(long)]
    pub realizations: Option<usize>,

    /// Comma-separated entropy orders.
    #[arg(long, value_delimiter = ',')]
    pub k_set: Option<Vec<u32>>,

    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,

    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub threads: Option<usize>,

    /// JSON sweep configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug)]
pub struct UdistArgs {
    #[command(flatten)]
    pub run: RunArgs,

    /// Λ values to pool; defaults to the positive grid points with Λ ≤ 1e-3.
    #[arg(long, value_delimiter = ',')]
    pub u_lambdas: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
pub struct IprRatioArgs {
    #[command(flatten)]
    pub run: RunArgs,

    /// Realizations of the RMT reference sweep that sets the envelope for
    /// the kicked rotor.
    #[arg(long, default_value_t = 20)]
    pub reference_realizations: usize,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    #[command(flatten)]
    pub run: RunArgs,

    /// A sweep.json file, or a directory containing one.
    #[arg(long)]
    pub input: Option<PathBuf>,
}
