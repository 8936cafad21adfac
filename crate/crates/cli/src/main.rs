//! `shearwave` command-line tool.

mod commands;
mod env;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use env::EnvArgs;
use output::Format;

/// Invalid flags, files or environments. Nothing is written.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug)]
pub enum Failure {
    Usage(UsageError),
    Compute(shearwave::Error),
    Write(std::io::Error),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e)
    }
}

impl From<shearwave::Error> for Failure {
    fn from(e: shearwave::Error) -> Self {
        Failure::Compute(e)
    }
}

#[derive(Debug, Parser)]
#[command(name = "shearwave", version, about = "Linear water waves over shear currents: dispersion, pressure transfer and gauge reconstruction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Wave speed c(k) over a wavenumber range
    Dispersion(SweepArgs),
    /// Long-wave (Burns) speeds
    Burns(BasicArgs),
    /// Pressure transfer function T(y) at one wavenumber
    Transfer(TransferArgs),
    /// Velocity and pressure field over one wavelength
    Field(FieldArgs),
    /// Interfacial wave speed and layer transfer functions
    Twofluid(SweepArgs),
    /// Synthetic bed-pressure gauge record
    Synth(SynthArgs),
    /// Surface elevation from a bed-pressure gauge record
    Reconstruct(ReconstructArgs),
    /// Critical-layer test for a linear current
    Stagnation(SweepArgs),
}

#[derive(Debug, Clone, Args)]
struct Tolerances {
    /// Relative tolerance of the ODE integrator
    #[arg(long, default_value_t = 1e-10)]
    rtol: f64,
    /// Absolute tolerance of the ODE integrator
    #[arg(long, default_value_t = 1e-12)]
    atol: f64,
}

#[derive(Debug, Clone, Args)]
struct OutArgs {
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Clone, Args)]
struct FormatArg {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Clone, Args)]
struct KRange {
    /// Single wavenumber
    #[arg(long, conflicts_with_all = ["k_min", "k_max"])]
    k: Option<f64>,
    #[arg(long, requires = "k_max")]
    k_min: Option<f64>,
    #[arg(long, requires = "k_min")]
    k_max: Option<f64>,
    /// Number of log-spaced wavenumbers in [k-min, k-max]
    #[arg(long, default_value_t = 1)]
    count: usize,
}

#[derive(Debug, Clone, Args)]
struct BasicArgs {
    #[command(flatten)]
    env: EnvArgs,
    #[command(flatten)]
    tol: Tolerances,
    #[command(flatten)]
    out: OutArgs,
    #[command(flatten)]
    format: FormatArg,
}

#[derive(Debug, Clone, Args)]
struct SweepArgs {
    #[command(flatten)]
    basic: BasicArgs,
    #[command(flatten)]
    k: KRange,
}

#[derive(Debug, Clone, Args)]
struct TransferArgs {
    #[command(flatten)]
    basic: BasicArgs,
    #[arg(long)]
    k: f64,
    /// Wave speed; the dispersion root is used when omitted
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
}

#[derive(Debug, Clone, Args)]
struct FieldArgs {
    #[command(flatten)]
    transfer: TransferArgs,
    /// Surface amplitude
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    phase: f64,
    /// Samples per wavelength
    #[arg(long, default_value_t = 64)]
    nx: usize,
}

#[derive(Debug, Clone, Args)]
struct SynthArgs {
    #[command(flatten)]
    env: EnvArgs,
    #[command(flatten)]
    tol: Tolerances,
    #[command(flatten)]
    out: OutArgs,
    /// Component as `k,amplitude,phase`; repeat for several
    #[arg(long = "mode", required = true, value_name = "K,A,PHASE", allow_hyphen_values = true)]
    modes: Vec<String>,
    /// Record length in seconds (extended to whole periods)
    #[arg(long)]
    duration: f64,
    /// Sampling interval in seconds
    #[arg(long)]
    dt: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    x_gauge: f64,
    /// Reference density for Pa <-> m^2/s^2
    #[arg(long, default_value_t = 1025.0)]
    rho_ref: f64,
    /// File stem of the gauge CSV and its sidecar
    #[arg(long, default_value = "gauge")]
    name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Spectral,
    Hydrostatic,
}

#[derive(Debug, Clone, Args)]
struct ReconstructArgs {
    #[command(flatten)]
    basic: BasicArgs,
    /// Gauge CSV (`t,p`) with a `.json` sidecar next to it
    #[arg(long)]
    gauge: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Spectral)]
    method: MethodArg,
    /// Drop bins amplified more than this multiple of the hydrostatic gain
    #[arg(long, default_value_t = 100.0)]
    max_amplification: f64,
    /// Keep linear trends in absolute-pressure records
    #[arg(long)]
    no_detrend: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(e)) => {
            eprintln!("shearwave: usage error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("shearwave: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Write(e)) => {
            eprintln!("shearwave: cannot write output: {e}");
            ExitCode::from(1)
        }
    }
}
