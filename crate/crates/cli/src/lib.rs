//! `zladder`: command-line driver for the zeta-ladder library.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod plot;

use clap::{Parser, Subcommand};

pub use commands::Context;
pub use config::{GlobalArgs, Settings};
pub use error::{CliError, CliResult};
pub use manifest::RunManifest;

#[derive(Debug, Parser)]
#[command(name = "zladder", version, about = "Critical-line zeta experiments: Riemann-Siegel Z, Hardy-Littlewood moments, Jacob's ladder and the zeta factorization")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate Z(t), θ(t), |ζ(1/2+it)| and the oracle difference on a grid.
    Eval(commands::EvalArgs),
    /// Hardy-Littlewood moment J̄ over [T, T + T^0.5001] (JSON).
    Moment(commands::MomentArgs),
    /// φ₁(T) and the complement ratio for a list of heights (CSV).
    Ladder(commands::LadderArgs),
    /// The α-sequence for (T, H, k) (CSV).
    Alphas(commands::AlphasArgs),
    /// Factorization report (facrep-v1 JSON) or a parameter sweep (CSV).
    Factorize(commands::FactorizeArgs),
    /// Local spectrum ln(τ(x)/n) of the Riemann-Siegel sum at x (CSV).
    Spectrum(commands::SpectrumArgs),
    /// Fit c₀ and write the calibration artifact.
    Calibrate(commands::CalibrateArgs),
    /// Render columns of a CSV file as an SVG plot.
    Plot(commands::PlotArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Eval(_) => "eval",
            Command::Moment(_) => "moment",
            Command::Ladder(_) => "ladder",
            Command::Alphas(_) => "alphas",
            Command::Factorize(_) => "factorize",
            Command::Spectrum(_) => "spectrum",
            Command::Calibrate(_) => "calibrate",
            Command::Plot(_) => "plot",
        }
    }
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // A second initialization in the same process is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let settings = Settings::resolve(&cli.global)?;
    let ctx = Context::new(settings, cli.global.clone());
    ctx.dispatch(&cli.command)
}
