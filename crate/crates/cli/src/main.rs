//! `qetu` experiment command line.

mod commands;
mod config;
mod error;
mod output;
mod ranges;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "qetu", version, about = "QETU state-preparation experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

/// Flags shared by every subcommand. None of them affect the numbers except
/// `--seed`.
#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// JSON object of flag values; explicit flags take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Manifest path (defaults to `<out>.manifest.json` when `--out` is set).
    #[arg(long)]
    #[serde(skip)]
    pub manifest: Option<PathBuf>,
    /// Worker threads for scans.
    #[arg(long, default_value_t = 1)]
    #[serde(skip)]
    pub jobs: usize,
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Minimax step polynomial for a sigma window (optionally with phases).
    SolveStep(commands::SolveStepArgs),
    /// Gaussian filter polynomial for a wavepacket grid.
    SolveGaussian(commands::SolveGaussianArgs),
    /// Ground-state preparation scans over degree and tau.
    Gsprep(commands::GsprepArgs),
    /// Error against Trotter step size, with an optional cost fit.
    ScanDtau(commands::ScanDtauArgs),
    /// Exact and bounded spectral gaps of the U(1) model.
    Bounds(commands::BoundsArgs),
    /// Overlap of the adiabatically prepared state with the ground state.
    Adiabatic(commands::AdiabaticArgs),
    /// Gaussian wavepacket preparation errors.
    Wavepacket(commands::WavepacketArgs),
    /// Gate counts of QETU against exact amplitude encoding.
    Gatecount(commands::GatecountArgs),
    /// Optimal Trotter step for a two-term error model.
    OptimalDtau(commands::OptimalDtauArgs),
}

fn run(argv: Vec<String>) -> Result<(), CliError> {
    let argv = config::merge_config(argv)?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            e.print().ok();
            std::process::exit(code);
        }
    };
    match cli.cmd {
        Cmd::SolveStep(a) => commands::solve_step(a),
        Cmd::SolveGaussian(a) => commands::solve_gaussian(a),
        Cmd::Gsprep(a) => commands::gsprep(a),
        Cmd::ScanDtau(a) => commands::scan_dtau(a),
        Cmd::Bounds(a) => commands::bounds(a),
        Cmd::Adiabatic(a) => commands::adiabatic(a),
        Cmd::Wavepacket(a) => commands::wavepacket(a),
        Cmd::Gatecount(a) => commands::gatecount(a),
        Cmd::OptimalDtau(a) => commands::optimal_dtau(a),
    }
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qetu: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
