use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use jcqoc::app::{run, Overrides, Subcommand};
use jcqoc::config::RunConfig;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    /// Diagonalize at the initial and target couplings; save states and SPDM.
    Ground,
    /// SPDM element over a (g, J) grid.
    SpdmMap,
    /// Linear-ramp fidelities for a list of durations.
    Adiabatic,
    /// One CRAB optimization.
    Optimize,
    /// Optimized and adiabatic fidelity versus duration.
    Sweep,
    /// Threshold-time search per constraint set.
    Threshold,
    /// Speed-limit estimate for an optimized pulse.
    Qsl,
    /// Fidelity under Gaussian control noise.
    Noise,
    /// Fidelity under cavity and qubit decay.
    Lindblad,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Ground => Subcommand::Ground,
            Command::SpdmMap => Subcommand::SpdmMap,
            Command::Adiabatic => Subcommand::Adiabatic,
            Command::Optimize => Subcommand::Optimize,
            Command::Sweep => Subcommand::Sweep,
            Command::Threshold => Subcommand::Threshold,
            Command::Qsl => Subcommand::Qsl,
            Command::Noise => Subcommand::Noise,
            Command::Lindblad => Subcommand::Lindblad,
        }
    }
}

/// Optimal-control ground-state preparation in a Jaynes-Cummings lattice.
///
/// Exit codes: 1 invalid configuration, 2 numerical failure, 3 threshold not found.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output root; artifacts go to <out>/<subcommand>/.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Reporting time step (overrides the configured step count).
    #[arg(long)]
    dt: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides {
        seed: cli.seed,
        output_dir: cli.out,
        workers: cli.workers,
        dt: cli.dt,
    };
    let config = match &cli.config {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::default()),
    };
    let result = config.and_then(|c| run(cli.command.into(), &overrides.apply(c)));
    match result {
        Ok(summary) => {
            println!("{}: {}", summary.subcommand, summary.headline);
            println!("wrote {} files to {}", summary.files.len(), summary.output_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
