//! `wishart-rd`: rate-distortion bounds, verification suites, numerical oracles and
//! random-geometric-graph sweeps from the command line.
//!
//! Exit codes: 0 success, 1 verification violations, 2 usage or validation error,
//! 3 I/O failure, 4 internal failure.

mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunArgs;
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "wishart-rd", version, about = "Rate-distortion bounds for Wishart and spherical Gram matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate every applicable lower bound at (n, d, D), or over a --grid CSV
    Bounds(RunArgs),
    /// Run randomized inequality and identity suites; exit 1 on any violation
    Verify(RunArgs),
    /// Blahut-Arimoto curves, Wishart entropy Monte Carlo, quantizer achievability
    Oracle(RunArgs),
    /// Spectral-estimator loss sweep over (n, d, p)
    PhaseDiagram(RunArgs),
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let (mut args, handler): (RunArgs, fn(&RunArgs) -> Result<u8, CliError>) = match cli.command {
        Command::Bounds(a) => (a, commands::bounds::run),
        Command::Verify(a) => (a, commands::verify::run),
        Command::Oracle(a) => (a, commands::oracle::run),
        Command::PhaseDiagram(a) => (a, commands::phase::run),
    };
    args.merge_config_file()?;
    if let Some(threads) = args.threads {
        if threads == 0 {
            return Err(CliError::usage("--threads must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    handler(&args)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("wishart-rd: {e}");
            e.exit_code()
        }
    }
}
