//! `walklab`: period, spectral radius, ratio limits and h-processes of random
//! walks on groups, from a JSON configuration.
//!
//! Exit codes: 0 success, 1 invalid input, 2 certified non-irreducible,
//! 3 numeric failure or size cap.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use walklab_core::WalkError;

use config::{Command, Overrides, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{0}")]
    Walk(WalkError),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Numeric(_) => 3,
            CliError::Walk(e) => match e {
                WalkError::InvalidGroup(_)
                | WalkError::Syntax { .. }
                | WalkError::NotInGroup(_)
                | WalkError::BackendMismatch(_)
                | WalkError::InvalidMeasure(_)
                | WalkError::InvalidArgument(_)
                | WalkError::Unsupported(_) => 1,
                WalkError::Reducible(_) => 2,
                _ => 3,
            },
        }
    }
}

#[derive(Parser)]
#[command(name = "walklab", version, about = "Random walks on groups: period, spectral radius, ratio limits")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Period, coset labels and Gamma_0, with verification.
    Period(Args),
    /// Spectral radius estimate and bounds.
    Spectral(Args),
    /// Ratio series mu^(n+1)(x) / mu^(n)(x).
    Ratio(Args),
    /// Limit measure and convolution-equation residual.
    LimitMeasure(Args),
    /// Doob h-process rows and diagonal.
    Hprocess(Args),
    /// Binomial large-deviation tails.
    Bernoulli(Args),
    /// Ratio limit of a finite substochastic matrix.
    Chain(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `n_max` from the config.
    #[arg(long = "nmax")]
    n_max: Option<usize>,
    /// Exact rational arithmetic where the command supports it.
    #[arg(long)]
    exact: bool,
    /// Output directory (default: the config's `out`, else `.`).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (cmd, args) = match cli.command {
        Cmd::Period(a) => (Command::Period, a),
        Cmd::Spectral(a) => (Command::Spectral, a),
        Cmd::Ratio(a) => (Command::Ratio, a),
        Cmd::LimitMeasure(a) => (Command::LimitMeasure, a),
        Cmd::Hprocess(a) => (Command::HProcess, a),
        Cmd::Bernoulli(a) => (Command::Bernoulli, a),
        Cmd::Chain(a) => (Command::Chain, a),
    };
    let overrides = Overrides {
        n_max: args.n_max,
        exact: args.exact,
        out: args.out,
    };
    let result = RunConfig::load(&args.config)
        .and_then(|c| c.resolve(cmd, &overrides))
        .and_then(|c| commands::run(cmd, c));
    match result {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("walklab {}: {e}", cmd.name());
            ExitCode::from(e.exit_code())
        }
    }
}
