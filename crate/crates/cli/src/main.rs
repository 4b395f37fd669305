//! `swinfer`: sliced Wasserstein distances, confidence intervals,
//! simulation studies and likelihood-free confidence sets from the shell.

mod cache;
mod cmd;
mod error;
mod io;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "swinfer", version, about = "Inference for sliced Wasserstein distances")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Plug-in trimmed (sliced) Wasserstein distance between two samples.
    Dist(cmd::dist::Args),
    /// Confidence interval for the trimmed (sliced) Wasserstein distance.
    Ci(cmd::ci::Args),
    /// Coverage, length and runtime study over models, methods and sizes.
    Sim(cmd::sim::Args),
    /// Interval length against sample size, with fitted log-log slopes.
    Scaling(cmd::scaling::Args),
    /// Likelihood-free confidence set over a parameter grid.
    Lfi(cmd::lfi::Args),
    /// Draw a sample from one of the built-in models as CSV.
    Sample(cmd::sample::Args),
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("SWINFER_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::input(format!("SWINFER_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::input(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Dist(a) => cmd::dist::run(a),
        Command::Ci(a) => cmd::ci::run(a),
        Command::Sim(a) => cmd::sim::run(a),
        Command::Scaling(a) => cmd::scaling::run(a),
        Command::Lfi(a) => cmd::lfi::run(a),
        Command::Sample(a) => cmd::sample::run(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
