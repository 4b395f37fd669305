use std::fs::File;
use std::path::PathBuf;

use swinfer_core::models::toggle_switch;
use swinfer_core::{sample_pair, Model};

use crate::error::{CliError, CliResult};
use crate::io::write_sample;

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Model, e.g. `m1` or `toggle:alpha1=20`.
    #[arg(long)]
    model: String,
    /// Which distribution of the pair to draw from.
    #[arg(long, value_parser = ["p", "q"], default_value = "p")]
    side: String,
    #[arg(long)]
    n: usize,
    /// Size of the other sample, for pairs that depend on it.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: Args) -> CliResult<()> {
    let model: Model = args.model.parse()?;
    if args.n == 0 {
        return Err(CliError::input("--n must be positive"));
    }
    let sample = match (&model, args.side.as_str()) {
        // Toggle pairs are null pairs, so either side is the simulator itself.
        (Model::Toggle(p), _) => toggle_switch(p, args.n, args.seed)?,
        (_, "p") => sample_pair(&model, args.n, args.m.unwrap_or(args.n), args.seed)?.0,
        _ => sample_pair(&model, args.m.unwrap_or(args.n), args.n, args.seed)?.1,
    };
    match &args.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            write_sample(file, &sample)
        }
        None => write_sample(std::io::stdout().lock(), &sample),
    }
}
