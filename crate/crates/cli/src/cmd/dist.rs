use serde::Serialize;
use swinfer_core::sliced_wasserstein;

use super::PairArgs;
use crate::error::CliResult;
use crate::output::{num, print_json};

#[derive(clap::Args, Debug)]
pub struct Args {
    #[command(flatten)]
    pair: PairArgs,
}

#[derive(Serialize)]
struct Report {
    #[serde(serialize_with = "num")]
    estimate: f64,
    r: f64,
    delta: f64,
    #[serde(rename = "N")]
    num_dirs: Option<usize>,
    seed: Option<u64>,
}

pub fn run(args: Args) -> CliResult<()> {
    let data = args.pair.load()?;
    let estimate = sliced_wasserstein(&data.x, &data.y, data.to, &data.dirs)?;
    let sliced = args.pair.sliced;
    print_json(&Report {
        estimate,
        r: args.pair.r,
        delta: args.pair.delta,
        num_dirs: sliced.then_some(data.dirs.len()),
        seed: sliced.then_some(args.pair.seed),
    })
}
