use clap::ValueEnum;
use serde::Serialize;
use swinfer_core::{run_scaling, Model, ScalingFit};

use super::sim::{write_records, HarnessArgs};
use crate::error::{CliError, CliResult};
use crate::output::print_json;

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    M6i,
    M6ii,
}

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(long, value_enum)]
    model: Family,
    /// Wasserstein orders.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    r: Vec<f64>,
    /// Mixture imbalances in [0, 1/2].
    #[arg(long = "Delta", value_delimiter = ',', default_value = "0")]
    gaps: Vec<f64>,
    #[command(flatten)]
    harness: HarnessArgs,
}

#[derive(Serialize)]
struct Report {
    fits: Vec<ScalingFit>,
}

pub fn run(args: Args) -> CliResult<()> {
    let sizes = &args.harness.sizes.0;
    let mut distinct = sizes.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(CliError::input("--sizes needs at least two distinct sizes to fit a slope"));
    }
    let mut fits = Vec::new();
    let mut records = Vec::new();
    for &r in &args.r {
        let cfg = args.harness.config(r)?;
        for &gap in &args.gaps {
            let model = match args.model {
                Family::M6i => Model::M6i { gap },
                Family::M6ii => Model::M6ii { gap },
            };
            model.validate()?;
            let (recs, fit) = run_scaling(&model, sizes, args.harness.reps, &cfg)?;
            records.extend(recs);
            fits.push(fit);
        }
    }
    if let Some(out) = &args.harness.out {
        write_records(out, &records)?;
    }
    print_json(&Report { fits })
}
