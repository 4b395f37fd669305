use clap::ValueEnum;
use serde::Serialize;
use swinfer_core::{check_a1, BandFamily, BootstrapConfig, Branch, CiConfig, IntervalParams, Method, ProjectedPair};

use super::PairArgs;
use crate::error::{CliError, CliResult};
use crate::output::{num, print_json};

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    Dkw,
    Relvc,
}

impl From<Band> for BandFamily {
    fn from(b: Band) -> Self {
        match b {
            Band::Dkw => BandFamily::Dkw,
            Band::Relvc => BandFamily::RelVc,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodArg {
    Finite,
    Boot,
    Hybrid,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Finite => Method::FiniteSample,
            MethodArg::Boot => Method::Bootstrap,
            MethodArg::Hybrid => Method::Hybrid,
        }
    }
}

#[derive(clap::Args, Debug)]
pub struct Args {
    #[command(flatten)]
    pair: PairArgs,
    /// Miscoverage level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = Band::Dkw)]
    band: Band,
    #[arg(long, value_enum, default_value_t = MethodArg::Finite)]
    method: MethodArg,
    /// Bootstrap replications.
    #[arg(long = "boot-reps", default_value_t = 1000)]
    boot_reps: usize,
    /// Minimal point spacing at or below which the hybrid treats a sample as atomic.
    #[arg(long = "spacing-tol", default_value_t = 0.0)]
    spacing_tol: f64,
    /// Compute the finite-sample interval even when A1 fails.
    #[arg(long = "override-a1")]
    override_a1: bool,
}

#[derive(Serialize)]
struct Report {
    #[serde(serialize_with = "num")]
    lower: f64,
    #[serde(serialize_with = "num")]
    upper: f64,
    #[serde(serialize_with = "num")]
    estimate: f64,
    method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    branch: Option<Branch>,
    level: f64,
    a1_ok: bool,
    params: IntervalParams,
}

pub fn run(args: Args) -> CliResult<()> {
    let data = args.pair.load()?;
    let method = Method::from(args.method);
    let band = BandFamily::from(args.band);
    let per_dir = args.alpha / data.dirs.len() as f64;
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CliError::input(format!("--alpha must lie in (0, 1), got {}", args.alpha)));
    }
    let a1_ok = check_a1(data.to.delta(), per_dir, data.x.n(), data.y.n(), band);
    let mut cfg = CiConfig::new(args.alpha, band);
    cfg.override_a1 = args.override_a1;
    if !a1_ok && !args.override_a1 && method != Method::Bootstrap {
        // Reports the smallest passing trimming constant.
        swinfer_core::require_a1(data.to.delta(), per_dir, data.x.n(), data.y.n(), band)?;
    }
    if method != Method::FiniteSample && args.boot_reps == 0 {
        return Err(CliError::input("--boot-reps must be positive"));
    }
    let pair = ProjectedPair::new(&data.x, &data.y, &data.dirs)?;
    let boot = BootstrapConfig::new(args.boot_reps, args.pair.seed, args.alpha);
    let iv = match method {
        Method::FiniteSample => pair.finite(data.to, &cfg)?,
        Method::Bootstrap => pair.bootstrap(data.to, &boot)?,
        Method::Hybrid => pair.hybrid(data.to, &cfg, &boot, args.spacing_tol)?,
    };
    print_json(&Report {
        lower: iv.lower,
        upper: iv.upper,
        estimate: pair.estimate(data.to),
        method: iv.method,
        branch: iv.branch,
        level: iv.level,
        a1_ok,
        params: iv.params,
    })
}
