use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Stdio};

use serde::Serialize;
use swinfer_core::models::{ToggleParams, DEFAULT_STEPS};
use swinfer_core::{
    lfi_confidence_set, sw_projection_estimate, BandFamily, Error, LfiConfig, ParamGrid, Sample, Simulator,
    ToggleSimulator, TrimOrder,
};

use super::ci::Band;
use crate::error::{CliError, CliResult};
use crate::io::{parse_sample, read_grid, read_sample};
use crate::output::{num, parse_real, print_json};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Observed sample (CSV).
    #[arg(long)]
    obs: PathBuf,
    /// Skip the first line of the observed sample.
    #[arg(long)]
    header: bool,
    /// `toggle`, or `exec:COMMAND` for an external program that prints a CSV
    /// sample. The command receives `M SEED θ1 … θD` as arguments and in
    /// `SWINFER_M`, `SWINFER_SEED` and `SWINFER_THETA` (comma-separated).
    #[arg(long)]
    simulator: String,
    /// Parameter grid (CSV). A first row of names selects which toggle
    /// parameters vary; without names the toggle grid needs all seven.
    #[arg(long)]
    grid: PathBuf,
    /// Synthetic sample size per grid point.
    #[arg(long, default_value_t = 10_000)]
    m: usize,
    /// Acceptance threshold on the lower bound (`inf` accepts everything).
    #[arg(long, default_value = "0", value_parser = parse_real)]
    eps: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, value_enum, default_value_t = Band::Dkw)]
    band: Band,
    /// Directions for multivariate data.
    #[arg(long = "num-dirs", default_value_t = 500)]
    num_dirs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Toggle-switch horizon T.
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    steps: usize,
    /// Per-grid-point intervals as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also report the grid point minimising the plug-in distance to an
    /// simulation of this size.
    #[arg(long = "estimate")]
    estimate_size: Option<usize>,
}

struct ExecSimulator {
    command: String,
}

impl Simulator for ExecSimulator {
    fn simulate(&self, theta: &[f64], m: usize, seed: u64) -> swinfer_core::Result<Sample> {
        let fail = |msg: String| Error::SimulatorFailure(format!("`{}`: {msg}", self.command));
        let theta_text: Vec<String> = theta.iter().map(|t| t.to_string()).collect();
        let output = Command::new("sh")
            .arg("-c")
            .arg(format!("{} \"$@\"", self.command))
            .arg("swinfer-simulator")
            .arg(m.to_string())
            .arg(seed.to_string())
            .args(&theta_text)
            .env("SWINFER_M", m.to_string())
            .env("SWINFER_SEED", seed.to_string())
            .env("SWINFER_THETA", theta_text.join(","))
            .stdin(Stdio::null())
            .stderr(Stdio::inherit())
            .output()
            .map_err(|e| fail(e.to_string()))?;
        if !output.status.success() {
            return Err(fail(format!("exited with {}", output.status)));
        }
        parse_sample(output.stdout.as_slice(), false, "simulator output").map_err(|e| fail(e.to_string()))
    }
}

#[derive(Serialize)]
struct Accepted {
    index: usize,
    theta: Vec<f64>,
}

#[derive(Serialize)]
struct Estimate {
    index: usize,
    theta: Vec<f64>,
    distance: f64,
}

#[derive(Serialize)]
struct Params {
    m: usize,
    n: usize,
    r: f64,
    delta: f64,
    alpha: f64,
    band: BandFamily,
    num_dirs: usize,
    seed: u64,
    simulator: String,
}

#[derive(Serialize)]
struct Report {
    accepted: Vec<Accepted>,
    #[serde(serialize_with = "num")]
    epsilon: f64,
    grid_size: usize,
    names: Option<Vec<String>>,
    point_estimate: Option<Estimate>,
    params: Params,
}

pub fn run(args: Args) -> CliResult<()> {
    let observed = read_sample(&args.obs, args.header)?;
    let grid_file = read_grid(&args.grid)?;
    let grid = ParamGrid::new(grid_file.points.clone()).map_err(|e| CliError::input(e.to_string()))?;
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CliError::input(format!("--alpha must lie in (0, 1), got {}", args.alpha)));
    }
    if args.eps.is_nan() || args.eps < 0.0 {
        return Err(CliError::input("--eps must be nonnegative"));
    }
    let simulator: Box<dyn Simulator> = match args.simulator.as_str() {
        "toggle" => {
            let base = ToggleParams { steps: args.steps, ..ToggleParams::reference() };
            let sim = match &grid_file.names {
                Some(names) => {
                    let names: Vec<&str> = names.iter().map(String::as_str).collect();
                    ToggleSimulator::with_free(base, &names).map_err(|e| CliError::input(e.to_string()))?
                }
                None if grid.dim() == 7 => ToggleSimulator::full(args.steps),
                None => {
                    return Err(CliError::input(format!(
                        "toggle grid has {} columns; name them in a header row or give all 7",
                        grid.dim()
                    )))
                }
            };
            for p in grid.points() {
                sim.params(p).map_err(|e| CliError::input(format!("grid point {p:?}: {e}")))?;
            }
            Box::new(sim)
        }
        s => match s.strip_prefix("exec:") {
            Some(cmd) if !cmd.trim().is_empty() => Box::new(ExecSimulator { command: cmd.to_string() }),
            _ => return Err(CliError::input(format!("unknown simulator {s:?}; use toggle or exec:COMMAND"))),
        },
    };
    let to = TrimOrder::new(args.r, args.delta)?;
    let cfg = LfiConfig {
        m: args.m,
        eps: args.eps,
        to,
        alpha: args.alpha,
        band: args.band.into(),
        num_dirs: args.num_dirs,
        seed: args.seed,
    };
    let result = lfi_confidence_set(&observed, simulator.as_ref(), &grid, &cfg)?;
    let point_estimate = match args.estimate_size {
        Some(size) => {
            let est = sw_projection_estimate(&observed, simulator.as_ref(), &grid, size, to, args.num_dirs, args.seed)?;
            Some(Estimate { index: est.index, theta: est.theta, distance: est.distances[est.index] })
        }
        None => None,
    };
    if let Some(path) = &args.out {
        let file = File::create(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        let mut w = csv::Writer::from_writer(file);
        let names: Vec<String> = grid_file
            .names
            .clone()
            .unwrap_or_else(|| (1..=grid.dim()).map(|k| format!("theta{k}")).collect());
        let header: Vec<String> =
            std::iter::once("index".to_string()).chain(names).chain(["lower", "upper", "accepted"].map(String::from)).collect();
        w.write_record(&header)?;
        for t in &result.per_theta {
            let row: Vec<String> = std::iter::once(t.index.to_string())
                .chain(t.theta.iter().map(|v| v.to_string()))
                .chain([t.lower.to_string(), t.upper.to_string(), t.accepted.to_string()])
                .collect();
            w.write_record(&row)?;
        }
        w.into_inner().map_err(|e| CliError::input(e.to_string()))?.flush()?;
    }
    print_json(&Report {
        accepted: result.accepted.iter().map(|&k| Accepted { index: k, theta: grid.point(k).to_vec() }).collect(),
        epsilon: args.eps,
        grid_size: grid.len(),
        names: grid_file.names,
        point_estimate,
        params: Params {
            m: args.m,
            n: observed.n(),
            r: args.r,
            delta: args.delta,
            alpha: args.alpha,
            band: args.band.into(),
            num_dirs: if observed.d() == 1 { 1 } else { args.num_dirs },
            seed: args.seed,
            simulator: args.simulator.clone(),
        },
    })
}
