pub mod ci;
pub mod dist;
pub mod lfi;
pub mod sample;
pub mod scaling;
pub mod sim;

use std::path::PathBuf;

use swinfer_core::{sample_directions, DirectionSet, Sample, TrimOrder};

use crate::error::{CliError, CliResult};
use crate::io::read_sample;

/// Input files and distance parameters shared by `dist` and `ci`.
#[derive(clap::Args, Debug, Clone)]
pub struct PairArgs {
    /// First sample (CSV, one point per row).
    #[arg(long)]
    pub x: PathBuf,
    /// Second sample.
    #[arg(long)]
    pub y: PathBuf,
    /// Skip the first line of each sample file.
    #[arg(long)]
    pub header: bool,
    /// Wasserstein order r >= 1.
    #[arg(long, default_value_t = 2.0)]
    pub r: f64,
    /// Trimming constant in [0, 1/2).
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Average over random directions (required for multivariate data).
    #[arg(long)]
    pub sliced: bool,
    /// Number of random directions.
    #[arg(long = "num-dirs", default_value_t = 500)]
    pub num_dirs: usize,
    /// Seed for directions and resampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub struct Loaded {
    pub x: Sample,
    pub y: Sample,
    pub to: TrimOrder,
    pub dirs: DirectionSet,
}

impl PairArgs {
    /// Reads both samples and fixes the directions: the configured random set
    /// with `--sliced`, otherwise the single direction `+1` (one-dimensional
    /// data only).
    pub fn load(&self) -> CliResult<Loaded> {
        let to = TrimOrder::new(self.r, self.delta)?;
        let x = read_sample(&self.x, self.header)?;
        let y = read_sample(&self.y, self.header)?;
        if x.d() != y.d() {
            return Err(CliError::Dimension(format!("--x has {} columns but --y has {}", x.d(), y.d())));
        }
        let dirs = if self.sliced {
            if self.num_dirs == 0 {
                return Err(CliError::input("--num-dirs must be positive"));
            }
            sample_directions(x.d(), self.num_dirs, self.seed)?
        } else if x.d() == 1 {
            DirectionSet::from_directions(&[vec![1.0]], 0)?
        } else {
            return Err(CliError::Dimension(format!("samples have {} columns; pass --sliced", x.d())));
        };
        Ok(Loaded { x, y, to, dirs })
    }
}
