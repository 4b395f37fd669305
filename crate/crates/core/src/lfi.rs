//! Likelihood-free confidence sets for simulator parameters.
//!
//! For every parameter `θ` on a grid a fresh synthetic sample is drawn and
//! the finite-sample interval for `SW_{r,δ}(P, P_θ)` is computed against the
//! observed data. The confidence set keeps the grid points whose lower bound
//! is at most `ε`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bands::{require_a1, BandFamily};
use crate::error::{Error, Result};
use crate::intervals::{ci_sliced_projected, CiConfig};
use crate::models::{toggle_switch, ToggleParams};
use crate::rng;
use crate::transport::{
    check_pair, sample_directions, sliced_pow, DirectionSet, ProjectedSample, Sample, TrimOrder,
};

/// A data-generating process: `m` points for parameter `θ` from stream `seed`.
pub trait Simulator: Sync {
    fn simulate(&self, theta: &[f64], m: usize, seed: u64) -> Result<Sample>;
}

impl<F> Simulator for F
where
    F: Fn(&[f64], usize, u64) -> Result<Sample> + Sync,
{
    fn simulate(&self, theta: &[f64], m: usize, seed: u64) -> Result<Sample> {
        self(theta, m, seed)
    }
}

/// The toggle switch with some coordinates of `θ` free. Grid vectors supply
/// the free coordinates in order; the rest come from `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToggleSimulator {
    pub base: ToggleParams,
    /// Indices into `(α1, α2, β1, β2, μ, σ, γ)`.
    pub free: Vec<usize>,
}

pub const TOGGLE_NAMES: [&str; 7] = ["alpha1", "alpha2", "beta1", "beta2", "mu", "sigma", "gamma"];

impl ToggleSimulator {
    /// All seven coordinates free.
    pub fn full(steps: usize) -> Self {
        Self { base: ToggleParams { steps, ..ToggleParams::reference() }, free: (0..7).collect() }
    }

    /// Free coordinates chosen by name (`alpha1`, `mu`, ...).
    pub fn with_free(base: ToggleParams, names: &[&str]) -> Result<Self> {
        let free = names
            .iter()
            .map(|name| {
                TOGGLE_NAMES
                    .iter()
                    .position(|t| t == name)
                    .ok_or_else(|| Error::InvalidParams(format!("unknown toggle parameter {name:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { base, free })
    }

    pub fn params(&self, theta: &[f64]) -> Result<ToggleParams> {
        if theta.len() != self.free.len() {
            return Err(Error::DimensionMismatch { expected: self.free.len(), found: theta.len() });
        }
        let mut full = self.base.theta();
        for (&k, &v) in self.free.iter().zip(theta) {
            full[k] = v;
        }
        let mut p = ToggleParams::from_theta(&full)?;
        p.steps = self.base.steps;
        Ok(p)
    }
}

impl Simulator for ToggleSimulator {
    fn simulate(&self, theta: &[f64], m: usize, seed: u64) -> Result<Sample> {
        toggle_switch(&self.params(theta)?, m, seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl ParamGrid {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map(Vec::len).ok_or(Error::InvalidParams("empty parameter grid".into()))?;
        if dim == 0 {
            return Err(Error::InvalidParams("grid points need at least one coordinate".into()));
        }
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: p.len() });
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim, points })
    }

    /// Cartesian product of per-coordinate values; the last coordinate varies fastest.
    pub fn product(axes: &[Vec<f64>]) -> Result<Self> {
        let mut points = vec![Vec::new()];
        for axis in axes {
            points = points
                .into_iter()
                .flat_map(|p| axis.iter().map(move |&v| [p.clone(), vec![v]].concat()))
                .collect();
        }
        Self::new(points)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k]
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LfiConfig {
    /// Synthetic sample size per grid point.
    pub m: usize,
    /// Acceptance threshold on the lower confidence bound.
    pub eps: f64,
    pub to: TrimOrder,
    pub alpha: f64,
    pub band: BandFamily,
    /// Directions; one-dimensional data always uses a single direction.
    pub num_dirs: usize,
    pub seed: u64,
}

impl LfiConfig {
    pub fn new(m: usize, to: TrimOrder, alpha: f64) -> Self {
        Self { m, eps: 0.0, to, alpha, band: BandFamily::Dkw, num_dirs: 500, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaInterval {
    pub index: usize,
    pub theta: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LfiResult {
    /// Grid indices with `lower <= eps`, increasing.
    pub accepted: Vec<usize>,
    pub per_theta: Vec<ThetaInterval>,
    pub epsilon: f64,
    pub point_estimate: Option<usize>,
}

impl LfiResult {
    pub fn accepts(&self, index: usize) -> bool {
        self.accepted.binary_search(&index).is_ok()
    }
}

fn directions_for(d: usize, count: usize, seed: u64) -> Result<DirectionSet> {
    if d == 1 {
        DirectionSet::from_directions(&[vec![1.0]], 0)
    } else {
        sample_directions(d, count, rng::derive_seed(seed, &[rng::label("directions")]))
    }
}

fn simulate_checked<S: Simulator + ?Sized>(sim: &S, theta: &[f64], m: usize, d: usize, seed: u64) -> Result<Sample> {
    let y = sim.simulate(theta, m, seed).map_err(|e| match e {
        Error::SimulatorFailure(_) => e,
        other => Error::SimulatorFailure(format!("simulator failed at θ = {theta:?}: {other}")),
    })?;
    if y.d() != d {
        return Err(Error::SimulatorFailure(format!("simulator returned dimension {}, expected {d}", y.d())));
    }
    if y.n() != m {
        return Err(Error::SimulatorFailure(format!("simulator returned {} points, expected {m}", y.n())));
    }
    Ok(y)
}

/// Confidence set `{θ : ℓ(θ) <= ε}` over the grid. Grid point `k` is simulated
/// from seed `derive_seed(cfg.seed, [k])`, so results do not depend on the
/// number of threads or the order in which points are evaluated.
pub fn lfi_confidence_set<S: Simulator + ?Sized>(
    observed: &Sample,
    sim: &S,
    grid: &ParamGrid,
    cfg: &LfiConfig,
) -> Result<LfiResult> {
    if !(cfg.eps >= 0.0) {
        return Err(Error::InvalidParams(format!("eps must be nonnegative, got {}", cfg.eps)));
    }
    if cfg.m == 0 {
        return Err(Error::InvalidParams("synthetic sample size must be positive".into()));
    }
    let dirs = directions_for(observed.d(), cfg.num_dirs, cfg.seed)?;
    require_a1(cfg.to.delta(), cfg.alpha / dirs.len() as f64, observed.n(), cfg.m, cfg.band)?;
    let px = ProjectedSample::new(observed, &dirs, false)?;
    let ci = CiConfig::new(cfg.alpha, cfg.band);
    let per_theta: Vec<ThetaInterval> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let theta = grid.point(k);
            let y = simulate_checked(sim, theta, cfg.m, observed.d(), rng::derive_seed(cfg.seed, &[k as u64]))?;
            let py = ProjectedSample::new(&y, &dirs, false)?;
            let iv = ci_sliced_projected(&px, &py, cfg.to, &ci, &dirs)?;
            Ok(ThetaInterval {
                index: k,
                theta: theta.to_vec(),
                lower: iv.lower,
                upper: iv.upper,
                accepted: iv.lower <= cfg.eps,
            })
        })
        .collect::<Result<_>>()?;
    let accepted = per_theta.iter().filter(|t| t.accepted).map(|t| t.index).collect();
    Ok(LfiResult { accepted, per_theta, epsilon: cfg.eps, point_estimate: None })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionEstimate {
    pub index: usize,
    pub theta: Vec<f64>,
    /// Plug-in distance for every grid point.
    pub distances: Vec<f64>,
}

/// Grid point minimising the plug-in `SW_{r,δ}` between the observed data and
/// an `m_sim`-point simulation; ties go to the first index.
pub fn sw_projection_estimate<S: Simulator + ?Sized>(
    observed: &Sample,
    sim: &S,
    grid: &ParamGrid,
    m_sim: usize,
    to: TrimOrder,
    num_dirs: usize,
    seed: u64,
) -> Result<ProjectionEstimate> {
    if m_sim == 0 {
        return Err(Error::InvalidParams("simulation size must be positive".into()));
    }
    let dirs = directions_for(observed.d(), num_dirs, seed)?;
    let px = ProjectedSample::new(observed, &dirs, false)?;
    let distances: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let y = simulate_checked(sim, grid.point(k), m_sim, observed.d(), rng::derive_seed(seed, &[k as u64]))?;
            check_pair(observed, &y, &dirs)?;
            let py = ProjectedSample::new(&y, &dirs, false)?;
            Ok(sliced_pow(&px, &py, to).powf(1.0 / to.r()))
        })
        .collect::<Result<_>>()?;
    let mut index = 0;
    for (k, &d) in distances.iter().enumerate() {
        if d < distances[index] {
            index = k;
        }
    }
    Ok(ProjectionEstimate { index, theta: grid.point(index).to_vec(), distances })
}
