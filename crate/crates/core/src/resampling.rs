//! Bootstrap interval for the sliced distance and the hybrid pretest
//! interval that falls back to the finite-sample interval near the null or
//! in the presence of atoms.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bands::check_alpha;
use crate::error::{Error, Result};
use crate::intervals::{ci_sliced_projected, Branch, CiConfig, Interval, IntervalParams, Method};
use crate::numeric::{pow_r, NeumaierSum};
use crate::rng;
use crate::transport::{check_pair, gap_power_integral, sliced_pow, uniform_steps, DirectionSet, ProjectedSample, Sample, TrimOrder};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub reps: usize,
    pub seed: u64,
    pub alpha: f64,
}

impl BootstrapConfig {
    pub fn new(reps: usize, seed: u64, alpha: f64) -> Self {
        Self { reps, seed, alpha }
    }
}

/// Smallest Euclidean distance between two sample points (0 iff the sample
/// has an exact duplicate).
pub fn min_spacing(s: &Sample) -> Result<f64> {
    let n = s.n();
    if n < 2 {
        return Err(Error::TooFewPoints { required: 2, found: n });
    }
    // Sweep in order of the first coordinate; a pair can only beat the
    // current best if their first coordinates are closer than it.
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_unstable_by(|&a, &b| s.point(a)[0].total_cmp(&s.point(b)[0]));
    let mut best = f64::INFINITY;
    for (k, &i) in idx.iter().enumerate() {
        let p = s.point(i);
        for &j in &idx[k + 1..] {
            let q = s.point(j);
            if q[0] - p[0] >= best {
                break;
            }
            let d2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
            best = best.min(d2.sqrt());
            if best == 0.0 {
                return Ok(0.0);
            }
        }
    }
    Ok(best)
}

/// Both samples projected onto a shared direction set, with the sorting
/// permutations kept so that bootstrap replicates can be evaluated by
/// re-weighting instead of re-sorting.
#[derive(Debug, Clone)]
pub struct ProjectedPair {
    px: ProjectedSample,
    py: ProjectedSample,
    dirs: DirectionSet,
    spacing: (f64, f64),
}

impl ProjectedPair {
    pub fn new(x: &Sample, y: &Sample, dirs: &DirectionSet) -> Result<Self> {
        check_pair(x, y, dirs)?;
        let spacing = (
            if x.n() >= 2 { min_spacing(x)? } else { 0.0 },
            if y.n() >= 2 { min_spacing(y)? } else { 0.0 },
        );
        Ok(Self {
            px: ProjectedSample::new(x, dirs, true)?,
            py: ProjectedSample::new(y, dirs, true)?,
            dirs: dirs.clone(),
            spacing,
        })
    }

    /// Minimal spacings of the two samples.
    pub fn spacings(&self) -> (f64, f64) {
        self.spacing
    }

    /// Plug-in `SW_{r,δ}` on the shared directions.
    pub fn estimate(&self, to: TrimOrder) -> f64 {
        sliced_pow(&self.px, &self.py, to).powf(1.0 / to.r())
    }

    pub fn finite(&self, to: TrimOrder, cfg: &CiConfig) -> Result<Interval> {
        ci_sliced_projected(&self.px, &self.py, to, cfg, &self.dirs)
    }

    pub fn bootstrap(&self, to: TrimOrder, cfg: &BootstrapConfig) -> Result<Interval> {
        check_alpha(cfg.alpha)?;
        let (n, m) = (self.px.n(), self.py.n());
        if n < 2 || m < 2 {
            return Err(Error::TooFewPoints { required: 2, found: n.min(m) });
        }
        if cfg.reps == 0 {
            return Err(Error::InvalidParams("bootstrap needs at least one replicate".into()));
        }
        let t = sliced_pow(&self.px, &self.py, to);
        let root = ((n * m) as f64 / (n + m) as f64).sqrt();
        let mut stats: Vec<f64> = (0..cfg.reps)
            .into_par_iter()
            .map(|b| root * (self.replicate(to, cfg.seed, b as u64) - t))
            .collect();
        stats.sort_unstable_by(f64::total_cmp);
        let q = |p: f64| stats[((stats.len() as f64 * p).ceil() as usize).clamp(1, stats.len()) - 1];
        let (q_lo, q_hi) = (q(cfg.alpha / 2.0), q(1.0 - cfg.alpha / 2.0));
        let inv = 1.0 / to.r();
        Ok(Interval {
            lower: (t - q_hi / root).max(0.0).powf(inv),
            upper: (t + q_lo.abs() / root).powf(inv),
            method: Method::Bootstrap,
            level: 1.0 - cfg.alpha,
            branch: None,
            params: IntervalParams {
                r: to.r(),
                delta: to.delta(),
                alpha: cfg.alpha,
                band: None,
                per_direction_alpha: None,
                num_dirs: self.dirs.len(),
                direction_seed: Some(self.dirs.seed()),
                boot_reps: Some(cfg.reps),
                boot_seed: Some(cfg.seed),
                a1_override: false,
            },
        })
    }

    /// `SW_{r,δ}^r` between one pair of resampled empirical measures.
    fn replicate(&self, to: TrimOrder, seed: u64, b: u64) -> f64 {
        let mut rng = rng::stream(seed, b);
        let cx = resample_counts(&mut rng, self.px.n());
        let cy = resample_counts(&mut rng, self.py.n());
        let (mut mark, mut qx, mut qy) = (Vec::new(), Vec::new(), Vec::new());
        let mut acc = NeumaierSum::default();
        for j in 0..self.dirs.len() {
            resampled_order_stats(self.px.row(j), self.px.order(j).unwrap(), &cx, &mut mark, &mut qx);
            resampled_order_stats(self.py.row(j), self.py.order(j).unwrap(), &cy, &mut mark, &mut qy);
            acc.add(if qx.len() == qy.len() {
                equal_grid_power_integral(&qx, &qy, to.r(), to.delta())
            } else {
                gap_power_integral(uniform_steps(&qx), uniform_steps(&qy), to.r(), to.delta())
            });
        }
        acc.value() / (to.window() * self.dirs.len() as f64)
    }

    /// Hybrid interval: the finite-sample interval when it contains zero or
    /// either sample has a duplicate point (spacing `<= spacing_tol`), the
    /// bootstrap interval otherwise. The bootstrap level is taken from `cfg`.
    pub fn hybrid(&self, to: TrimOrder, cfg: &CiConfig, boot: &BootstrapConfig, spacing_tol: f64) -> Result<Interval> {
        let finite = self.finite(to, cfg)?;
        match self.hybrid_branch(&finite, spacing_tol) {
            Branch::Finite => Ok(as_hybrid(&finite, Branch::Finite, boot)),
            Branch::Bootstrap => {
                let b = self.bootstrap(to, &BootstrapConfig { alpha: cfg.alpha, ..*boot })?;
                Ok(as_hybrid(&b, Branch::Bootstrap, boot))
            }
        }
    }

    /// The branch the hybrid rule takes given the finite-sample interval.
    pub fn hybrid_branch(&self, finite: &Interval, spacing_tol: f64) -> Branch {
        if finite.lower == 0.0 || self.spacing.0 <= spacing_tol || self.spacing.1 <= spacing_tol {
            Branch::Finite
        } else {
            Branch::Bootstrap
        }
    }
}

/// Relabels a sub-interval as a hybrid result; the endpoints are untouched.
pub fn as_hybrid(chosen: &Interval, branch: Branch, boot: &BootstrapConfig) -> Interval {
    let mut out = chosen.clone();
    out.method = Method::Hybrid;
    out.branch = Some(branch);
    out.params.boot_reps = Some(boot.reps);
    out.params.boot_seed = Some(boot.seed);
    out
}

/// The step-walk integral specialised to two quantile functions on the same
/// grid `k/n`, where every cell is shared and only the two edge cells are cut.
fn equal_grid_power_integral(x: &[f64], y: &[f64], r: f64, delta: f64) -> f64 {
    match r {
        1.0 => equal_grid_sum(x, y, delta, |g| g),
        2.0 => equal_grid_sum(x, y, delta, |g| g * g),
        _ => equal_grid_sum(x, y, delta, |g| pow_r(g, r)),
    }
}

#[inline(always)]
fn equal_grid_sum(x: &[f64], y: &[f64], delta: f64, power: impl Fn(f64) -> f64) -> f64 {
    let len = x.len();
    let n = len as f64;
    let hi = 1.0 - delta;
    let first = ((delta * n).floor() as usize).min(len - 1);
    let last = ((hi * n).ceil() as usize).clamp(1, len) - 1;
    let mut sum = 0.0;
    for k in first..=last {
        let width = (((k + 1) as f64 / n).min(hi) - (k as f64 / n).max(delta)).max(0.0);
        sum += power((x[k] - y[k]).abs()) * width;
    }
    sum
}

fn resample_counts(rng: &mut rng::StreamRng, n: usize) -> Vec<u32> {
    let mut counts = vec![0u32; n];
    for _ in 0..n {
        counts[rng.random_range(0..n)] += 1;
    }
    counts
}

/// Order statistics of a resampled measure, given the sorted sample, its
/// sorting permutation and the multiplicity of each original point.
///
/// Sorted position `k` starts at `s_k = Σ_{l<k} c_l` in the resample, so the
/// `t`-th order statistic is `sorted[max{k : s_k <= t}]`; that maximising `k`
/// always has a positive count. Writing `k` at `s_k` and taking a running
/// maximum avoids data-dependent branches, which dominate the cost of a
/// direct merge.
fn resampled_order_stats(sorted: &[f64], order: &[u32], counts: &[u32], mark: &mut Vec<u32>, out: &mut Vec<f64>) {
    let n = counts.len();
    mark.clear();
    mark.resize(n + 1, 0);
    let mut start = 0usize;
    for (k, &i) in order.iter().enumerate() {
        mark[start] = k as u32;
        start += counts[i as usize] as usize;
    }
    out.clear();
    let mut best = 0u32;
    for &m in &mark[..n] {
        best = best.max(m);
        out.push(sorted[best as usize]);
    }
}

/// Bootstrap interval for `SW_{r,δ}` at level `1 - α`, using the basic
/// bootstrap on `sqrt(nm/(n+m)) (SW^r(P*_n, Q*_m) - SW^r(P_n, Q_m))`.
/// The same directions serve the original statistic and every replicate.
pub fn bootstrap_ci(x: &Sample, y: &Sample, to: TrimOrder, cfg: &BootstrapConfig, dirs: &DirectionSet) -> Result<Interval> {
    ProjectedPair::new(x, y, dirs)?.bootstrap(to, cfg)
}

/// Hybrid pretest interval; see [`ProjectedPair::hybrid`].
pub fn hybrid_ci(
    x: &Sample,
    y: &Sample,
    to: TrimOrder,
    cfg: &CiConfig,
    boot: &BootstrapConfig,
    dirs: &DirectionSet,
    spacing_tol: f64,
) -> Result<Interval> {
    if x.n() < 2 || y.n() < 2 {
        return Err(Error::TooFewPoints { required: 2, found: x.n().min(y.n()) });
    }
    ProjectedPair::new(x, y, dirs)?.hybrid(to, cfg, boot, spacing_tol)
}
