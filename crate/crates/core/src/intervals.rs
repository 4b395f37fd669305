//! Finite-sample confidence intervals for the trimmed Wasserstein distance
//! of two one-dimensional samples and for the Monte-Carlo sliced distance.
//!
//! Both endpoints integrate envelopes built from band-shifted empirical
//! quantiles:
//!
//! ```text
//! A(u) = [F⁻¹(γ_n(u)) - G⁻¹(η_m(u))] ∨ [G⁻¹(γ_m(u)) - F⁻¹(η_n(u))] ∨ 0
//! B(u) = [F⁻¹(η_n(u)) - G⁻¹(γ_m(u))] ∨ [G⁻¹(η_m(u)) - F⁻¹(γ_n(u))]
//! ```
//!
//! Every term is a step function of `u` that jumps only where a band crosses
//! a multiple of `1/n` or `1/m`, so the integrals are exact finite sums.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bands::{check_alpha, require_a1, Band, BandFamily, BandSpec};
use crate::error::{Error, Result};
use crate::numeric::{pow_r, NeumaierSum};
use crate::transport::{
    check_pair, quantile_index, DirectionSet, ProjectedSample, Sample, SortedProjection, TrimOrder,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[serde(rename = "finite")]
    FiniteSample,
    Bootstrap,
    Hybrid,
}

/// Which sub-interval a hybrid interval returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Finite,
    Bootstrap,
}

/// Everything that produced an interval, echoed for reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalParams {
    pub r: f64,
    pub delta: f64,
    pub alpha: f64,
    pub band: Option<BandFamily>,
    /// Level used for each direction's band (`α / N`).
    pub per_direction_alpha: Option<f64>,
    pub num_dirs: usize,
    pub direction_seed: Option<u64>,
    pub boot_reps: Option<usize>,
    pub boot_seed: Option<u64>,
    pub a1_override: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub method: Method,
    pub level: f64,
    pub branch: Option<Branch>,
    pub params: IntervalParams,
}

impl Interval {
    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

/// Settings shared by the finite-sample intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiConfig {
    pub alpha: f64,
    pub band: BandFamily,
    /// Compute the interval even when condition A1 fails. Band arguments are
    /// then clamped to the sample extremes and the distribution-free
    /// guarantee is lost for unbounded supports.
    pub override_a1: bool,
}

impl CiConfig {
    pub fn new(alpha: f64, band: BandFamily) -> Self {
        Self { alpha, band, override_a1: false }
    }
}

/// Piecewise-constant envelopes `A <= B` on `[δ, 1-δ]`. Segment `k` spans
/// `(breaks[k], breaks[k+1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub breaks: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl Envelope {
    /// `(1/(1-2δ)) ∫ A^r` and `(1/(1-2δ)) ∫ B^r`.
    pub fn power_integrals(&self, r: f64) -> (f64, f64) {
        let window = self.breaks.last().unwrap_or(&0.0) - self.breaks.first().unwrap_or(&0.0);
        let mut lo = NeumaierSum::default();
        let mut hi = NeumaierSum::default();
        for (k, w) in self.breaks.windows(2).enumerate() {
            let len = w[1] - w[0];
            lo.add(pow_r(self.a[k], r) * len);
            hi.add(pow_r(self.b[k], r) * len);
        }
        if window > 0.0 {
            (lo.value() / window, hi.value() / window)
        } else {
            (0.0, 0.0)
        }
    }
}

/// Merged breakpoint grid shared by every direction: segment lengths and
/// the four order-statistic indices `[γ_n, η_n, γ_m, η_m]` active on each.
#[derive(Debug, Clone)]
pub(crate) struct BandGrid {
    breaks: Vec<f64>,
    lens: Vec<f64>,
    idx: Vec<[u32; 4]>,
    window: f64,
}

impl BandGrid {
    pub(crate) fn new(n: usize, m: usize, band_n: Band, band_m: Band, delta: f64) -> Self {
        let (lo, hi) = (delta, 1.0 - delta);
        let mut pts = vec![lo, hi];
        for (size, band) in [(n, band_n), (m, band_m)] {
            for k in 1..size {
                let t = k as f64 / size as f64;
                for u in [band.gamma_inverse(t), band.eta_inverse(t)].into_iter().flatten() {
                    if u > lo && u < hi {
                        pts.push(u);
                    }
                }
            }
        }
        pts.sort_unstable_by(f64::total_cmp);
        pts.dedup();

        let mut breaks = vec![lo];
        let mut lens = Vec::new();
        let mut idx: Vec<[u32; 4]> = Vec::new();
        for w in pts.windows(2) {
            let len = w[1] - w[0];
            if len <= 0.0 {
                continue;
            }
            let mid = 0.5 * (w[0] + w[1]);
            let cur = [
                quantile_index(n, band_n.gamma(mid)) as u32,
                quantile_index(n, band_n.eta(mid)) as u32,
                quantile_index(m, band_m.gamma(mid)) as u32,
                quantile_index(m, band_m.eta(mid)) as u32,
            ];
            if idx.last() == Some(&cur) {
                *lens.last_mut().unwrap() += len;
                *breaks.last_mut().unwrap() = w[1];
            } else {
                idx.push(cur);
                lens.push(len);
                breaks.push(w[1]);
            }
        }
        Self { breaks, lens, idx, window: hi - lo }
    }

    #[inline]
    fn envelope_at(x: &[f64], y: &[f64], k: [u32; 4]) -> (f64, f64) {
        let [gn, en, gm, em] = k.map(|i| i as usize);
        let a = (x[gn] - y[em]).max(y[gm] - x[en]).max(0.0);
        let b = (x[en] - y[gm]).max(y[em] - x[gn]);
        (a, b)
    }

    /// Normalised `∫A^r` and `∫B^r` for sorted samples `x` (size n) and `y` (size m).
    pub(crate) fn power_integrals(&self, x: &[f64], y: &[f64], r: f64) -> (f64, f64) {
        let mut lo = NeumaierSum::default();
        let mut hi = NeumaierSum::default();
        for (&k, &len) in self.idx.iter().zip(&self.lens) {
            let (a, b) = Self::envelope_at(x, y, k);
            lo.add(pow_r(a, r) * len);
            hi.add(pow_r(b, r) * len);
        }
        (lo.value() / self.window, hi.value() / self.window)
    }

    fn envelope(&self, x: &[f64], y: &[f64]) -> Envelope {
        let (a, b) = self.idx.iter().map(|&k| Self::envelope_at(x, y, k)).unzip();
        Envelope { breaks: self.breaks.clone(), a, b }
    }
}

fn bands_for(cfg: &CiConfig, alpha: f64, n: usize, m: usize, delta: f64) -> Result<(Band, Band)> {
    check_alpha(cfg.alpha)?;
    if !cfg.override_a1 {
        require_a1(delta, alpha, n, m, cfg.band)?;
    }
    let band_n = BandSpec::new(cfg.band, alpha, n)?.resolve()?;
    let band_m = BandSpec::new(cfg.band, alpha, m)?.resolve()?;
    Ok((band_n, band_m))
}

fn params(to: TrimOrder, cfg: &CiConfig) -> IntervalParams {
    IntervalParams {
        r: to.r(),
        delta: to.delta(),
        alpha: cfg.alpha,
        band: Some(cfg.band),
        per_direction_alpha: None,
        num_dirs: 1,
        direction_seed: None,
        boot_reps: None,
        boot_seed: None,
        a1_override: cfg.override_a1,
    }
}

/// Envelopes `A`, `B` for two one-dimensional samples at level `1 - α`.
pub fn envelope_1d(x: &SortedProjection, y: &SortedProjection, to: TrimOrder, cfg: &CiConfig) -> Result<Envelope> {
    let (n, m) = (x.len(), y.len());
    let (band_n, band_m) = bands_for(cfg, cfg.alpha, n, m, to.delta())?;
    Ok(BandGrid::new(n, m, band_n, band_m, to.delta()).envelope(x.values(), y.values()))
}

/// Finite-sample `(1 - α)` interval for `W_{r,δ}` between two one-dimensional samples.
pub fn ci_1d(x: &SortedProjection, y: &SortedProjection, to: TrimOrder, cfg: &CiConfig) -> Result<Interval> {
    let (n, m) = (x.len(), y.len());
    if n == 0 || m == 0 {
        return Err(Error::EmptySample);
    }
    let (band_n, band_m) = bands_for(cfg, cfg.alpha, n, m, to.delta())?;
    let grid = BandGrid::new(n, m, band_n, band_m, to.delta());
    let (lo, hi) = grid.power_integrals(x.values(), y.values(), to.r());
    Ok(Interval {
        lower: lo.powf(1.0 / to.r()),
        upper: hi.powf(1.0 / to.r()),
        method: Method::FiniteSample,
        level: 1.0 - cfg.alpha,
        branch: None,
        params: params(to, cfg),
    })
}

/// Finite-sample interval for the Monte-Carlo sliced distance: a
/// one-dimensional interval per direction at level `1 - α/N`, combined as
/// `((1/N) Σ L_j^r)^{1/r}` and `((1/N) Σ U_j^r)^{1/r}`.
pub fn ci_sliced(x: &Sample, y: &Sample, to: TrimOrder, cfg: &CiConfig, dirs: &DirectionSet) -> Result<Interval> {
    check_pair(x, y, dirs)?;
    let px = ProjectedSample::new(x, dirs, false)?;
    let py = ProjectedSample::new(y, dirs, false)?;
    ci_sliced_projected(&px, &py, to, cfg, dirs)
}

pub(crate) fn ci_sliced_projected(
    px: &ProjectedSample,
    py: &ProjectedSample,
    to: TrimOrder,
    cfg: &CiConfig,
    dirs: &DirectionSet,
) -> Result<Interval> {
    check_alpha(cfg.alpha)?;
    let count = dirs.len();
    let alpha_dir = cfg.alpha / count as f64;
    let (band_n, band_m) = bands_for(cfg, alpha_dir, px.n(), py.n(), to.delta())?;
    let grid = BandGrid::new(px.n(), py.n(), band_n, band_m, to.delta());
    let per_dir: Vec<(f64, f64)> = (0..count)
        .into_par_iter()
        .map(|j| grid.power_integrals(px.row(j), py.row(j), to.r()))
        .collect();
    let mut lo = NeumaierSum::default();
    let mut hi = NeumaierSum::default();
    for (l, u) in per_dir {
        lo.add(l);
        hi.add(u);
    }
    let mut p = params(to, cfg);
    p.per_direction_alpha = Some(alpha_dir);
    p.num_dirs = count;
    p.direction_seed = Some(dirs.seed());
    Ok(Interval {
        lower: (lo.value() / count as f64).powf(1.0 / to.r()),
        upper: (hi.value() / count as f64).powf(1.0 / to.r()),
        method: Method::FiniteSample,
        level: 1.0 - cfg.alpha,
        branch: None,
        params: p,
    })
}
