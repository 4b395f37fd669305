//! Empirical quantile functions, trimmed one-dimensional Wasserstein
//! distances, projections onto directions and the Monte-Carlo sliced
//! Wasserstein distance.
//!
//! All one-dimensional integrals are evaluated exactly: the empirical
//! quantile functions are step functions, so the trimmed integral of the
//! quantile gap is a finite sum over the merged breakpoint grid
//! `{i/n} ∪ {j/m}` restricted to `[δ, 1-δ]`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{pow_r, NeumaierSum};
use crate::rng;

/// A finite multiset of points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    data: Vec<f64>,
    d: usize,
}

impl Sample {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptySample)?;
        let d = first.len();
        if d == 0 {
            return Err(Error::InvalidParams("points must have at least one coordinate".into()));
        }
        let mut data = Vec::with_capacity(rows.len() * d);
        for row in rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(data, d)
    }

    /// Builds a sample from row-major coordinates.
    pub fn from_flat(data: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParams("dimension must be positive".into()));
        }
        if data.is_empty() {
            return Err(Error::EmptySample);
        }
        if data.len() % d != 0 {
            return Err(Error::DimensionMismatch { expected: d, found: data.len() % d });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { data, d })
    }

    /// One-dimensional sample.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::from_flat(values, 1)
    }

    pub fn n(&self) -> usize {
        self.data.len() / self.d
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.d)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Applies `x -> a x + b` coordinatewise to every point.
    pub fn map_affine(&self, scale: f64, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, found: shift.len() });
        }
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(k, v)| scale * v + shift[k % self.d])
            .collect();
        Self::from_flat(data, self.d)
    }
}

/// Sorted one-dimensional values: the support of an empirical quantile function.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedProjection {
    values: Vec<f64>,
}

impl SortedProjection {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Wasserstein order `r >= 1` together with the trimming constant `δ ∈ [0, 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrimOrder {
    r: f64,
    delta: f64,
}

impl TrimOrder {
    pub fn new(r: f64, delta: f64) -> Result<Self> {
        if !(r >= 1.0) || !r.is_finite() {
            return Err(Error::InvalidOrder(r));
        }
        check_delta(delta)?;
        Ok(Self { r, delta })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Length of the trimmed window, `1 - 2δ`.
    pub fn window(&self) -> f64 {
        1.0 - 2.0 * self.delta
    }
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if (0.0..0.5).contains(&delta) {
        Ok(())
    } else {
        Err(Error::InvalidTrim(delta))
    }
}

/// `N` unit directions in `R^d` drawn uniformly on the sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    data: Vec<f64>,
    d: usize,
    seed: u64,
}

impl DirectionSet {
    /// Wraps explicit directions; each is normalised to unit length.
    pub fn from_directions(dirs: &[Vec<f64>], seed: u64) -> Result<Self> {
        let d = dirs.first().ok_or(Error::EmptySample)?.len();
        let mut data = Vec::with_capacity(dirs.len() * d);
        for dir in dirs {
            if dir.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: dir.len() });
            }
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(Error::InvalidParams("direction must be a nonzero finite vector".into()));
            }
            data.extend(dir.iter().map(|v| v / norm));
        }
        Ok(Self { data, d, seed })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn direction(&self, j: usize) -> &[f64] {
        &self.data[j * self.d..(j + 1) * self.d]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.d)
    }
}

/// Draws `count` i.i.d. directions uniform on `S^{d-1}` by normalising
/// standard Gaussian vectors. Identical `(d, count, seed)` give identical sets.
pub fn sample_directions(d: usize, count: usize, seed: u64) -> Result<DirectionSet> {
    if d == 0 || count == 0 {
        return Err(Error::InvalidParams("need d >= 1 and at least one direction".into()));
    }
    let mut rng = rng::stream(seed, 0);
    let mut data = Vec::with_capacity(d * count);
    let mut v = vec![0.0; d];
    for _ in 0..count {
        loop {
            for c in v.iter_mut() {
                *c = rng.sample(StandardNormal);
            }
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm > 0.0 {
                data.extend(v.iter().map(|c| c / norm));
                break;
            }
        }
    }
    Ok(DirectionSet { data, d, seed })
}

/// Left-continuous empirical quantile `inf{x : F_n(x) >= u}`, i.e. the
/// `⌈n u⌉`-th order statistic. Arguments outside `(0, 1]` are clamped to the
/// sample extremes.
pub fn empirical_quantile(proj: &SortedProjection, u: f64) -> Result<f64> {
    let v = proj.values();
    if v.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(v[quantile_index(v.len(), u)])
}

/// Index of the `⌈n u⌉`-th order statistic, clamped to `[0, n-1]`.
#[inline]
pub(crate) fn quantile_index(n: usize, u: f64) -> usize {
    if !(u > 0.0) {
        return 0;
    }
    if u >= 1.0 {
        return n - 1;
    }
    let k = (n as f64 * u).ceil() as usize;
    k.clamp(1, n) - 1
}

/// Segments `(value, right end)` of an empirical quantile function with
/// equal weights: value `v[k]` on `(k/n, (k+1)/n]`.
#[inline]
pub(crate) fn uniform_steps(v: &[f64]) -> impl Iterator<Item = (f64, f64)> + '_ {
    let n = v.len() as f64;
    v.iter().enumerate().map(move |(k, &x)| (x, (k + 1) as f64 / n))
}

fn first_segment_after<I: Iterator<Item = (f64, f64)>>(it: &mut I, delta: f64) -> (f64, f64) {
    let mut last = (f64::NAN, f64::INFINITY);
    for (v, e) in it.by_ref() {
        last = (v, e);
        if e > delta {
            return last;
        }
    }
    (last.0, f64::INFINITY)
}

/// `∫_δ^{1-δ} |F^{-1}(u) - G^{-1}(u)|^r du` for two step quantile functions
/// given as ordered `(value, right end)` segments. The last segment of each
/// function is extended to `u = 1`.
pub(crate) fn gap_power_integral<X, Y>(mut x: X, mut y: Y, r: f64, delta: f64) -> f64
where
    X: Iterator<Item = (f64, f64)>,
    Y: Iterator<Item = (f64, f64)>,
{
    let hi = 1.0 - delta;
    let (mut xv, mut xe) = first_segment_after(&mut x, delta);
    let (mut yv, mut ye) = first_segment_after(&mut y, delta);
    let mut u = delta;
    let mut acc = NeumaierSum::default();
    loop {
        let end = xe.min(ye).min(hi);
        if end > u {
            acc.add(pow_r((xv - yv).abs(), r) * (end - u));
            u = end;
        }
        if end >= hi {
            break;
        }
        if xe <= end {
            (xv, xe) = x.next().unwrap_or((xv, f64::INFINITY));
        }
        if ye <= end {
            (yv, ye) = y.next().unwrap_or((yv, f64::INFINITY));
        }
    }
    acc.value()
}

/// `sup_{u ∈ (δ, 1-δ]} |F^{-1}(u) - G^{-1}(u)|` over segments of positive length.
pub(crate) fn gap_sup<X, Y>(mut x: X, mut y: Y, delta: f64) -> f64
where
    X: Iterator<Item = (f64, f64)>,
    Y: Iterator<Item = (f64, f64)>,
{
    let hi = 1.0 - delta;
    let (mut xv, mut xe) = first_segment_after(&mut x, delta);
    let (mut yv, mut ye) = first_segment_after(&mut y, delta);
    let mut u = delta;
    let mut best: f64 = 0.0;
    loop {
        let end = xe.min(ye).min(hi);
        if end > u {
            best = best.max((xv - yv).abs());
            u = end;
        }
        if end >= hi {
            break;
        }
        if xe <= end {
            (xv, xe) = x.next().unwrap_or((xv, f64::INFINITY));
        }
        if ye <= end {
            (yv, ye) = y.next().unwrap_or((yv, f64::INFINITY));
        }
    }
    best
}

/// `W_{r,δ}^r` between two sorted samples (the normalised trimmed integral).
pub(crate) fn wasserstein_pow_sorted(x: &[f64], y: &[f64], to: TrimOrder) -> f64 {
    gap_power_integral(uniform_steps(x), uniform_steps(y), to.r, to.delta) / to.window()
}

/// Trimmed one-dimensional Wasserstein distance
/// `((1/(1-2δ)) ∫_δ^{1-δ} |F_n^{-1} - G_m^{-1}|^r du)^{1/r}`, evaluated exactly.
pub fn wasserstein_1d(x: &SortedProjection, y: &SortedProjection, to: TrimOrder) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(wasserstein_pow_sorted(x.values(), y.values(), to).powf(1.0 / to.r))
}

/// Trimmed `∞`-Wasserstein distance: the largest quantile gap on `[δ, 1-δ]`.
pub fn wasserstein_inf_1d(x: &SortedProjection, y: &SortedProjection, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySample);
    }
    let at_delta = (empirical_quantile(x, delta)? - empirical_quantile(y, delta)?).abs();
    let interior = gap_sup(uniform_steps(x.values()), uniform_steps(y.values()), delta);
    Ok(at_delta.max(interior))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sorted projections `x^T θ` of every point.
pub fn project(s: &Sample, theta: &[f64]) -> Result<SortedProjection> {
    if theta.len() != s.d() {
        return Err(Error::DimensionMismatch { expected: s.d(), found: theta.len() });
    }
    let mut values: Vec<f64> = s.points().map(|p| dot(p, theta)).collect();
    values.sort_unstable_by(f64::total_cmp);
    Ok(SortedProjection { values })
}

/// A sample projected onto every direction of a [`DirectionSet`], each row
/// sorted. Optionally keeps the sorting permutation, which the bootstrap
/// needs to re-weight original points without re-sorting.
#[derive(Debug, Clone)]
pub struct ProjectedSample {
    values: Vec<f64>,
    order: Option<Vec<u32>>,
    n: usize,
    dirs: usize,
}

impl ProjectedSample {
    pub fn new(s: &Sample, dirs: &DirectionSet, keep_order: bool) -> Result<Self> {
        if dirs.d() != s.d() {
            return Err(Error::DimensionMismatch { expected: s.d(), found: dirs.d() });
        }
        let n = s.n();
        let rows: Vec<(Vec<f64>, Option<Vec<u32>>)> = (0..dirs.len())
            .into_par_iter()
            .map(|j| {
                let theta = dirs.direction(j);
                let raw: Vec<f64> = s.points().map(|p| dot(p, theta)).collect();
                if keep_order {
                    let mut idx: Vec<u32> = (0..n as u32).collect();
                    idx.sort_unstable_by(|&a, &b| raw[a as usize].total_cmp(&raw[b as usize]));
                    let sorted = idx.iter().map(|&i| raw[i as usize]).collect();
                    (sorted, Some(idx))
                } else {
                    let mut sorted = raw;
                    sorted.sort_unstable_by(f64::total_cmp);
                    (sorted, None)
                }
            })
            .collect();
        let mut values = Vec::with_capacity(n * dirs.len());
        let mut order = keep_order.then(|| Vec::with_capacity(n * dirs.len()));
        for (v, o) in rows {
            values.extend(v);
            if let (Some(all), Some(o)) = (order.as_mut(), o) {
                all.extend(o);
            }
        }
        Ok(Self { values, order, n, dirs: dirs.len() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_dirs(&self) -> usize {
        self.dirs
    }

    /// Sorted projections along direction `j`.
    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.n..(j + 1) * self.n]
    }

    /// Original point index of each sorted position along direction `j`.
    pub fn order(&self, j: usize) -> Option<&[u32]> {
        self.order.as_ref().map(|o| &o[j * self.n..(j + 1) * self.n])
    }
}

/// Mean of per-direction `W_{r,δ}^r` between two projected samples.
pub(crate) fn sliced_pow(px: &ProjectedSample, py: &ProjectedSample, to: TrimOrder) -> f64 {
    let per_dir: Vec<f64> = (0..px.num_dirs())
        .into_par_iter()
        .map(|j| wasserstein_pow_sorted(px.row(j), py.row(j), to))
        .collect();
    let total: NeumaierSum = per_dir.into_iter().collect();
    total.value() / px.num_dirs() as f64
}

pub(crate) fn check_pair(x: &Sample, y: &Sample, dirs: &DirectionSet) -> Result<()> {
    if x.d() != y.d() {
        return Err(Error::DimensionMismatch { expected: x.d(), found: y.d() });
    }
    if dirs.d() != x.d() {
        return Err(Error::DimensionMismatch { expected: x.d(), found: dirs.d() });
    }
    Ok(())
}

/// Monte-Carlo trimmed sliced Wasserstein distance
/// `((1/N) Σ_j W_{r,δ}^r(P_{θ_j}, Q_{θ_j}))^{1/r}` over the given directions.
///
/// Directions are processed in parallel; the reduction runs in direction
/// order so the result does not depend on the thread count.
pub fn sliced_wasserstein(x: &Sample, y: &Sample, to: TrimOrder, dirs: &DirectionSet) -> Result<f64> {
    check_pair(x, y, dirs)?;
    // Directions are projected one at a time so memory stays O(n + m).
    let per_dir: Vec<f64> = (0..dirs.len())
        .into_par_iter()
        .map(|j| {
            let theta = dirs.direction(j);
            let px = project(x, theta)?;
            let py = project(y, theta)?;
            Ok(wasserstein_pow_sorted(px.values(), py.values(), to))
        })
        .collect::<Result<_>>()?;
    let total: NeumaierSum = per_dir.into_iter().collect();
    Ok((total.value() / dirs.len() as f64).powf(1.0 / to.r))
}
