//! Regularity functionals of analytic one-dimensional distributions: the
//! `J_{r,δ}` functional that governs the parametric rate of the empirical
//! measure, its sliced average, and the worst-case constant `C_{r,δ}`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::numeric::{integrate, integrate_pieces, pow_r, NeumaierSum};
use crate::transport::{DirectionSet, TrimOrder};

type Fun = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Density below this value counts as zero.
const ZERO_DENSITY: f64 = 1e-300;
const ABS_TOL: f64 = 1e-9;
const REL_TOL: f64 = 1e-10;

/// Analytic description of a distribution on the real line.
#[derive(Clone)]
pub struct DistSpec {
    density: Fun,
    cdf: Fun,
    sf: Fun,
    quantile: Fun,
    support: (f64, f64),
    kinks: Vec<f64>,
    moment2: Option<f64>,
}

impl fmt::Debug for DistSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DistSpec")
            .field("support", &self.support)
            .field("kinks", &self.kinks)
            .field("moment2", &self.moment2)
            .finish_non_exhaustive()
    }
}

impl DistSpec {
    /// A distribution from its density, CDF and quantile function, with
    /// support `[lo, hi]` (either end may be infinite).
    pub fn new(
        density: impl Fn(f64) -> f64 + Send + Sync + 'static,
        cdf: impl Fn(f64) -> f64 + Send + Sync + 'static,
        quantile: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support: (f64, f64),
    ) -> Result<Self> {
        if support.0.is_nan() || support.1.is_nan() || support.0 > support.1 {
            return Err(Error::InvalidSpec(format!("bad support {support:?}")));
        }
        let cdf: Fun = Arc::new(cdf);
        let c = cdf.clone();
        Ok(Self {
            density: Arc::new(density),
            sf: Arc::new(move |x| 1.0 - c(x)),
            cdf,
            quantile: Arc::new(quantile),
            support,
            kinks: Vec::new(),
            moment2: None,
        })
    }

    /// Supplies an accurate survival function `1 - F` for upper tails.
    pub fn with_sf(mut self, sf: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.sf = Arc::new(sf);
        self
    }

    /// Points where the density is not smooth; quadrature splits there.
    pub fn with_kinks(mut self, kinks: Vec<f64>) -> Self {
        self.kinks = kinks;
        self
    }

    pub fn with_moment2(mut self, m2: f64) -> Self {
        self.moment2 = Some(m2);
        self
    }

    pub fn density(&self, x: f64) -> f64 {
        (self.density)(x)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        (self.cdf)(x)
    }

    pub fn sf(&self, x: f64) -> f64 {
        (self.sf)(x)
    }

    pub fn quantile(&self, u: f64) -> f64 {
        (self.quantile)(u)
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn moment2(&self) -> Option<f64> {
        self.moment2
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::uniform_mixture(&[(1.0, a, b)])
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        Self::normal_mixture(&[(1.0, mean, sd)])
    }

    /// Point mass at `c`. `F(1 - F)` vanishes off a null set.
    pub fn point_mass(c: f64) -> Self {
        Self {
            density: Arc::new(|_| 0.0),
            cdf: Arc::new(move |x| if x >= c { 1.0 } else { 0.0 }),
            sf: Arc::new(move |x| if x >= c { 0.0 } else { 1.0 }),
            quantile: Arc::new(move |_| c),
            support: (c, c),
            kinks: vec![c],
            moment2: Some(c * c),
        }
    }

    /// Finite mixture `Σ w_k U(a_k, b_k)`; weights are normalised.
    /// Components may leave gaps, where the density is zero.
    pub fn uniform_mixture(parts: &[(f64, f64, f64)]) -> Result<Self> {
        let mut comps: Vec<(f64, f64, f64)> = Vec::with_capacity(parts.len());
        let total: f64 = parts.iter().map(|p| p.0).sum();
        for &(w, a, b) in parts {
            if !(w >= 0.0) || !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidSpec(format!("bad uniform component ({w}, {a}, {b})")));
            }
            if w > 0.0 {
                comps.push((w / total, a, b));
            }
        }
        if comps.is_empty() || !(total > 0.0) {
            return Err(Error::InvalidSpec("mixture needs positive weight".into()));
        }
        let lo = comps.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        let hi = comps.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
        let mut kinks: Vec<f64> = comps.iter().flat_map(|c| [c.1, c.2]).collect();
        kinks.sort_by(f64::total_cmp);
        kinks.dedup();
        let m2 = comps.iter().map(|&(w, a, b)| w * (a * a + a * b + b * b) / 3.0).sum();

        let c1 = comps.clone();
        let density = move |x: f64| {
            c1.iter()
                .filter(|c| x >= c.1 && x <= c.2)
                .map(|&(w, a, b)| w / (b - a))
                .sum::<f64>()
        };
        let c2 = comps.clone();
        let cdf = move |x: f64| {
            c2.iter().map(|&(w, a, b)| w * ((x - a) / (b - a)).clamp(0.0, 1.0)).sum::<f64>().min(1.0)
        };
        let c3 = comps.clone();
        let sf = move |x: f64| {
            c3.iter().map(|&(w, a, b)| w * ((b - x) / (b - a)).clamp(0.0, 1.0)).sum::<f64>().min(1.0)
        };
        // The CDF is piecewise linear between kinks, so the quantile is
        // found by locating the kink interval and interpolating.
        let knots: Vec<(f64, f64)> = {
            let cdf_k = cdf.clone();
            kinks.iter().map(|&k| (k, cdf_k(k))).collect()
        };
        let quantile = move |u: f64| {
            if u <= 0.0 {
                return lo;
            }
            if u >= 1.0 {
                return knots.last().unwrap().0;
            }
            // first knot with F >= u
            let j = knots.partition_point(|k| k.1 < u);
            let (x1, f1) = knots[j];
            let (x0, f0) = knots[j - 1];
            if f1 > f0 {
                x0 + (u - f0) / (f1 - f0) * (x1 - x0)
            } else {
                x1
            }
        };
        Ok(Self {
            density: Arc::new(density),
            cdf: Arc::new(cdf),
            sf: Arc::new(sf),
            quantile: Arc::new(quantile),
            support: (lo, hi),
            kinks,
            moment2: Some(m2),
        })
    }

    /// Finite mixture `Σ w_k N(μ_k, σ_k²)`; weights are normalised.
    pub fn normal_mixture(parts: &[(f64, f64, f64)]) -> Result<Self> {
        let total: f64 = parts.iter().map(|p| p.0).sum();
        if parts.is_empty() || !(total > 0.0) {
            return Err(Error::InvalidSpec("mixture needs positive weight".into()));
        }
        let mut comps = Vec::with_capacity(parts.len());
        for &(w, mu, sd) in parts {
            let normal = Normal::new(mu, sd).map_err(|e| Error::InvalidSpec(e.to_string()))?;
            if !(w >= 0.0) {
                return Err(Error::InvalidSpec(format!("negative weight {w}")));
            }
            comps.push((w / total, normal));
        }
        let m2 = parts.iter().map(|&(w, mu, sd)| w / total * (mu * mu + sd * sd)).sum();
        let mix = Arc::new(comps);
        let (m1, m2c, m3, m4) = (mix.clone(), mix.clone(), mix.clone(), mix);
        let cdf = move |x: f64| m1.iter().map(|(w, d)| w * d.cdf(x)).sum::<f64>();
        let sf = move |x: f64| m2c.iter().map(|(w, d)| w * d.sf(x)).sum::<f64>();
        let density = move |x: f64| m3.iter().map(|(w, d)| w * d.pdf(x)).sum::<f64>();
        let quantile = move |u: f64| normal_mixture_quantile(&m4, u);
        Ok(Self {
            density: Arc::new(density),
            cdf: Arc::new(cdf),
            sf: Arc::new(sf),
            quantile: Arc::new(quantile),
            support: (f64::NEG_INFINITY, f64::INFINITY),
            kinks: Vec::new(),
            moment2: Some(m2),
        })
    }

    /// Distribution of `a X` for `a > 0`.
    pub fn scaled(&self, a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidSpec(format!("scale must be positive, got {a}")));
        }
        let (d, c, s, q) = (self.density.clone(), self.cdf.clone(), self.sf.clone(), self.quantile.clone());
        Ok(Self {
            density: Arc::new(move |x| d(x / a) / a),
            cdf: Arc::new(move |x| c(x / a)),
            sf: Arc::new(move |x| s(x / a)),
            quantile: Arc::new(move |u| a * q(u)),
            support: (a * self.support.0, a * self.support.1),
            kinks: self.kinks.iter().map(|k| a * k).collect(),
            moment2: self.moment2.map(|m| a * a * m),
        })
    }
}

/// Quantile of a normal mixture by safeguarded Newton iteration.
fn normal_mixture_quantile(comps: &[(f64, Normal)], u: f64) -> f64 {
    if u <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if u >= 1.0 {
        return f64::INFINITY;
    }
    let cdf = |x: f64| comps.iter().map(|(w, d)| w * d.cdf(x)).sum::<f64>();
    let pdf = |x: f64| comps.iter().map(|(w, d)| w * d.pdf(x)).sum::<f64>();
    // Every component quantile at u brackets the mixture quantile.
    let qs = comps.iter().map(|(_, d)| d.inverse_cdf(u));
    let (mut lo, mut hi) = qs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), q| (a.min(q), b.max(q)));
    if lo == hi {
        return lo;
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = cdf(x) - u;
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let p = pdf(x);
        let step = if p > 0.0 { x - f / p } else { f64::NAN };
        let next = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) || hi - lo <= 1e-15 * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}

/// Maps an integral over an unbounded range onto a bounded one.
enum RangeMap {
    Finite,
    /// `(-∞, ∞)`, `x = t / (1 - t²)`.
    Both,
    /// `[a, ∞)`, `x = a + t / (1 - t)`.
    Upper(f64),
    /// `(-∞, b]`, `x = b - t / (1 - t)`.
    Lower(f64),
}

fn integrate_range<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, kinks: &[f64]) -> f64 {
    let map = match (lo.is_finite(), hi.is_finite()) {
        (true, true) => RangeMap::Finite,
        (false, false) => RangeMap::Both,
        (true, false) => RangeMap::Upper(lo),
        (false, true) => RangeMap::Lower(hi),
    };
    // Integrand values of zero short-circuit so that infinite Jacobians at
    // the ends of the mapped range do not produce NaN.
    let q = match map {
        RangeMap::Finite => integrate_pieces(&f, lo, hi, kinks, ABS_TOL, REL_TOL),
        RangeMap::Both => {
            let g = |t: f64| {
                let x = t / (1.0 - t * t);
                let v = f(x);
                if v == 0.0 { 0.0 } else { v * (1.0 + t * t) / ((1.0 - t * t) * (1.0 - t * t)) }
            };
            let ts: Vec<f64> = kinks
                .iter()
                .map(|&x| if x == 0.0 { 0.0 } else { (-1.0 + (1.0 + 4.0 * x * x).sqrt()) / (2.0 * x) })
                .collect();
            integrate_pieces(g, -1.0, 1.0, &ts, ABS_TOL, REL_TOL)
        }
        RangeMap::Upper(a) => {
            let g = |t: f64| {
                let v = f(a + t / (1.0 - t));
                if v == 0.0 { 0.0 } else { v / ((1.0 - t) * (1.0 - t)) }
            };
            let ts: Vec<f64> = kinks.iter().filter(|&&x| x > a).map(|&x| (x - a) / (1.0 + x - a)).collect();
            integrate_pieces(g, 0.0, 1.0, &ts, ABS_TOL, REL_TOL)
        }
        RangeMap::Lower(b) => {
            let g = |t: f64| {
                let v = f(b - t / (1.0 - t));
                if v == 0.0 { 0.0 } else { v / ((1.0 - t) * (1.0 - t)) }
            };
            let ts: Vec<f64> = kinks.iter().filter(|&&x| x < b).map(|&x| (b - x) / (1.0 + b - x)).collect();
            integrate_pieces(g, 0.0, 1.0, &ts, ABS_TOL, REL_TOL)
        }
    };
    q.value
}

/// Trimmed support `[F^{-1}(δ), F^{-1}(1-δ)]`, or the full support when `δ = 0`.
fn trimmed_range(spec: &DistSpec, delta: f64) -> (f64, f64) {
    if delta > 0.0 {
        (spec.quantile(delta), spec.quantile(1.0 - delta))
    } else {
        spec.support
    }
}

/// True when the density vanishes on an interval of positive length
/// strictly inside `(lo, hi)`.
fn has_interior_gap(spec: &DistSpec, lo: f64, hi: f64) -> bool {
    let (a, b) = if lo.is_finite() && hi.is_finite() {
        (lo, hi)
    } else {
        (spec.quantile(1e-6).max(lo), spec.quantile(1.0 - 1e-6).min(hi))
    };
    if !(b > a) {
        return false;
    }
    let mut probes: Vec<f64> = (1..4096).map(|k| a + (b - a) * k as f64 / 4096.0).collect();
    let mut ks: Vec<f64> = spec.kinks.iter().copied().filter(|&k| k > a && k < b).collect();
    ks.insert(0, a);
    ks.push(b);
    probes.extend(ks.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    let h = 1e-7 * (b - a);
    probes.into_iter().any(|p| {
        p - h > a
            && p + h < b
            && [p - h, p, p + h].iter().all(|&x| spec.density(x) < ZERO_DENSITY)
    })
}

/// Point where a tail function `tail` (CDF for the lower tail, survival
/// function for the upper tail) reaches `mass`, searching outward from
/// `start` toward `end`.
fn tail_point(tail: impl Fn(f64) -> f64, start: f64, end: f64, mass: f64) -> f64 {
    let dir = if end > start { 1.0 } else { -1.0 };
    let (mut near, mut far) = (start, start);
    let mut step = 1.0f64.max(start.abs());
    loop {
        let next = if end.is_finite() { (far + dir * step).clamp(start.min(end), start.max(end)) } else { far + dir * step };
        far = next;
        if tail(far) <= mass || far == end || step > 1e300 {
            break;
        }
        near = far;
        step *= 2.0;
    }
    if tail(far) > mass {
        return far;
    }
    for _ in 0..200 {
        let mid = 0.5 * (near + far);
        if mid == near || mid == far {
            break;
        }
        if tail(mid) <= mass {
            far = mid;
        } else {
            near = mid;
        }
    }
    far
}

/// Detects a non-integrable tail of `h` at the lower or upper end of the
/// support: `|x - e| h(x)` (or `|x| h(x)` for an infinite end) must decay
/// between the `1e-8` and `1e-150` tail-mass points.
fn tail_diverges(spec: &DistSpec, h: &impl Fn(f64) -> f64, upper: bool) -> bool {
    let (lo, hi) = spec.support;
    let median = spec.quantile(0.5);
    let (end, pts) = if upper {
        let sf = |x: f64| spec.sf(x);
        (hi, [tail_point(sf, median, hi, 1e-8), tail_point(sf, median, hi, 1e-150)])
    } else {
        let cdf = |x: f64| spec.cdf(x);
        (lo, [tail_point(cdf, median, lo, 1e-8), tail_point(cdf, median, lo, 1e-150)])
    };
    let g = |x: f64| {
        let v = h(x);
        if v == 0.0 {
            0.0
        } else if end.is_finite() {
            (x - end).abs() * v
        } else {
            x.abs() * v
        }
    };
    let (near, far) = (g(pts[0]), g(pts[1]));
    if !near.is_finite() || !far.is_finite() {
        return true;
    }
    near > 0.0 && far >= 0.5 * near
}

/// `J_{r,δ}(P) = (1/(1-2δ)) ∫ [F(1-F)]^{r/2} / p^{r-1}` over the trimmed
/// support, with `0/0 = 0`. Returns `+∞` when the density vanishes on an
/// interior interval (for `r > 1`) or, at `δ = 0`, when a tail is not
/// integrable.
pub fn j_functional_1d(spec: &DistSpec, to: TrimOrder) -> Result<f64> {
    let r = to.r();
    let (lo, hi) = trimmed_range(spec, to.delta());
    if lo.is_nan() || hi.is_nan() {
        return Err(Error::InvalidSpec("quantile function returned NaN".into()));
    }
    if !(hi > lo) {
        return Ok(0.0);
    }
    let h = |x: f64| {
        let mass = (spec.cdf(x) * spec.sf(x)).max(0.0);
        if mass == 0.0 {
            return 0.0;
        }
        let num = mass.powf(0.5 * r);
        if r == 1.0 {
            return num;
        }
        let p = spec.density(x);
        if p < ZERO_DENSITY {
            // Zero density with non-negligible mass on both sides is a gap;
            // otherwise both have underflowed far out in a tail.
            if mass > 1e-200 { f64::INFINITY } else { 0.0 }
        } else {
            num / p.powf(r - 1.0)
        }
    };
    if r > 1.0 && has_interior_gap(spec, lo, hi) {
        return Ok(f64::INFINITY);
    }
    if to.delta() == 0.0 && (tail_diverges(spec, &h, false) || tail_diverges(spec, &h, true)) {
        return Ok(f64::INFINITY);
    }
    let v = integrate_range(h, lo, hi, &spec.kinks);
    if !v.is_finite() {
        return Ok(f64::INFINITY);
    }
    Ok(v / to.window())
}

/// Average of `J_{r,δ}` of the projected distributions over the directions;
/// `+∞` if any direction gives `+∞`.
pub fn sliced_sj<F>(projspecs: F, to: TrimOrder, dirs: &DirectionSet) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<DistSpec> + Sync,
{
    let vals: Vec<f64> = (0..dirs.len())
        .into_par_iter()
        .map(|j| j_functional_1d(&projspecs(dirs.direction(j))?, to))
        .collect::<Result<_>>()?;
    if vals.iter().any(|v| v.is_infinite()) {
        return Ok(f64::INFINITY);
    }
    let total: NeumaierSum = vals.into_iter().collect();
    Ok(total.value() / dirs.len() as f64)
}

/// `C_{r,δ}(P) = ((r 2^{r-1} / (1-2δ)) ∫ |x|^{r-1} sqrt(F(1-F)) dx)^{1/r}`
/// over the trimmed support.
pub fn c_r_delta(spec: &DistSpec, to: TrimOrder) -> Result<f64> {
    let r = to.r();
    let (lo, hi) = trimmed_range(spec, to.delta());
    if !(hi > lo) {
        return Ok(0.0);
    }
    let h = |x: f64| {
        let mass = (spec.cdf(x) * spec.sf(x)).max(0.0);
        if mass == 0.0 {
            0.0
        } else {
            pow_r(x.abs(), r - 1.0) * mass.sqrt()
        }
    };
    let mut kinks = spec.kinks.clone();
    kinks.push(0.0);
    let v = integrate_range(h, lo, hi, &kinks);
    Ok((r * 2f64.powf(r - 1.0) / to.window() * v).powf(1.0 / r))
}

/// `(∫ |θ_1|^r dμ(θ))^{1/r}` for `μ` uniform on the unit sphere of `R^d`.
///
/// Written as `θ_1 = cos φ` with `φ` having density proportional to
/// `sin^{d-2} φ` on `[0, π]`, which keeps the integrand bounded for every `d`.
pub fn sphere_coordinate_moment(d: usize, r: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidParams("dimension must be positive".into()));
    }
    if d == 1 {
        return Ok(1.0);
    }
    let k = (d - 2) as i32;
    let pi = std::f64::consts::PI;
    let half = pi / 2.0;
    let weight = |phi: f64| phi.sin().powi(k);
    let num = 2.0 * integrate(|p| p.cos().abs().powf(r) * weight(p), 0.0, half, 1e-14, 1e-13).value;
    let den = 2.0 * integrate(weight, 0.0, half, 1e-14, 1e-13).value;
    Ok((num / den).powf(1.0 / r))
}
