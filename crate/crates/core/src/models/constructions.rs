//! Two-point and uniform constructions with closed-form sliced distances,
//! and the univariate Wasserstein floors used to bound their perturbations.
//!
//! Every distribution lives on the first coordinate axis of `R^d`, so a
//! projection onto `θ` rescales it by `θ_1` and the sliced distance picks
//! up the factor `(∫ |θ_1|^r dμ)^{1/r}`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::sphere_coordinate_moment;
use crate::rng::{self, StreamRng};
use crate::transport::{Sample, TrimOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstructionKind {
    /// `½δ_0 + ½δ_A` against `½δ_{gA} + ½δ_{(1+g)A}`.
    TwoPoint,
    /// `U(0, c)` against the shifted `U(Δc, (1+Δ)c)`, `c = γ2^{1/r}`.
    Shifted,
    /// `U(0, s1^{1/r})` against `U(0, s2^{1/r})` with `s1 <= s2`; the
    /// perturbation puts mass `ε_m` on the right end of the second.
    ScaledSecond,
    /// As [`ConstructionKind::ScaledSecond`] with `s2 <= s1`; the
    /// perturbation acts on the first distribution.
    ScaledFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Construction {
    pub kind: ConstructionKind,
    pub dim: usize,
    /// Length `a` of `A = (a, 0, …, 0)`.
    pub a: f64,
    pub g: f64,
    pub gamma2: f64,
    pub gap: f64,
    pub s1: f64,
    pub s2: f64,
    /// Order `r` used to build the constructions (`γ2^{1/r}`, `s^{1/r}`).
    pub order: f64,
    /// `ε_n = k n^{-1/2}`.
    pub k: f64,
    pub perturbed: bool,
}

impl Construction {
    pub fn new(kind: ConstructionKind) -> Self {
        let (s1, s2) = match kind {
            ConstructionKind::ScaledFirst => (2.0, 1.0),
            _ => (1.0, 2.0),
        };
        Self { kind, dim: 1, a: 1.0, g: 1.0, gamma2: 1.0, gap: 0.5, s1, s2, order: 2.0, k: 0.5, perturbed: false }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
        if self.dim == 0 {
            return bad("construction dimension must be positive");
        }
        if !(self.order >= 1.0) {
            return bad("construction order must be >= 1");
        }
        if !(self.k > 0.0 && self.k < 1.0) {
            return bad("perturbation constant k must lie in (0, 1)");
        }
        match self.kind {
            ConstructionKind::TwoPoint if !(self.a > 0.0 && self.g > 0.0) => bad("needs a, g > 0"),
            ConstructionKind::Shifted if !(self.gamma2 > 0.0 && self.gap > 0.0) => bad("needs γ2, Δ > 0"),
            ConstructionKind::ScaledSecond if !(self.s1 > 0.0 && self.s1 <= self.s2) => bad("needs 0 < s1 <= s2"),
            ConstructionKind::ScaledFirst if !(self.s2 > 0.0 && self.s2 <= self.s1) => bad("needs 0 < s2 <= s1"),
            _ => Ok(()),
        }
    }

    /// `ε = k size^{-1/2}`.
    pub fn epsilon(&self, size: usize) -> f64 {
        self.k / (size as f64).sqrt()
    }

    /// One draw of the first coordinate from `P` (`first = true`) or `Q`.
    pub(crate) fn draw(&self, first: bool, n: usize, m: usize, rng: &mut StreamRng) -> f64 {
        let u: f64 = rng.random();
        let coin = |p: f64, rng: &mut StreamRng| rng.random::<f64>() < p;
        let inv = 1.0 / self.order;
        match (self.kind, first) {
            (ConstructionKind::TwoPoint, true) => {
                let p0 = if self.perturbed { 0.5 + self.epsilon(n) } else { 0.5 };
                if coin(p0, rng) { 0.0 } else { self.a }
            }
            (ConstructionKind::TwoPoint, false) => {
                if coin(0.5, rng) { self.g * self.a } else { (1.0 + self.g) * self.a }
            }
            (ConstructionKind::Shifted, true) => {
                let c = self.gamma2.powf(inv);
                if self.perturbed {
                    let e = self.epsilon(n);
                    if coin(0.5 * (1.0 + e), rng) { 0.5 * c * u } else { 0.5 * c * (1.0 + u) }
                } else {
                    c * u
                }
            }
            (ConstructionKind::Shifted, false) => self.gamma2.powf(inv) * (self.gap + u),
            (ConstructionKind::ScaledSecond, true) | (ConstructionKind::ScaledFirst, false) => {
                let s = if first { self.s1 } else { self.s2 };
                s.powf(inv) * u
            }
            (ConstructionKind::ScaledSecond, false) | (ConstructionKind::ScaledFirst, true) => {
                let (s, size) = if first { (self.s1, n) } else { (self.s2, m) };
                let top = s.powf(inv);
                if self.perturbed && coin(self.epsilon(size), rng) { top } else { top * u }
            }
        }
    }

    /// Closed-form `SW_{r,δ}` of the unperturbed pair at distance order `to.r()`.
    pub fn true_sw(&self, to: TrimOrder) -> Result<f64> {
        self.validate()?;
        if self.perturbed {
            return Err(Error::NoOracle("perturbed constructions".into()));
        }
        let r = to.r();
        let t = sphere_coordinate_moment(self.dim, r)?;
        let inv = 1.0 / self.order;
        Ok(match self.kind {
            // The quantile gap along θ is the constant g|A^T θ| on both halves.
            ConstructionKind::TwoPoint => self.g * self.a * t,
            // A pure shift by Δc.
            ConstructionKind::Shifted => t * self.gap * self.gamma2.powf(inv),
            // Quantiles a u and b u differ by |a - b| u.
            ConstructionKind::ScaledSecond | ConstructionKind::ScaledFirst => {
                let (lo, hi) = (to.delta(), 1.0 - to.delta());
                let diff = (self.s1.powf(inv) - self.s2.powf(inv)).abs();
                let mean_pow = (hi.powf(r + 1.0) - lo.powf(r + 1.0)) / ((r + 1.0) * to.window());
                t * diff * mean_pow.powf(1.0 / r)
            }
        })
    }
}

/// Univariate pairs whose `W_r^r` has a printed lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FloorCase {
    /// `ν = (1+ε)/2 U(0,½) + (1-ε)/2 U(½,1)` against `ρ = U(Δ, 1+Δ)`, `Δ >= ε > 0`.
    Shift { gap: f64, eps: f64 },
    /// `ν = U(0, ξ)` against `ρ = (1-ε) U(0,1) + ε δ_1`, `ξ, ε ∈ (0, 1]`.
    Scale { xi: f64, eps: f64 },
}

impl FloorCase {
    fn validate(&self) -> Result<()> {
        match *self {
            FloorCase::Shift { gap, eps } if eps > 0.0 && gap >= eps => Ok(()),
            FloorCase::Scale { xi, eps } if xi > 0.0 && xi <= 1.0 && eps > 0.0 && eps <= 1.0 => Ok(()),
            other => Err(Error::InvalidParams(format!("{other:?} outside its domain"))),
        }
    }

    pub(crate) fn draw(&self, first: bool, rng: &mut StreamRng) -> f64 {
        let u: f64 = rng.random();
        let coin: f64 = rng.random();
        match (*self, first) {
            (FloorCase::Shift { eps, .. }, true) => {
                if coin < 0.5 * (1.0 + eps) { 0.5 * u } else { 0.5 * (1.0 + u) }
            }
            (FloorCase::Shift { gap, .. }, false) => gap + u,
            (FloorCase::Scale { xi, .. }, true) => xi * u,
            (FloorCase::Scale { eps, .. }, false) => if coin < eps { 1.0 } else { u },
        }
    }
}

/// Samples of size `n` from `ν` and `ρ`.
pub fn floor_pair(case: FloorCase, n: usize, seed: u64) -> Result<(Sample, Sample)> {
    case.validate()?;
    let side = |first: bool, index: u64| {
        let mut rng = rng::stream(seed, index);
        Sample::from_values((0..n).map(|_| case.draw(first, &mut rng)).collect())
    };
    Ok((side(true, 0)?, side(false, 1)?))
}

/// Lower bound on `W_r^r(ν, ρ)`: `Δ^r + (r/4) ε Δ^{r-1}` for the shift case and
/// `(|Δ_ξ|^r + r ε |Δ_ξ|^{r-1}) / (r + 1)`, `Δ_ξ = ξ - 1`, for the scale case.
pub fn lemma_c2_bound(case: FloorCase, r: f64) -> Result<f64> {
    case.validate()?;
    if !(r >= 1.0) {
        return Err(Error::InvalidOrder(r));
    }
    Ok(match case {
        FloorCase::Shift { gap, eps } => gap.powf(r) + 0.25 * r * eps * gap.powf(r - 1.0),
        FloorCase::Scale { xi, eps } => {
            let d = (xi - 1.0).abs();
            (d.powf(r) + r * eps * d.powf(r - 1.0)) / (r + 1.0)
        }
    })
}
