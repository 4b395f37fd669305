//! Distribution pairs used in the simulation studies, their samplers and
//! the population sliced distances used as ground truth.
//!
//! A model is written as `name[:key=value,...]`, e.g. `m2`, `m6i:Delta=0.3`
//! (or just `m6i:0.3`), `c1:d=3,a=2` or `toggle:alpha1=20`.

mod constructions;
mod toggle;
mod torus;
mod truth;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};
use crate::transport::{Sample, TrimOrder};

pub use constructions::{floor_pair, lemma_c2_bound, Construction, ConstructionKind, FloorCase};
pub use toggle::{toggle_switch, ToggleParams, DEFAULT_STEPS};
pub use torus::sample_torus;
pub use truth::{direction_profile, plugin_reference, reference_sw, DirectionProfile, Reference, ReferenceOptions, TruthKind};

/// Centres of the two components of the first and fifth pairs.
const M1_MEANS: [[f64; 2]; 2] = [[-1.0, 1.0], [1.0, 1.0]];
const M5_MEANS: [[f64; 2]; 2] = [[-5.0, -5.0], [5.0, 5.0]];
/// Standard deviation of the narrow component of the fourth pair (variance 0.1).
const M4_NARROW_SD: f64 = 0.316_227_766_016_837_94;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum Model {
    /// `½N((-1,1), I) + ½N((1,1), I)` against `N(0, I)` in `R^2`.
    M1,
    /// Atoms at 2 and 4 with an `n`-dependent tilt against atoms at 2 and 5.
    M2,
    /// Torus `T(½, 1)` against `T(½, 5)`.
    M3,
    /// `.95N(0,1) + .05N(0, 0.1)` against `N(0,1)`.
    M4,
    /// Unequal against equal mixtures of `N(∓(5,5), I)`.
    M5,
    /// `½δ_{-5} + ½δ_5` against `(½+Δ)δ_{-5} + (½-Δ)δ_5`.
    M6i { gap: f64 },
    /// `U(-5,5)` against `(½+Δ)U(-5,0) + (½-Δ)U(0,5)`.
    M6ii { gap: f64 },
    /// `T(r1, R1)` against `T(r2, R2)`.
    Torus { r1: f64, big_r1: f64, r2: f64, big_r2: f64 },
    Construction(Construction),
    /// Both samples drawn from the same toggle-switch parameters.
    Toggle(ToggleParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    P,
    Q,
}

impl Model {
    pub fn dim(&self) -> usize {
        match self {
            Model::M1 | Model::M5 => 2,
            Model::M3 | Model::Torus { .. } => 3,
            Model::Construction(c) => c.dim,
            _ => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Model::M1 => "m1",
            Model::M2 => "m2",
            Model::M3 => "m3",
            Model::M4 => "m4",
            Model::M5 => "m5",
            Model::M6i { .. } => "m6i",
            Model::M6ii { .. } => "m6ii",
            Model::Torus { .. } => "torus",
            Model::Construction(c) => match c.kind {
                ConstructionKind::TwoPoint => "c1",
                ConstructionKind::Shifted => "c2",
                ConstructionKind::ScaledSecond => "c3",
                ConstructionKind::ScaledFirst => "c4",
            },
            Model::Toggle(_) => "toggle",
        }
    }

    /// Whether the distributions themselves change with the nominal sample sizes.
    pub fn size_dependent(&self) -> bool {
        match self {
            Model::M2 => true,
            Model::Construction(c) => c.perturbed,
            _ => false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Model::M6i { gap } | Model::M6ii { gap } if !(0.0..=0.5).contains(&gap) => {
                Err(Error::InvalidParams(format!("Δ must lie in [0, 1/2], got {gap}")))
            }
            Model::Torus { r1, big_r1, r2, big_r2 } => {
                for (r, big) in [(r1, big_r1), (r2, big_r2)] {
                    if !(r > 0.0 && r < big && big.is_finite()) {
                        return Err(Error::InvalidParams(format!("torus needs 0 < r < R, got r={r}, R={big}")));
                    }
                }
                Ok(())
            }
            Model::Construction(c) => c.validate(),
            Model::Toggle(p) => p.validate(),
            _ => Ok(()),
        }
    }

    /// Draws `count` points from one side of the pair. `n` and `m` are the
    /// nominal sample sizes, which some pairs use as parameters.
    pub(crate) fn draw(&self, side: Side, count: usize, n: usize, m: usize, seed: u64) -> Result<Sample> {
        if count == 0 {
            return Err(Error::EmptySample);
        }
        let first = side == Side::P;
        let mut rng = rng::stream(seed, 0);
        let ones = |rng: &mut StreamRng, f: &mut dyn FnMut(&mut StreamRng) -> f64| {
            Sample::from_values((0..count).map(|_| f(rng)).collect())
        };
        match *self {
            Model::M1 => Ok(planar_mixture(&mut rng, count, 0.5, if first { M1_MEANS } else { [[0.0; 2]; 2] })),
            Model::M5 => Ok(planar_mixture(&mut rng, count, if first { 0.55 } else { 0.5 }, M5_MEANS)),
            Model::M2 => {
                let p2 = m2_first_atom_weight(n);
                ones(&mut rng, &mut |rng| {
                    let u: f64 = rng.random();
                    if first {
                        if u < p2 { 2.0 } else { 4.0 }
                    } else if u < 1.0 / 3.0 {
                        2.0
                    } else {
                        5.0
                    }
                })
            }
            Model::M4 => ones(&mut rng, &mut |rng| {
                let z: f64 = rng.sample(StandardNormal);
                if first && rng.random::<f64>() < 0.05 { M4_NARROW_SD * z } else { z }
            }),
            Model::M6i { gap } => {
                let low = if first { 0.5 } else { 0.5 + gap };
                ones(&mut rng, &mut |rng| if rng.random::<f64>() < low { -5.0 } else { 5.0 })
            }
            Model::M6ii { gap } => ones(&mut rng, &mut |rng| {
                let u: f64 = rng.random();
                if first {
                    -5.0 + 10.0 * u
                } else if rng.random::<f64>() < 0.5 + gap {
                    -5.0 + 5.0 * u
                } else {
                    5.0 * u
                }
            }),
            Model::M3 => {
                let big = if first { 1.0 } else { 5.0 };
                sample_torus(0.5, big, count, seed)
            }
            Model::Torus { r1, big_r1, r2, big_r2 } => {
                let (r, big) = if first { (r1, big_r1) } else { (r2, big_r2) };
                sample_torus(r, big, count, seed)
            }
            Model::Construction(c) => {
                let mut data = vec![0.0; count * c.dim];
                for row in data.chunks_exact_mut(c.dim) {
                    row[0] = c.draw(first, n, m, &mut rng);
                }
                Sample::from_flat(data, c.dim)
            }
            Model::Toggle(p) => toggle_switch(&p, count, seed),
        }
    }

    /// Closed-form `SW_{r,δ}(P, Q)` where one is registered.
    pub fn true_sw_oracle(&self, to: TrimOrder) -> Result<f64> {
        self.validate()?;
        let (r, delta) = (to.r(), to.delta());
        match *self {
            Model::M6i { gap } => {
                // The quantile functions differ by 10 exactly on (½, ½+Δ].
                let len = ((0.5 + gap).min(1.0 - delta) - 0.5).max(0.0);
                Ok((10f64.powf(r) * len / to.window()).powf(1.0 / r))
            }
            Model::M6ii { gap } => Ok((m6ii_gap_integral(gap, r, delta) / to.window()).powf(1.0 / r)),
            Model::Construction(c) => c.true_sw(to),
            Model::Toggle(_) => Ok(0.0),
            _ => Err(Error::NoOracle(format!("{} has no closed-form distance", self.name()))),
        }
    }
}

/// `i.i.d.` samples of sizes `n` from `P` and `m` from `Q`.
pub fn sample_pair(model: &Model, n: usize, m: usize, seed: u64) -> Result<(Sample, Sample)> {
    model.validate()?;
    if n == 0 || m == 0 {
        return Err(Error::InvalidParams("sample sizes must be positive".into()));
    }
    let x = model.draw(Side::P, n, n, m, rng::derive_seed(seed, &[0]))?;
    let y = model.draw(Side::Q, m, n, m, rng::derive_seed(seed, &[1]))?;
    Ok((x, y))
}

/// Weight of the atom at 2 in the first distribution of the second pair:
/// the printed weights `(1 + n^{-1/2})/2` and `1`, renormalised.
pub fn m2_first_atom_weight(n: usize) -> f64 {
    let a = 0.5 * (1.0 + 1.0 / (n as f64).sqrt());
    a / (a + 1.0)
}

/// Two-component mixture in the plane with unit covariance; the first
/// component has weight `w0`.
fn planar_mixture(rng: &mut StreamRng, count: usize, w0: f64, means: [[f64; 2]; 2]) -> Sample {
    let mut data = Vec::with_capacity(2 * count);
    for _ in 0..count {
        let k = if rng.random::<f64>() < w0 { 0 } else { 1 };
        let z0: f64 = rng.sample(StandardNormal);
        let z1: f64 = rng.sample(StandardNormal);
        let mu = means[k];
        data.extend([mu[0] + z0, mu[1] + z1]);
    }
    Sample::from_flat(data, 2).expect("finite planar sample")
}

/// `∫_δ^{1-δ} |F^{-1} - G^{-1}|^r` for the sixth pair with uniform pieces.
/// Both quantile functions are continuous and linear between the knots
/// `δ, ½+Δ, 1-δ`, so the gap is too.
fn m6ii_gap_integral(gap: f64, r: f64, delta: f64) -> f64 {
    let p = 0.5 + gap;
    let qp = |u: f64| -5.0 + 10.0 * u;
    let qq = |u: f64| if u <= p { -5.0 + 5.0 * u / p } else { 5.0 * (u - p) / (1.0 - p) };
    let mut knots = vec![delta, 1.0 - delta];
    if p > delta && p < 1.0 - delta {
        knots.insert(1, p);
    }
    knots
        .windows(2)
        .map(|w| linear_power_integral(qp(w[0]) - qq(w[0]), qp(w[1]) - qq(w[1]), w[1] - w[0], r))
        .sum()
}

/// `∫_0^L |g|^r` for `g` linear from `ga` to `gb` over an interval of length `L`.
fn linear_power_integral(ga: f64, gb: f64, len: f64, r: f64) -> f64 {
    if len <= 0.0 {
        return 0.0;
    }
    if ga.signum() * gb.signum() < 0.0 {
        let root = len * ga.abs() / (ga.abs() + gb.abs());
        return linear_power_integral(ga, 0.0, root, r) + linear_power_integral(0.0, gb, len - root, r);
    }
    let (a, b) = (ga.abs(), gb.abs());
    if (a - b).abs() <= 1e-15 * a.max(b) {
        return a.powf(r) * len;
    }
    len * (b.powf(r + 1.0) - a.powf(r + 1.0)) / ((r + 1.0) * (b - a))
}

impl fmt::Display for Model {
    /// Canonical `name:key=value,...` form accepted by [`Model::from_str`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())?;
        match self {
            Model::M6i { gap } | Model::M6ii { gap } => write!(f, ":Delta={gap}"),
            Model::Torus { r1, big_r1, r2, big_r2 } => write!(f, ":r1={r1},R1={big_r1},r2={r2},R2={big_r2}"),
            Model::Construction(c) => write!(
                f,
                ":d={},a={},g={},gamma2={},Delta={},s1={},s2={},order={},k={},perturbed={}",
                c.dim, c.a, c.g, c.gamma2, c.gap, c.s1, c.s2, c.order, c.k, c.perturbed
            ),
            Model::Toggle(p) => write!(
                f,
                ":alpha1={},alpha2={},beta1={},beta2={},mu={},sigma={},gamma={},T={}",
                p.alpha1, p.alpha2, p.beta1, p.beta2, p.mu, p.sigma, p.gamma, p.steps
            ),
            _ => Ok(()),
        }
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.trim().split_once(':').unwrap_or((s.trim(), ""));
        let mut pairs: Vec<(String, String)> = Vec::new();
        for item in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match item.split_once('=') {
                Some((k, v)) => pairs.push((k.trim().to_string(), v.trim().to_string())),
                None => pairs.push((String::new(), item.to_string())),
            }
        }
        let bad = |msg: String| Error::InvalidParams(msg);
        let mut take = |keys: &[&str]| -> Option<String> {
            let at = pairs.iter().position(|(k, _)| keys.contains(&k.as_str()))?;
            Some(pairs.remove(at).1)
        };
        let num = |v: Option<String>, default: f64| -> Result<f64> {
            match v {
                None => Ok(default),
                Some(t) => t.parse::<f64>().map_err(|_| Error::InvalidParams(format!("not a number: {t:?}"))),
            }
        };
        let model = match name.to_ascii_lowercase().as_str() {
            "m1" => Model::M1,
            "m2" => Model::M2,
            "m3" => Model::M3,
            "m4" => Model::M4,
            "m5" => Model::M5,
            "m6i" => Model::M6i { gap: num(take(&["Delta", "delta", "gap", ""]), 0.0)? },
            "m6ii" => Model::M6ii { gap: num(take(&["Delta", "delta", "gap", ""]), 0.0)? },
            "torus" => Model::Torus {
                r1: num(take(&["r1", "r"]), 0.5)?,
                big_r1: num(take(&["R1", "R"]), 1.0)?,
                r2: num(take(&["r2"]), 0.5)?,
                big_r2: num(take(&["R2"]), 5.0)?,
            },
            c @ ("c1" | "c2" | "c3" | "c4") => {
                let kind = match c {
                    "c1" => ConstructionKind::TwoPoint,
                    "c2" => ConstructionKind::Shifted,
                    "c3" => ConstructionKind::ScaledSecond,
                    _ => ConstructionKind::ScaledFirst,
                };
                let base = Construction::new(kind);
                let dim = match take(&["d", "dim"]) {
                    None => base.dim,
                    Some(t) => t.parse().map_err(|_| bad(format!("not a dimension: {t:?}")))?,
                };
                let perturbed = match take(&["perturbed"]).as_deref() {
                    None | Some("0") | Some("false") => false,
                    Some("1") | Some("true") => true,
                    Some(t) => return Err(bad(format!("perturbed must be true or false, got {t:?}"))),
                };
                Model::Construction(Construction {
                    kind,
                    dim,
                    a: num(take(&["a"]), base.a)?,
                    g: num(take(&["g"]), base.g)?,
                    gamma2: num(take(&["gamma2"]), base.gamma2)?,
                    gap: num(take(&["Delta", "delta", "gap"]), base.gap)?,
                    s1: num(take(&["s1"]), base.s1)?,
                    s2: num(take(&["s2"]), base.s2)?,
                    order: num(take(&["order"]), base.order)?,
                    k: num(take(&["k"]), base.k)?,
                    perturbed,
                })
            }
            "toggle" => {
                let base = ToggleParams::reference();
                let steps = match take(&["T", "steps"]) {
                    None => base.steps,
                    Some(t) => t.parse().map_err(|_| bad(format!("not a step count: {t:?}")))?,
                };
                Model::Toggle(ToggleParams {
                    alpha1: num(take(&["alpha1"]), base.alpha1)?,
                    alpha2: num(take(&["alpha2"]), base.alpha2)?,
                    beta1: num(take(&["beta1"]), base.beta1)?,
                    beta2: num(take(&["beta2"]), base.beta2)?,
                    mu: num(take(&["mu"]), base.mu)?,
                    sigma: num(take(&["sigma"]), base.sigma)?,
                    gamma: num(take(&["gamma"]), base.gamma)?,
                    steps,
                })
            }
            other => return Err(bad(format!("unknown model {other:?}"))),
        };
        if let Some((k, v)) = pairs.first() {
            return Err(bad(format!("unexpected parameter {k}={v} for {}", model.name())));
        }
        model.validate()?;
        Ok(model)
    }
}
