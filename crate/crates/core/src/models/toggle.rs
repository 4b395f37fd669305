//! Toggle-switch gene expression simulator.
//!
//! Two genes with expression levels `U`, `V` evolve for `T` steps as
//!
//! ```text
//! U' = U + α1 / (1 + V^β1) - (1 + 0.03 U) + ξ/2
//! V' = V + α2 / (1 + U^β2) - (1 + 0.03 V) + ζ/2
//! ```
//!
//! from `U = V = 10`. Only `X = U_T + ε` is observed, with
//! `ε ~ N(μ, (μσ / U_T^γ)²)`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};
use crate::transport::Sample;

pub const DEFAULT_STEPS: usize = 300;
const START: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToggleParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub mu: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub steps: usize,
}

impl ToggleParams {
    /// Parameters from `(α1, α2, β1, β2, μ, σ, γ)` with the default horizon.
    pub fn from_theta(theta: &[f64]) -> Result<Self> {
        let &[alpha1, alpha2, beta1, beta2, mu, sigma, gamma] = theta else {
            return Err(Error::InvalidParams(format!("toggle switch needs 7 parameters, got {}", theta.len())));
        };
        let p = Self { alpha1, alpha2, beta1, beta2, mu, sigma, gamma, steps: DEFAULT_STEPS };
        p.validate()?;
        Ok(p)
    }

    /// The well-specified reference setting `(22, 12, 4, 4.5, 325, 0.25, 0.15)`.
    pub fn reference() -> Self {
        Self { alpha1: 22.0, alpha2: 12.0, beta1: 4.0, beta2: 4.5, mu: 325.0, sigma: 0.25, gamma: 0.15, steps: DEFAULT_STEPS }
    }

    pub fn theta(&self) -> [f64; 7] {
        [self.alpha1, self.alpha2, self.beta1, self.beta2, self.mu, self.sigma, self.gamma]
    }

    pub fn validate(&self) -> Result<()> {
        let all = self.theta();
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("toggle parameters must be finite".into()));
        }
        if self.beta1 < 0.0 || self.beta2 < 0.0 || self.sigma < 0.0 || self.gamma < 0.0 {
            return Err(Error::InvalidParams("toggle needs β1, β2, σ, γ >= 0".into()));
        }
        if self.steps == 0 {
            return Err(Error::InvalidParams("toggle needs at least one step".into()));
        }
        Ok(())
    }
}

/// Standard normal conditioned on `z >= a`.
fn normal_above(rng: &mut StreamRng, a: f64) -> f64 {
    if a <= 0.5 {
        loop {
            let z: f64 = rng.sample(StandardNormal);
            if z >= a {
                return z;
            }
        }
    }
    // Exponential proposal with the optimal rate (Robert, 1995).
    let lambda = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let z = a - (1.0 - rng.random::<f64>()).ln() / lambda;
        if rng.random::<f64>() <= (-0.5 * (z - lambda) * (z - lambda)).exp() {
            return z;
        }
    }
}

/// One cell's trajectory and observation.
fn simulate_cell(p: &ToggleParams, rng: &mut StreamRng) -> f64 {
    let (mut u, mut v) = (START, START);
    for _ in 0..p.steps {
        let u_det = u + p.alpha1 / (1.0 + v.powf(p.beta1)) - (1.0 + 0.03 * u);
        let v_det = v + p.alpha2 / (1.0 + u.powf(p.beta2)) - (1.0 + 0.03 * v);
        // Truncate each noise term exactly where the update would turn negative.
        u = (u_det + 0.5 * normal_above(rng, -2.0 * u_det)).max(0.0);
        v = (v_det + 0.5 * normal_above(rng, -2.0 * v_det)).max(0.0);
    }
    let scale = u.powf(p.gamma);
    let sd = if scale > 0.0 { (p.mu * p.sigma / scale).abs() } else { (p.mu * p.sigma).abs() };
    let z: f64 = rng.sample(StandardNormal);
    u + p.mu + sd * z
}

/// `n` i.i.d. observations; cell `i` uses stream `i` of `seed`.
pub fn toggle_switch(p: &ToggleParams, n: usize, seed: u64) -> Result<Sample> {
    p.validate()?;
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let xs: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| simulate_cell(p, &mut rng::stream(seed, i as u64)))
        .collect();
    Sample::from_values(xs)
}
