//! Uniform distribution on the surface of a torus in `R^3`.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng;
use crate::transport::Sample;

const TAU: f64 = std::f64::consts::TAU;

/// Draws `n` points uniformly on the torus with tube radius `r` and centre
/// radius `big_r`, parameterised as
/// `((R + r cos θ) cos ψ, (R + r cos θ) sin ψ, r sin θ)`.
///
/// The surface element is proportional to `R + r cos θ`, so `θ` is drawn by
/// rejection against a uniform envelope with acceptance probability
/// `(R + r cos θ) / (R + r)`; `ψ` is uniform.
pub fn sample_torus(r: f64, big_r: f64, n: usize, seed: u64) -> Result<Sample> {
    if !(r > 0.0 && r < big_r) || !big_r.is_finite() {
        return Err(Error::InvalidParams(format!("torus needs 0 < r < R, got r={r}, R={big_r}")));
    }
    if n == 0 {
        return Err(Error::EmptySample);
    }
    // Points are generated in fixed-size blocks, each from its own stream.
    const BLOCK: usize = 4096;
    let blocks: Vec<Vec<f64>> = (0..n.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::stream(seed, b as u64);
            let count = BLOCK.min(n - b * BLOCK);
            let mut out = Vec::with_capacity(3 * count);
            for _ in 0..count {
                let theta = loop {
                    let t = rng.random::<f64>() * TAU;
                    if rng.random::<f64>() * (big_r + r) <= big_r + r * t.cos() {
                        break t;
                    }
                };
                let psi = rng.random::<f64>() * TAU;
                let ring = big_r + r * theta.cos();
                out.extend([ring * psi.cos(), ring * psi.sin(), r * theta.sin()]);
            }
            out
        })
        .collect();
    Sample::from_flat(blocks.concat(), 3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_lie_on_the_surface() {
        let s = sample_torus(0.5, 1.0, 20_000, 3).unwrap();
        for p in s.points() {
            let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
            let resid = (rho - 1.0).powi(2) + p[2] * p[2] - 0.25;
            assert!(resid.abs() < 1e-9, "{resid}");
        }
    }

    #[test]
    fn rejects_bad_radii() {
        assert!(matches!(sample_torus(1.0, 1.0, 10, 0), Err(Error::InvalidParams(_))));
        assert!(matches!(sample_torus(2.0, 1.0, 10, 0), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn azimuth_is_uniform() {
        let s = sample_torus(0.5, 5.0, 100_000, 8).unwrap();
        let bins = 20;
        let mut counts = vec![0.0; bins];
        for p in s.points() {
            let psi = p[1].atan2(p[0]).rem_euclid(TAU);
            counts[((psi / TAU * bins as f64) as usize).min(bins - 1)] += 1.0;
        }
        let expected = s.n() as f64 / bins as f64;
        let chi2: f64 = counts.iter().map(|c| (c - expected).powi(2) / expected).sum();
        // 99th percentile of chi-square with 19 degrees of freedom.
        assert!(chi2 < 36.19, "chi2 = {chi2}");
    }

    #[test]
    fn tube_angle_follows_surface_weight() {
        // P(cos θ > 0) = ∫_{-π/2}^{π/2} (R + r cos θ) dθ / (2π R) = 1/2 + r/(π R).
        let (r, big_r) = (0.5, 1.0);
        let s = sample_torus(r, big_r, 200_000, 9).unwrap();
        let outer = s.points().filter(|p| (p[0] * p[0] + p[1] * p[1]).sqrt() > big_r).count() as f64 / s.n() as f64;
        let expected = 0.5 + r / (std::f64::consts::PI * big_r);
        let se = (expected * (1.0 - expected) / s.n() as f64).sqrt();
        assert!((outer - expected).abs() < 4.0 * se);
    }
}
