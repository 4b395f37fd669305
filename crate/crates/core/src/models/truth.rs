//! Population sliced distances for pairs without a closed form.
//!
//! The cheapest accurate route is used for each pair: exact step walking for
//! atomic pairs, quantile quadrature over a periodic angle grid for Gaussian
//! mixtures, a reduction to one polar coordinate for tori, and a large-sample
//! plug-in estimate for everything else.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{m2_first_atom_weight, Model, Side};
use crate::error::{Error, Result};
use crate::functionals::DistSpec;
use crate::numeric::{gauss_legendre, integrate_pieces, pow_r, NeumaierSum};
use crate::rng;
use crate::transport::{gap_power_integral, project, sliced_wasserstein, wasserstein_pow_sorted, DirectionSet, TrimOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthKind {
    ClosedForm,
    /// Deterministic numerical integration; accurate to about `1e-8`.
    Quadrature,
    /// Plug-in estimate on large samples, possibly after a symmetry reduction.
    PlugIn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub value: f64,
    pub kind: TruthKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceOptions {
    /// Points per side for plug-in references.
    pub plugin_size: usize,
    /// Directions for the generic plug-in reference.
    pub plugin_dirs: usize,
    /// Gauss-Legendre nodes in the polar coordinate for tori.
    pub torus_nodes: usize,
    /// Angles on the half circle for planar pairs.
    pub planar_angles: usize,
    /// Elevation angles on the half circle for torus direction profiles.
    pub elevation_angles: usize,
    pub seed: u64,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        Self { plugin_size: 1_000_000, plugin_dirs: 2000, torus_nodes: 16, planar_angles: 256, elevation_angles: 128, seed: 0x7275_7468 }
    }
}

/// `SW_{r,δ}(P, Q)` for the pair as parameterised at nominal sizes `(n, m)`.
pub fn reference_sw(model: &Model, n: usize, m: usize, to: TrimOrder, opts: &ReferenceOptions) -> Result<Reference> {
    model.validate()?;
    match model.true_sw_oracle(to) {
        Ok(value) => return Ok(Reference { value, kind: TruthKind::ClosedForm }),
        Err(Error::NoOracle(_)) => {}
        Err(e) => return Err(e),
    }
    let quadrature = |value: f64| Ok(Reference { value, kind: TruthKind::Quadrature });
    match *model {
        Model::M2 => {
            let p2 = m2_first_atom_weight(n);
            let p = [(2.0, p2), (4.0, 1.0)];
            let q = [(2.0, 1.0 / 3.0), (5.0, 1.0)];
            let w = gap_power_integral(p.into_iter(), q.into_iter(), to.r(), to.delta()) / to.window();
            quadrature(w.powf(1.0 / to.r()))
        }
        Model::M4 => {
            let p = DistSpec::normal_mixture(&[(0.95, 0.0, 1.0), (0.05, 0.0, 0.1f64.sqrt())])?;
            let q = DistSpec::normal(0.0, 1.0)?;
            quadrature(quantile_gap_power(&p, &q, to, &[]).powf(1.0 / to.r()))
        }
        Model::M1 => quadrature(planar_average(to, &m1_table(to, opts.planar_angles)?)),
        Model::M5 => quadrature(planar_average(to, &m5_table(to, opts.planar_angles)?)),
        Model::M3 | Model::Torus { .. } => {
            let value = torus_reference(model, to, opts)?;
            Ok(Reference { value, kind: TruthKind::PlugIn })
        }
        _ => Ok(Reference { value: plugin_reference(model, n, m, to, opts)?, kind: TruthKind::PlugIn }),
    }
}

/// Plug-in sliced distance between `opts.plugin_size`-point samples on
/// `opts.plugin_dirs` directions (one direction in one dimension).
pub fn plugin_reference(model: &Model, n: usize, m: usize, to: TrimOrder, opts: &ReferenceOptions) -> Result<f64> {
    let size = opts.plugin_size;
    let x = model.draw(Side::P, size, n, m, rng::derive_seed(opts.seed, &[0]))?;
    let y = model.draw(Side::Q, size, n, m, rng::derive_seed(opts.seed, &[1]))?;
    let dirs = if model.dim() == 1 {
        DirectionSet::from_directions(&[vec![1.0]], 0)?
    } else {
        crate::transport::sample_directions(model.dim(), opts.plugin_dirs, rng::derive_seed(opts.seed, &[2]))?
    };
    sliced_wasserstein(&x, &y, to, &dirs)
}

/// `W_{r,δ}^r` between two continuous laws by integrating the quantile gap.
fn quantile_gap_power(p: &DistSpec, q: &DistSpec, to: TrimOrder, splits: &[f64]) -> f64 {
    let (lo, hi) = (to.delta(), 1.0 - to.delta());
    let f = |u: f64| pow_r((p.quantile(u) - q.quantile(u)).abs(), to.r());
    integrate_pieces(f, lo, hi, splits, 1e-12, 1e-10).value / to.window()
}

/// `W_{r,δ}^r` along `(cos φ, sin φ)` at `φ_k = kπ/K`, `k < K`.
fn planar_table<F>(angles: usize, w_pow: F) -> Result<Vec<f64>>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let k = angles.max(4);
    (0..k)
        .into_par_iter()
        .map(|i| {
            let phi = PI * i as f64 / k as f64;
            w_pow(phi.cos(), phi.sin())
        })
        .collect()
}

/// Mean of `W_{r,δ}^r` over directions `(cos φ, sin φ)`. The integrand has
/// period π, so the trapezoid rule on an even grid converges geometrically.
fn planar_average(to: TrimOrder, table: &[f64]) -> f64 {
    let total: NeumaierSum = table.iter().copied().collect();
    (total.value() / table.len() as f64).powf(1.0 / to.r())
}

fn m1_table(to: TrimOrder, angles: usize) -> Result<Vec<f64>> {
    planar_table(angles, |c, s| {
        let p = DistSpec::normal_mixture(&[(0.5, s - c, 1.0), (0.5, s + c, 1.0)])?;
        Ok(quantile_gap_power(&p, &DistSpec::normal(0.0, 1.0)?, to, &[]))
    })
}

fn m5_table(to: TrimOrder, angles: usize) -> Result<Vec<f64>> {
    planar_table(angles, |c, s| {
        let mu = 5.0 * (c + s);
        let p = DistSpec::normal_mixture(&[(0.55, -mu, 1.0), (0.45, mu, 1.0)])?;
        let q = DistSpec::normal_mixture(&[(0.5, -mu, 1.0), (0.5, mu, 1.0)])?;
        Ok(quantile_gap_power(&p, &q, to, &[0.45, 0.5, 0.55]))
    })
}

/// `W_{r,δ}^r(P_θ, Q_θ)` as a function of the direction, for pairs whose
/// integrand depends on a single angle. Used to score intervals against the
/// distance on the directions a replication actually drew.
#[derive(Debug, Clone, PartialEq)]
pub enum DirectionProfile {
    /// One-dimensional pairs.
    Constant(f64),
    /// Planar pairs, tabulated at `φ_k = kπ/K` for `θ = (cos φ, sin φ)`.
    Planar(Vec<f64>),
    /// Tori, tabulated at elevations `β_k = kπ/K` of `θ` above the `z = 0`
    /// plane; the table is symmetric, `β` and `π - β` giving the same value.
    Elevation(Vec<f64>),
}

impl DirectionProfile {
    /// `W_{r,δ}^r` along the unit vector `theta`.
    pub fn power_at(&self, theta: &[f64]) -> f64 {
        match self {
            DirectionProfile::Constant(v) => *v,
            DirectionProfile::Planar(table) => periodic_cubic(table, theta[1].atan2(theta[0]).rem_euclid(PI)),
            DirectionProfile::Elevation(table) => {
                let horizontal = theta[0].hypot(theta[1]);
                periodic_cubic(table, theta[2].abs().atan2(horizontal))
            }
        }
    }

    /// `((1/N) Σ_j W_{r,δ}^r(P_{θ_j}, Q_{θ_j}))^{1/r}` on the given directions.
    pub fn sliced(&self, dirs: &DirectionSet, to: TrimOrder) -> f64 {
        let total: NeumaierSum = dirs.iter().map(|theta| self.power_at(theta)).collect();
        (total.value() / dirs.len() as f64).powf(1.0 / to.r())
    }
}

/// Four-point Lagrange interpolation in a table of period π sampled at `kπ/K`.
fn periodic_cubic(table: &[f64], angle: f64) -> f64 {
    let k = table.len();
    let s = angle / PI * k as f64;
    let base = s.floor();
    let f = s - base;
    let at = |offset: i64| table[(base as i64 + offset).rem_euclid(k as i64) as usize];
    let (a, b, c, d) = (at(-1), at(0), at(1), at(2));
    -f * (f - 1.0) * (f - 2.0) / 6.0 * a + (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0 * b
        - (f + 1.0) * f * (f - 2.0) / 2.0 * c
        + (f + 1.0) * f * (f - 1.0) / 6.0 * d
}

/// The direction profile of `model` at nominal sizes `(n, m)`. Multivariate
/// pairs without a one-angle reduction have none.
pub fn direction_profile(model: &Model, n: usize, m: usize, to: TrimOrder, opts: &ReferenceOptions) -> Result<DirectionProfile> {
    model.validate()?;
    if model.dim() == 1 {
        let value = reference_sw(model, n, m, to, opts)?.value;
        return Ok(DirectionProfile::Constant(pow_r(value, to.r())));
    }
    match *model {
        Model::M1 => Ok(DirectionProfile::Planar(m1_table(to, opts.planar_angles)?)),
        Model::M5 => Ok(DirectionProfile::Planar(m5_table(to, opts.planar_angles)?)),
        Model::M3 | Model::Torus { .. } => Ok(DirectionProfile::Elevation(elevation_table(model, to, opts)?)),
        _ => Err(Error::NoOracle(format!("direction profile for {model}"))),
    }
}

/// Plug-in `W_{r,δ}^r` of a torus pair at elevations `kπ/K`; only
/// `β <= π/2` is computed, the rest follows by reflection.
fn elevation_table(model: &Model, to: TrimOrder, opts: &ReferenceOptions) -> Result<Vec<f64>> {
    let k = (opts.elevation_angles.max(4) + 1) / 2 * 2;
    let size = opts.plugin_size;
    let x = model.draw(Side::P, size, size, size, rng::derive_seed(opts.seed, &[0]))?;
    let y = model.draw(Side::Q, size, size, size, rng::derive_seed(opts.seed, &[1]))?;
    let half: Vec<f64> = (0..=k / 2)
        .into_par_iter()
        .map(|i| {
            let beta = PI * i as f64 / k as f64;
            let theta = [beta.cos(), 0.0, beta.sin()];
            Ok(wasserstein_pow_sorted(project(&x, &theta)?.values(), project(&y, &theta)?.values(), to))
        })
        .collect::<Result<_>>()?;
    Ok((0..k).map(|i| half[i.min(k - i)]).collect())
}

/// Both tori are invariant under rotations about and reflection through the
/// `z = 0` plane, so `W_{r,δ}^r` along `θ` depends only on `t = |θ_z|`, which is
/// uniform on `[0, 1]` for a uniform direction on the sphere. The integral
/// over `t` is done by Gauss-Legendre with a plug-in estimate at each node.
fn torus_reference(model: &Model, to: TrimOrder, opts: &ReferenceOptions) -> Result<f64> {
    let size = opts.plugin_size;
    let x = model.draw(Side::P, size, size, size, rng::derive_seed(opts.seed, &[0]))?;
    let y = model.draw(Side::Q, size, size, size, rng::derive_seed(opts.seed, &[1]))?;
    let (nodes, weights) = gauss_legendre(opts.torus_nodes.max(1));
    let vals: Vec<f64> = nodes
        .par_iter()
        .zip(weights.par_iter())
        .map(|(&z, &w)| {
            let t = 0.5 * (z + 1.0);
            let theta = [(1.0 - t * t).sqrt(), 0.0, t];
            let px = project(&x, &theta)?;
            let py = project(&y, &theta)?;
            Ok(0.5 * w * wasserstein_pow_sorted(px.values(), py.values(), to))
        })
        .collect::<Result<_>>()?;
    let total: NeumaierSum = vals.into_iter().collect();
    Ok(total.value().powf(1.0 / to.r()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ReferenceOptions {
        ReferenceOptions { plugin_size: 100_000, plugin_dirs: 200, torus_nodes: 8, planar_angles: 64, ..Default::default() }
    }

    #[test]
    fn closed_forms_are_preferred() {
        let to = TrimOrder::new(2.0, 0.1).unwrap();
        let r = reference_sw(&Model::M6i { gap: 0.1 }, 10, 10, to, &small()).unwrap();
        assert_eq!(r.kind, TruthKind::ClosedForm);
    }

    #[test]
    fn m2_reference_by_hand() {
        // On the window [0.1, 0.9]: gap 3 on (1/3, p2], gap 1 on (p2, 0.9].
        let n = 600;
        let to = TrimOrder::new(2.0, 0.1).unwrap();
        let p2 = m2_first_atom_weight(n);
        let hand = ((9.0 * (p2 - 1.0 / 3.0) + (0.9 - p2)) / 0.8).sqrt();
        let r = reference_sw(&Model::M2, n, n, to, &small()).unwrap();
        assert!((r.value - hand).abs() < 1e-14);
    }

    #[test]
    fn m4_reference_agrees_with_plug_in() {
        let to = TrimOrder::new(2.0, 0.1).unwrap();
        let exact = reference_sw(&Model::M4, 600, 600, to, &small()).unwrap();
        assert_eq!(exact.kind, TruthKind::Quadrature);
        let opts = ReferenceOptions { plugin_size: 1_000_000, ..small() };
        let plug = plugin_reference(&Model::M4, 600, 600, to, &opts).unwrap();
        assert!((exact.value - plug).abs() < 2e-3, "{} vs {plug}", exact.value);
    }

    #[test]
    fn planar_references_agree_with_plug_in() {
        let to = TrimOrder::new(2.0, 0.1).unwrap();
        for model in [Model::M1, Model::M5] {
            let exact = reference_sw(&model, 600, 600, to, &ReferenceOptions::default()).unwrap().value;
            let opts = ReferenceOptions { plugin_size: 200_000, plugin_dirs: 400, ..small() };
            let plug = plugin_reference(&model, 600, 600, to, &opts).unwrap();
            assert!((exact - plug).abs() < 0.02 * (1.0 + exact), "{model}: {exact} vs {plug}");
        }
    }

    #[test]
    fn torus_reduction_agrees_with_plug_in() {
        let to = TrimOrder::new(2.0, 0.1).unwrap();
        let reduced = reference_sw(&Model::M3, 600, 600, to, &small()).unwrap().value;
        let opts = ReferenceOptions { plugin_dirs: 400, ..small() };
        let plug = plugin_reference(&Model::M3, 600, 600, to, &opts).unwrap();
        assert!((reduced - plug).abs() < 0.03 * (1.0 + reduced), "{reduced} vs {plug}");
    }

    #[test]
    fn planar_profile_interpolates_the_quadrature() {
        let to = TrimOrder::new(2.0, 0.1).unwrap();
        let profile = direction_profile(&Model::M1, 600, 600, to, &ReferenceOptions::default()).unwrap();
        for phi in [0.0f64, 0.3, 1.234, 2.9, -0.7, 4.0] {
            let (c, s) = (phi.cos(), phi.sin());
            let p = DistSpec::normal_mixture(&[(0.5, s - c, 1.0), (0.5, s + c, 1.0)]).unwrap();
            let direct = quantile_gap_power(&p, &DistSpec::normal(0.0, 1.0).unwrap(), to, &[]);
            let got = profile.power_at(&[c, s]);
            assert!((got - direct).abs() < 1e-6 * (1.0 + direct), "φ={phi}: {got} vs {direct}");
        }
    }

    #[test]
    fn profiles_average_to_the_reference() {
        let to = TrimOrder::new(2.0, 0.1).unwrap();
        let opts = small();
        for model in [Model::M5, Model::M3] {
            let reference = reference_sw(&model, 600, 600, to, &opts).unwrap().value;
            let profile = direction_profile(&model, 600, 600, to, &opts).unwrap();
            let dirs = crate::transport::sample_directions(model.dim(), 50_000, 3).unwrap();
            let avg = profile.sliced(&dirs, to);
            assert!((avg - reference).abs() < 0.01 * reference, "{model}: {avg} vs {reference}");
        }
    }

    #[test]
    fn elevation_profile_respects_the_torus_symmetries() {
        let to = TrimOrder::new(2.0, 0.1).unwrap();
        let profile = direction_profile(&Model::M3, 600, 600, to, &small()).unwrap();
        let (b, psi) = (0.4f64, 1.1f64);
        let theta = [b.cos() * psi.cos(), b.cos() * psi.sin(), b.sin()];
        let v = profile.power_at(&theta);
        for other in [[b.cos(), 0.0, b.sin()], [-theta[0], -theta[1], -theta[2]], [theta[0], theta[1], -theta[2]]] {
            assert!((profile.power_at(&other) - v).abs() < 1e-12 * v);
        }
        assert!(profile.power_at(&[0.0, 0.0, 1.0]) < profile.power_at(&[1.0, 0.0, 0.0]));
    }

    #[test]
    fn one_dimensional_profiles_are_constant() {
        let to = TrimOrder::new(2.0, 0.1).unwrap();
        let profile = direction_profile(&Model::M2, 600, 600, to, &small()).unwrap();
        let value = reference_sw(&Model::M2, 600, 600, to, &small()).unwrap().value;
        assert_eq!(profile, DirectionProfile::Constant(value * value));
        let twopoint = Model::Construction(crate::models::Construction { dim: 3, ..crate::models::Construction::new(crate::models::ConstructionKind::TwoPoint) });
        assert!(matches!(direction_profile(&twopoint, 10, 10, to, &small()), Err(Error::NoOracle(_))));
    }
}
