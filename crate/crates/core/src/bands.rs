//! Uniform quantile bands `(γ, η)` built from the DKW and relative VC
//! inequalities. With probability at least `1 - α/2`,
//! `F_n^{-1}(γ(u)) <= F^{-1}(u) <= F_n^{-1}(η(u))` for all `u` in the trimmed
//! window.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandFamily {
    Dkw,
    #[serde(rename = "relvc")]
    RelVc,
    /// `γ = η = id`. Not a confidence band; collapses every interval to the
    /// plug-in estimate and is used to check integration paths.
    Identity,
}

impl BandFamily {
    pub fn name(self) -> &'static str {
        match self {
            BandFamily::Dkw => "dkw",
            BandFamily::RelVc => "relvc",
            BandFamily::Identity => "identity",
        }
    }
}

impl std::str::FromStr for BandFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dkw" => Ok(BandFamily::Dkw),
            "relvc" => Ok(BandFamily::RelVc),
            "identity" => Ok(BandFamily::Identity),
            other => Err(Error::InvalidParams(format!("unknown band family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandSpec {
    pub family: BandFamily,
    pub alpha: f64,
    pub n: usize,
}

impl BandSpec {
    pub fn new(family: BandFamily, alpha: f64, n: usize) -> Result<Self> {
        check_alpha(alpha)?;
        if n == 0 {
            return Err(Error::EmptySample);
        }
        Ok(Self { family, alpha, n })
    }

    /// Resolves the family constant once so the band can be evaluated cheaply.
    pub fn resolve(&self) -> Result<Band> {
        match self.family {
            BandFamily::Dkw => Ok(Band::Shift(beta_dkw(self)?)),
            BandFamily::RelVc => {
                let nu = nu_relvc(self)?;
                if nu >= 1.0 {
                    return Err(Error::NuTooLarge { nu });
                }
                Ok(Band::RelVc(nu))
            }
            BandFamily::Identity => Ok(Band::Identity),
        }
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// DKW half-width `β_n = sqrt(log(4/α) / (2n))`.
pub fn beta_dkw(spec: &BandSpec) -> Result<f64> {
    if spec.family != BandFamily::Dkw {
        return Err(Error::WrongFamily { expected: "dkw" });
    }
    Ok(((4.0 / spec.alpha).ln() / (2.0 * spec.n as f64)).sqrt())
}

/// `(u - β_n, u + β_n)`; values may leave `[0, 1]`.
pub fn band_dkw(spec: &BandSpec, u: f64) -> Result<(f64, f64)> {
    let beta = beta_dkw(spec)?;
    Ok((u - beta, u + beta))
}

/// Relative VC width `ν = sqrt((16/n) (log(16/α) + log(2n + 1)))`.
pub fn nu_relvc(spec: &BandSpec) -> Result<f64> {
    if spec.family != BandFamily::RelVc {
        return Err(Error::WrongFamily { expected: "relvc" });
    }
    Ok(nu_value(spec.alpha, spec.n as f64))
}

fn nu_value(alpha: f64, n: f64) -> f64 {
    (16.0 / n * ((16.0 / alpha).ln() + (2.0 * n + 1.0).ln())).sqrt()
}

/// Relative VC band. `η` keeps `4u(1+u)` under the root as in the
/// published inversion; it differs from the `4u(1-u)` of `γ`.
pub fn band_relvc(spec: &BandSpec, u: f64) -> Result<(f64, f64)> {
    let nu = nu_relvc(spec)?;
    if nu >= 1.0 {
        return Err(Error::NuTooLarge { nu });
    }
    Ok((relvc_gamma(nu, u), relvc_eta(nu, u)))
}

fn relvc_gamma(nu: f64, u: f64) -> f64 {
    let v = nu * nu;
    (2.0 * u + v - nu * (v + 4.0 * u * (1.0 - u)).max(0.0).sqrt()) / (2.0 * (1.0 + v))
}

fn relvc_eta(nu: f64, u: f64) -> f64 {
    let v = nu * nu;
    (2.0 * u + v + nu * (v + 4.0 * u * (1.0 + u)).max(0.0).sqrt()) / (2.0 * (1.0 - v))
}

/// A band with its family constant resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Band {
    Shift(f64),
    RelVc(f64),
    Identity,
}

impl Band {
    #[inline]
    pub fn gamma(&self, u: f64) -> f64 {
        match *self {
            Band::Shift(b) => u - b,
            Band::RelVc(nu) => relvc_gamma(nu, u),
            Band::Identity => u,
        }
    }

    #[inline]
    pub fn eta(&self, u: f64) -> f64 {
        match *self {
            Band::Shift(b) => u + b,
            Band::RelVc(nu) => relvc_eta(nu, u),
            Band::Identity => u,
        }
    }

    /// The `u >= 0` solving `γ(u) = t`, if one exists.
    ///
    /// `γ` is the lower root of `(x - u)^2 = ν² x(1 - x)`, which inverts to
    /// `u = t + ν sqrt(t(1 - t))`.
    pub fn gamma_inverse(&self, t: f64) -> Option<f64> {
        match *self {
            Band::Shift(b) => Some(t + b),
            Band::RelVc(nu) => (0.0..=1.0)
                .contains(&t)
                .then(|| t + nu * (t * (1.0 - t)).sqrt()),
            Band::Identity => Some(t),
        }
    }

    /// The `u >= 0` solving `η(u) = t`, if one exists.
    ///
    /// `η` is the upper root of `(x - u)^2 = ν² x(1 + x)`; on its range
    /// `t >= η(0)` this inverts to `u = t - ν sqrt(t(1 + t))`.
    pub fn eta_inverse(&self, t: f64) -> Option<f64> {
        match *self {
            Band::Shift(b) => Some(t - b),
            Band::RelVc(nu) => (t >= relvc_eta(nu, 0.0)).then(|| (t - nu * (t * (1.0 + t)).sqrt()).max(0.0)),
            Band::Identity => Some(t),
        }
    }

    /// Smallest trimming constant for which `γ(δ) > 0` and `η(1 - δ) < 1`.
    pub fn min_delta(&self) -> f64 {
        match *self {
            Band::Shift(b) => b,
            // γ(δ) > 0 for every δ > 0; η(1 - δ) < 1 iff 1 - δ < η^{-1}(1) = 1 - ν√2.
            Band::RelVc(nu) => nu * std::f64::consts::SQRT_2,
            Band::Identity => 0.0,
        }
    }

    /// Condition A1 at trimming constant `delta`.
    pub fn satisfies_a1(&self, delta: f64) -> bool {
        match self {
            Band::Identity => true,
            _ => self.gamma(delta) > 0.0 && self.eta(1.0 - delta) < 1.0,
        }
    }
}

/// Condition A1: the band at sample size `n ∧ m` satisfies
/// `γ(δ) > 0` and `η(1 - δ) < 1`. A relative VC band with `ν >= 1` fails.
pub fn check_a1(delta: f64, alpha: f64, n: usize, m: usize, family: BandFamily) -> bool {
    match BandSpec::new(family, alpha, n.min(m)).and_then(|s| s.resolve()) {
        Ok(band) => band.satisfies_a1(delta),
        Err(_) => false,
    }
}

/// Like [`check_a1`] but reports the failure, including the smallest
/// trimming constant that would pass.
pub fn require_a1(delta: f64, alpha: f64, n: usize, m: usize, family: BandFamily) -> Result<()> {
    let k = n.min(m);
    let band = BandSpec::new(family, alpha, k)?.resolve()?;
    if band.satisfies_a1(delta) {
        Ok(())
    } else {
        Err(Error::A1Violated { delta, alpha, n: k, min_delta: band.min_delta() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dkw(alpha: f64, n: usize) -> BandSpec {
        BandSpec::new(BandFamily::Dkw, alpha, n).unwrap()
    }

    fn relvc(alpha: f64, n: usize) -> BandSpec {
        BandSpec::new(BandFamily::RelVc, alpha, n).unwrap()
    }

    #[test]
    fn beta_examples() {
        let a = 4.0 * (-2.0f64).exp();
        assert!((beta_dkw(&dkw(a, 100)).unwrap() - 0.1).abs() < 1e-15);
        // sqrt(ln 80 / 2000), evaluated independently in high precision.
        assert!((beta_dkw(&dkw(0.05, 1000)).unwrap() - 0.046_807_9).abs() < 1e-6);
        let ratio = beta_dkw(&dkw(0.05, 400)).unwrap() / beta_dkw(&dkw(0.05, 100)).unwrap();
        assert!((ratio - 0.5).abs() < 1e-15);
        assert_eq!(beta_dkw(&relvc(0.05, 100)), Err(Error::WrongFamily { expected: "dkw" }));
    }

    #[test]
    fn dkw_band_examples() {
        let a = 4.0 * (-2.0f64).exp();
        let (g, e) = band_dkw(&dkw(a, 100), 0.5).unwrap();
        assert!((g - 0.4).abs() < 1e-15 && (e - 0.6).abs() < 1e-15);
        let b = beta_dkw(&dkw(0.05, 50)).unwrap();
        assert_eq!(band_dkw(&dkw(0.05, 50), 0.0).unwrap(), (-b, b));
        assert!(beta_dkw(&dkw(0.999_999, 50)).unwrap() > 0.0);
    }

    #[test]
    fn nu_examples() {
        // sqrt(0.016 (ln 320 + ln 2001)).
        assert!((nu_relvc(&relvc(0.05, 1000)).unwrap() - 0.462_51).abs() < 1e-5);
        // α = 16/e and 2n + 1 = e make both logarithms equal to one.
        let e = std::f64::consts::E;
        let n = (e - 1.0) / 2.0;
        assert!((nu_value(16.0 / e, n) - (32.0 / n).sqrt()).abs() < 1e-12);
        for n in [8usize, 20, 100, 1000] {
            assert!(nu_relvc(&relvc(0.05, 4 * n)).unwrap() < nu_relvc(&relvc(0.05, n)).unwrap());
        }
    }

    #[test]
    fn relvc_band_examples() {
        let s = relvc(0.05, 10);
        match band_relvc(&s, 0.5) {
            // sqrt(1.6 ln 6720), evaluated independently.
            Err(Error::NuTooLarge { nu }) => assert!((nu - 3.755_07).abs() < 1e-5),
            other => panic!("expected NuTooLarge, got {other:?}"),
        }
        let s = relvc(0.05, 5000);
        assert_eq!(band_relvc(&s, 0.0).unwrap().0, 0.0);
        for u in [0.1, 0.5, 0.9] {
            let (g, e) = (relvc_gamma(1e-9, u), relvc_eta(1e-9, u));
            assert!((g - u).abs() < 1e-8 && (e - u).abs() < 1e-8);
        }
    }

    #[test]
    fn a1_examples() {
        assert!(check_a1(0.1, 0.05, 600, 600, BandFamily::Dkw));
        assert!(!check_a1(0.01, 0.05, 100, 100, BandFamily::Dkw));
        assert!(check_a1(0.499, 0.05, 100_000_000, 100_000_000, BandFamily::Dkw));
        match require_a1(0.01, 0.05, 100, 400, BandFamily::Dkw) {
            Err(Error::A1Violated { n, min_delta, .. }) => {
                assert_eq!(n, 100);
                assert!((min_delta - 0.148).abs() < 1e-3);
            }
            other => panic!("{other:?}"),
        }
        assert!(!check_a1(0.1, 0.05, 10, 10, BandFamily::RelVc));
    }

    #[test]
    fn relvc_min_delta_is_the_a1_threshold() {
        let band = relvc(0.05, 200_000).resolve().unwrap();
        let d = band.min_delta();
        assert!(d < 0.5);
        assert!(!band.satisfies_a1(d * (1.0 - 1e-9)));
        assert!(band.satisfies_a1(d * (1.0 + 1e-9)));
    }

    #[test]
    fn inverses_round_trip() {
        for band in [dkw(0.05, 300).resolve().unwrap(), relvc(0.05, 3000).resolve().unwrap()] {
            for k in 1..50 {
                let t = k as f64 / 50.0;
                if let Some(u) = band.gamma_inverse(t) {
                    assert!((band.gamma(u) - t).abs() < 1e-12, "{band:?} γ {t}");
                }
                if let Some(u) = band.eta_inverse(t) {
                    assert!((band.eta(u) - t).abs() < 1e-12, "{band:?} η {t}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn band_brackets_identity_and_is_monotone(u in 0.0f64..1.0, du in 1e-6f64..0.5,
                                                  n in 200usize..100_000, alpha in 0.001f64..0.5) {
            let v = (u + du).min(1.0);
            for spec in [dkw(alpha, n), relvc(alpha, n)] {
                let Ok(band) = spec.resolve() else { continue };
                let (g, e) = (band.gamma(u), band.eta(u));
                prop_assert!(g <= u && u <= e);
                if v > u {
                    prop_assert!(band.gamma(v) > g);
                    prop_assert!(band.eta(v) > e);
                }
            }
        }

        #[test]
        fn band_narrows_as_alpha_grows(u in 0.0f64..1.0, n in 500usize..100_000,
                                       a1 in 0.001f64..0.2, da in 0.01f64..0.5) {
            let a2 = (a1 + da).min(0.99);
            for fam in [BandFamily::Dkw, BandFamily::RelVc] {
                let (Ok(b1), Ok(b2)) = (BandSpec::new(fam, a1, n).unwrap().resolve(),
                                        BandSpec::new(fam, a2, n).unwrap().resolve()) else { continue };
                prop_assert!(b1.gamma(u) <= b2.gamma(u));
                prop_assert!(b1.eta(u) >= b2.eta(u));
            }
        }
    }
}
