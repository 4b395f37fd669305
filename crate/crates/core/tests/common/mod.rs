//! Checks shared by the property suite and the acceptance run. Each returns
//! `Err` with a description of the first violated relation.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swinfer_core::*;

pub type Check = std::result::Result<(), String>;

/// Relative tolerance for relations that hold exactly in real arithmetic.
pub const REL_EPS: f64 = 1e-10;

pub fn ensure(ok: bool, what: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_EPS * (1.0 + a.abs().max(b.abs()))
}

/// `n` points in `d` dimensions from a Gaussian with the given mean and scale.
pub fn gaussian_sample(rng: &mut ChaCha8Rng, n: usize, d: usize, mean: f64, scale: f64) -> Sample {
    let data = (0..n * d).map(|_| mean + scale * rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
    Sample::from_flat(data, d).unwrap()
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symmetry, nonnegativity, `d(x, x) = 0` and the triangle inequality for the
/// sliced distance on a shared direction set.
pub fn metric_axioms(x: &Sample, y: &Sample, z: &Sample, to: TrimOrder, dirs: &DirectionSet) -> Check {
    let d = |a: &Sample, b: &Sample| sliced_wasserstein(a, b, to, dirs).unwrap();
    let (xy, yx, yz, xz, xx) = (d(x, y), d(y, x), d(y, z), d(x, z), d(x, x));
    ensure(xy >= 0.0 && yz >= 0.0 && xz >= 0.0, || format!("negative distance {xy} {yz} {xz}"))?;
    ensure(xx == 0.0, || format!("d(x, x) = {xx}"))?;
    ensure(close(xy, yx), || format!("asymmetric: {xy} vs {yx}"))?;
    ensure(xz <= (xy + yz) * (1.0 + REL_EPS) + REL_EPS, || format!("triangle: {xz} > {xy} + {yz}"))
}

/// `SW(a x + b, a y + b) = a SW(x, y)` for `a > 0`, for the estimate and for
/// both endpoints of the finite-sample interval.
pub fn affine_equivariance(x: &Sample, y: &Sample, a: f64, b: &[f64], to: TrimOrder, dirs: &DirectionSet) -> Check {
    let (ax, ay) = (x.map_affine(a, b).unwrap(), y.map_affine(a, b).unwrap());
    let base = sliced_wasserstein(x, y, to, dirs).unwrap();
    let moved = sliced_wasserstein(&ax, &ay, to, dirs).unwrap();
    ensure(close(moved, a * base), || format!("estimate: {moved} vs {a} * {base}"))?;
    let mut cfg = CiConfig::new(0.05, BandFamily::Dkw);
    cfg.override_a1 = true;
    let ci = ci_sliced(x, y, to, &cfg, dirs).unwrap();
    let moved = ci_sliced(&ax, &ay, to, &cfg, dirs).unwrap();
    ensure(close(moved.lower, a * ci.lower) && close(moved.upper, a * ci.upper), || {
        format!("interval: [{}, {}] vs {a} * [{}, {}]", moved.lower, moved.upper, ci.lower, ci.upper)
    })
}

/// A smaller `α` never yields a shorter finite-sample interval.
pub fn alpha_monotone(x: &Sample, y: &Sample, alphas: (f64, f64), band: BandFamily, to: TrimOrder, dirs: &DirectionSet) -> Check {
    let (small, large) = if alphas.0 <= alphas.1 { alphas } else { (alphas.1, alphas.0) };
    let ci = |alpha: f64| {
        let mut cfg = CiConfig::new(alpha, band);
        cfg.override_a1 = true;
        ci_sliced(x, y, to, &cfg, dirs).unwrap()
    };
    let (wide, narrow) = (ci(small), ci(large));
    ensure(wide.lower <= narrow.lower && wide.upper >= narrow.upper, || {
        format!("α={small}: [{}, {}] does not contain α={large}: [{}, {}]", wide.lower, wide.upper, narrow.lower, narrow.upper)
    })
}

/// The hybrid interval equals the finite-sample interval exactly when the
/// pretest fires (zero lower bound or a spacing at or below the tolerance),
/// and the bootstrap interval otherwise.
pub fn hybrid_soundness(x: &Sample, y: &Sample, to: TrimOrder, dirs: &DirectionSet, tol: f64) -> Check {
    let mut cfg = CiConfig::new(0.05, BandFamily::Dkw);
    cfg.override_a1 = true;
    let boot = BootstrapConfig::new(50, 9, 0.05);
    let pair = ProjectedPair::new(x, y, dirs).unwrap();
    let finite = pair.finite(to, &cfg).unwrap();
    let hybrid = pair.hybrid(to, &cfg, &boot, tol).unwrap();
    let pretest = finite.lower == 0.0 || min_spacing(x).unwrap() <= tol || min_spacing(y).unwrap() <= tol;
    let chosen = if pretest { finite } else { pair.bootstrap(to, &boot).unwrap() };
    let branch = if pretest { Branch::Finite } else { Branch::Bootstrap };
    ensure(hybrid.branch == Some(branch), || format!("branch {:?}, expected {branch:?}", hybrid.branch))?;
    ensure(hybrid.lower == chosen.lower && hybrid.upper == chosen.upper, || {
        format!("hybrid [{}, {}] differs from {branch:?} [{}, {}]", hybrid.lower, hybrid.upper, chosen.lower, chosen.upper)
    })
}

/// The same computations on pools of one and of `threads` workers give
/// bitwise-identical results.
pub fn thread_determinism(threads: usize) -> Check {
    let run = || {
        let model: Model = "m1".parse().unwrap();
        let (x, y) = sample_pair(&model, 150, 120, 4).unwrap();
        let dirs = sample_directions(2, 40, 6).unwrap();
        let to = TrimOrder::new(2.0, 0.1).unwrap();
        let sw = sliced_wasserstein(&x, &y, to, &dirs).unwrap();
        let boot = bootstrap_ci(&x, &y, to, &BootstrapConfig::new(64, 8, 0.05), &dirs).unwrap();
        let cfg = HarnessConfig { timing: false, num_dirs: 20, boot_reps: 32, to: TrimOrder::new(2.0, 0.25).unwrap(), seed: 13, ..Default::default() };
        let records = run_coverage(&model, &[80, 100], 3, &[Method::FiniteSample, Method::Hybrid], |_, _| Some(0.7), &cfg).unwrap();
        let csv: Vec<String> = records.iter().map(|r| format!("{r:?}")).collect();
        (sw.to_bits(), boot.lower.to_bits(), boot.upper.to_bits(), csv)
    };
    let pool = |k: usize| rayon::ThreadPoolBuilder::new().num_threads(k).build().unwrap();
    let one = pool(1).install(run);
    let many = pool(threads).install(run);
    ensure(one == many, || format!("results differ between 1 and {threads} threads"))
}
