//! Simulation harness for coverage, length, runtime and rate studies.
//!
//! Every replication draws its samples, directions and bootstrap weights from
//! seeds derived from `(master seed, model, size, replication)`, so records do
//! not depend on how replications are spread over threads.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bands::BandFamily;
use crate::error::{Error, Result};
use crate::intervals::{Branch, CiConfig, Interval, Method};
use crate::models::{sample_pair, Model};
use crate::resampling::{as_hybrid, BootstrapConfig, ProjectedPair};
use crate::rng;
use crate::transport::{sample_directions, DirectionSet, TrimOrder};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub to: TrimOrder,
    pub alpha: f64,
    pub band: BandFamily,
    /// Directions per replication for multivariate models; one-dimensional
    /// models use the single direction `+1`.
    pub num_dirs: usize,
    pub boot_reps: usize,
    /// Minimal spacing at or below which the hybrid rule treats a sample as atomic.
    pub spacing_tol: f64,
    pub seed: u64,
    /// Record wall-clock times. Off makes outputs byte-reproducible.
    pub timing: bool,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            to: TrimOrder::new(2.0, 0.1).expect("valid order"),
            alpha: 0.05,
            band: BandFamily::Dkw,
            num_dirs: 500,
            boot_reps: 1000,
            spacing_tol: 0.0,
            seed: 0,
            timing: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub model: String,
    pub method: Method,
    pub n: usize,
    pub m: usize,
    pub rep: usize,
    pub seed: u64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub length: f64,
    pub truth: Option<f64>,
    pub covered: Option<bool>,
    pub branch: Option<Branch>,
    pub runtime_s: Option<f64>,
}

/// Seed of one replication.
pub fn replication_seed(master: u64, model: &Model, n: usize, rep: usize) -> u64 {
    rng::derive_seed(master, &[rng::label(&model.to_string()), n as u64, rep as u64])
}

fn directions(model: &Model, count: usize, seed: u64) -> Result<DirectionSet> {
    if model.dim() == 1 {
        DirectionSet::from_directions(&[vec![1.0]], 0)
    } else {
        sample_directions(model.dim(), count, rng::derive_seed(seed, &[rng::label("directions")]))
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64()))
}

/// One replication at `n = m`, producing one record per requested method.
/// `truth` receives the replication's directions, so it may return either
/// the population distance or its value on those directions.
/// The hybrid reuses the finite-sample and bootstrap intervals when those are
/// also requested; its runtime is the time of the parts it needed.
pub fn run_replication(
    model: &Model,
    n: usize,
    rep: usize,
    methods: &[Method],
    truth: impl FnOnce(&DirectionSet) -> Option<f64>,
    cfg: &HarnessConfig,
) -> Result<Vec<ExperimentRecord>> {
    let seed = replication_seed(cfg.seed, model, n, rep);
    let (x, y) = sample_pair(model, n, n, seed)?;
    let dirs = directions(model, cfg.num_dirs, seed)?;
    let truth = truth(&dirs);
    let (pair, setup_s) = timed(|| ProjectedPair::new(&x, &y, &dirs))?;
    let ci = CiConfig::new(cfg.alpha, cfg.band);
    let boot = BootstrapConfig::new(cfg.boot_reps, rng::derive_seed(seed, &[rng::label("bootstrap")]), cfg.alpha);

    let wants = |m: Method| methods.contains(&m);
    let need_finite = wants(Method::FiniteSample) || wants(Method::Hybrid);
    let finite = if need_finite { Some(timed(|| pair.finite(cfg.to, &ci))?) } else { None };
    let branch = finite.as_ref().map(|(f, _)| pair.hybrid_branch(f, cfg.spacing_tol));
    let need_boot = wants(Method::Bootstrap) || branch == Some(Branch::Bootstrap) && wants(Method::Hybrid);
    let bootstrap = if need_boot { Some(timed(|| pair.bootstrap(cfg.to, &boot))?) } else { None };

    let estimate = pair.estimate(cfg.to);
    let record = |iv: &Interval, secs: f64| ExperimentRecord {
        model: model.to_string(),
        method: iv.method,
        n,
        m: n,
        rep,
        seed,
        estimate,
        lower: iv.lower,
        upper: iv.upper,
        length: iv.length(),
        truth,
        covered: truth.map(|t| iv.contains(t)),
        branch: iv.branch,
        runtime_s: cfg.timing.then_some(setup_s + secs),
    };
    let mut out = Vec::with_capacity(methods.len());
    for &method in methods {
        let rec = match method {
            Method::FiniteSample => {
                let (iv, s) = finite.as_ref().expect("finite interval computed");
                record(iv, *s)
            }
            Method::Bootstrap => {
                let (iv, s) = bootstrap.as_ref().expect("bootstrap interval computed");
                record(iv, *s)
            }
            Method::Hybrid => {
                let (fin, fs) = finite.as_ref().expect("finite interval computed");
                match branch.expect("branch computed") {
                    Branch::Finite => record(&as_hybrid(fin, Branch::Finite, &boot), *fs),
                    Branch::Bootstrap => {
                        let (b, bs) = bootstrap.as_ref().expect("bootstrap interval computed");
                        record(&as_hybrid(b, Branch::Bootstrap, &boot), fs + bs)
                    }
                }
            }
        };
        out.push(rec);
    }
    Ok(out)
}

/// All `(size, replication)` cells for one model. `truth(n, dirs)` supplies
/// the distance that replication's intervals are scored against, when known.
pub fn run_coverage<T>(
    model: &Model,
    sizes: &[usize],
    reps: usize,
    methods: &[Method],
    truth: T,
    cfg: &HarnessConfig,
) -> Result<Vec<ExperimentRecord>>
where
    T: Fn(usize, &DirectionSet) -> Option<f64> + Sync,
{
    let cells: Vec<(usize, usize)> = sizes.iter().flat_map(|&n| (0..reps).map(move |rep| (n, rep))).collect();
    let nested: Vec<Vec<ExperimentRecord>> = cells
        .par_iter()
        .map(|&(n, rep)| run_replication(model, n, rep, methods, |dirs| truth(n, dirs), cfg))
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub model: String,
    pub method: Method,
    pub n: usize,
    pub reps: usize,
    pub coverage: Option<f64>,
    pub mean_length: f64,
    pub mean_runtime_s: Option<f64>,
    /// Share of hybrid intervals that took the finite-sample branch.
    pub finite_branch_share: Option<f64>,
}

/// Per `(model, method, n)` averages, in order of first appearance.
pub fn summarize(records: &[ExperimentRecord]) -> Vec<CoverageSummary> {
    let mut keys: Vec<(String, Method, usize)> = Vec::new();
    for r in records {
        let key = (r.model.clone(), r.method, r.n);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(model, method, n)| {
            let group: Vec<&ExperimentRecord> =
                records.iter().filter(|r| r.model == model && r.method == method && r.n == n).collect();
            let k = group.len() as f64;
            let mean = |f: &dyn Fn(&ExperimentRecord) -> Option<f64>| -> Option<f64> {
                let vals: Option<Vec<f64>> = group.iter().map(|r| f(r)).collect();
                vals.map(|v| v.iter().sum::<f64>() / k)
            };
            CoverageSummary {
                model,
                method,
                n,
                reps: group.len(),
                coverage: mean(&|r| r.covered.map(|c| c as u8 as f64)),
                mean_length: mean(&|r| Some(r.length)).unwrap_or(f64::NAN),
                mean_runtime_s: mean(&|r| r.runtime_s),
                finite_branch_share: (method == Method::Hybrid)
                    .then(|| mean(&|r| r.branch.map(|b| (b == Branch::Finite) as u8 as f64)))
                    .flatten(),
            }
        })
        .collect()
}

/// `count` sizes spaced geometrically from `lo` to `hi`, rounded and deduplicated.
pub fn geometric_sizes(lo: usize, hi: usize, count: usize) -> Result<Vec<usize>> {
    if lo == 0 || hi < lo || count == 0 {
        return Err(Error::InvalidParams(format!("bad geometric grid {lo}:{hi}:{count}")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let ratio = (hi as f64 / lo as f64).ln() / (count - 1) as f64;
    let mut sizes: Vec<usize> = (0..count).map(|i| (lo as f64 * (ratio * i as f64).exp()).round() as usize).collect();
    sizes.dedup();
    Ok(sizes)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), found: ys.len() });
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidParams("log-log fit needs positive finite values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidParams("slope needs at least two distinct sizes".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub model: String,
    pub r: f64,
    pub gap: f64,
    pub sizes: Vec<usize>,
    pub mean_lengths: Vec<f64>,
    pub slope: f64,
}

/// Mean finite-sample interval length over `reps` replications at each size,
/// and the fitted log-log slope. `model` is evaluated at order `cfg.to`.
pub fn run_scaling(model: &Model, sizes: &[usize], reps: usize, cfg: &HarnessConfig) -> Result<(Vec<ExperimentRecord>, ScalingFit)> {
    let distinct = {
        let mut s = sizes.to_vec();
        s.sort_unstable();
        s.dedup();
        s.len()
    };
    if distinct < 2 {
        return Err(Error::InvalidParams("scaling needs at least two distinct sizes".into()));
    }
    if reps == 0 {
        return Err(Error::InvalidParams("scaling needs at least one replication".into()));
    }
    let truth = model.true_sw_oracle(cfg.to).ok();
    let records = run_coverage(model, sizes, reps, &[Method::FiniteSample], |_, _| truth, cfg)?;
    let mean_lengths: Vec<f64> = sizes
        .iter()
        .map(|&n| {
            let lens: Vec<f64> = records.iter().filter(|r| r.n == n).map(|r| r.length).collect();
            lens.iter().sum::<f64>() / lens.len() as f64
        })
        .collect();
    let xs: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    let slope = loglog_slope(&xs, &mean_lengths)?;
    let gap = match *model {
        Model::M6i { gap } | Model::M6ii { gap } => gap,
        _ => f64::NAN,
    };
    let fit = ScalingFit { model: model.to_string(), r: cfg.to.r(), gap, sizes: sizes.to_vec(), mean_lengths, slope };
    Ok((records, fit))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> HarnessConfig {
        HarnessConfig { num_dirs: 20, boot_reps: 50, timing: false, ..Default::default() }
    }

    #[test]
    fn slope_of_a_power_law() {
        let xs = [100.0, 1000.0, 10000.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.25)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() + 0.25).abs() < 1e-12);
        assert!(loglog_slope(&[5.0, 5.0], &[1.0, 2.0]).is_err());
        assert!(loglog_slope(&[5.0], &[1.0]).is_err());
    }

    #[test]
    fn geometric_grid_endpoints() {
        let g = geometric_sizes(250, 50_000, 6).unwrap();
        assert_eq!((g[0], *g.last().unwrap(), g.len()), (250, 50_000, 6));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(geometric_sizes(10, 5, 3).is_err());
    }

    #[test]
    fn records_carry_coverage_and_hybrid_reuses_parts() {
        let model = Model::M6ii { gap: 0.2 };
        let cfg = quick();
        let truth = model.true_sw_oracle(cfg.to).unwrap();
        let methods = [Method::FiniteSample, Method::Bootstrap, Method::Hybrid];
        let recs = run_replication(&model, 300, 0, &methods, |_| Some(truth), &cfg).unwrap();
        assert_eq!(recs.len(), 3);
        for r in &recs {
            assert_eq!(r.covered, Some(r.lower <= truth && truth <= r.upper));
            assert!(r.length >= 0.0 && r.runtime_s.is_none());
        }
        let hybrid = &recs[2];
        let chosen = match hybrid.branch.unwrap() {
            Branch::Finite => &recs[0],
            Branch::Bootstrap => &recs[1],
        };
        assert_eq!((hybrid.lower.to_bits(), hybrid.upper.to_bits()), (chosen.lower.to_bits(), chosen.upper.to_bits()));
    }

    #[test]
    fn coverage_runs_are_reproducible() {
        let cfg = HarnessConfig { to: TrimOrder::new(2.0, 0.25).unwrap(), ..quick() };
        let run = || run_coverage(&Model::M1, &[100, 150], 3, &[Method::FiniteSample, Method::Hybrid], |_, _| None, &cfg).unwrap();
        let a = run();
        assert_eq!(a.len(), 12);
        assert_eq!(a, run());
        let s = summarize(&a);
        assert_eq!(s.len(), 4);
        assert!(s.iter().all(|c| c.reps == 3 && c.coverage.is_none()));
    }

    #[test]
    fn scaling_needs_two_sizes() {
        assert!(run_scaling(&Model::M6ii { gap: 0.0 }, &[500], 2, &quick()).is_err());
        let (recs, fit) = run_scaling(&Model::M6ii { gap: 0.0 }, &[500, 2000], 2, &quick()).unwrap();
        assert_eq!(recs.len(), 4);
        assert!(fit.slope < 0.0);
    }
}
