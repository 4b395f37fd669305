use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use clap::ValueEnum;
use swinfer_core::models::{direction_profile, ReferenceOptions, TruthKind};
use swinfer_core::{
    run_coverage, summarize, CoverageSummary, DirectionSet, ExperimentRecord, HarnessConfig, Method, Model, TrimOrder,
};

use super::ci::{Band, MethodArg};
use crate::cache::TruthCache;
use crate::error::{CliError, CliResult};
use crate::output::{num, print_json};

/// Harness settings shared by `sim` and `scaling`.
#[derive(clap::Args, Debug, Clone)]
pub struct HarnessArgs {
    /// Replications per size.
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    /// Sizes n = m: a comma-separated list or `geom:LO:HI:COUNT`.
    #[arg(long, value_parser = parse_sizes)]
    pub sizes: Sizes,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = Band::Dkw)]
    pub band: Band,
    /// Directions per replication for multivariate models.
    #[arg(long = "num-dirs", default_value_t = 500)]
    pub num_dirs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Omit wall-clock times so that outputs are byte-reproducible.
    #[arg(long = "no-timing")]
    pub no_timing: bool,
    /// Per-replication CSV output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl HarnessArgs {
    pub fn config(&self, r: f64) -> CliResult<HarnessConfig> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CliError::input(format!("--alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(HarnessConfig {
            to: TrimOrder::new(r, self.delta)?,
            alpha: self.alpha,
            band: self.band.into(),
            num_dirs: self.num_dirs,
            seed: self.seed,
            timing: !self.no_timing,
            ..HarnessConfig::default()
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sizes(pub Vec<usize>);

pub fn parse_sizes(s: &str) -> Result<Sizes, String> {
    if let Some(rest) = s.strip_prefix("geom:") {
        let parts: Vec<usize> = rest
            .split(':')
            .map(|p| p.trim().parse::<usize>().map_err(|_| format!("bad geometric grid {s:?}")))
            .collect::<Result<_, _>>()?;
        let [lo, hi, count] = parts[..] else {
            return Err(format!("geometric grid needs LO:HI:COUNT, got {s:?}"));
        };
        return swinfer_core::geometric_sizes(lo, hi, count).map(Sizes).map_err(|e| e.to_string());
    }
    let sizes: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| format!("not a size: {p:?}")))
        .collect::<Result<_, _>>()?;
    if sizes.is_empty() || sizes.contains(&0) {
        return Err("sizes must be positive".into());
    }
    Ok(Sizes(sizes))
}

/// Splits model lists on `;`, and on `,` for entries without parameters.
pub fn parse_models(items: &[String]) -> CliResult<Vec<Model>> {
    let mut out = Vec::new();
    for item in items {
        for part in item.split(';') {
            let pieces: Vec<&str> = if part.contains(':') { vec![part] } else { part.split(',').collect() };
            for p in pieces.into_iter().map(str::trim).filter(|p| !p.is_empty()) {
                out.push(p.parse::<Model>()?);
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::input("no models given"));
    }
    Ok(out)
}

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Models, e.g. `m1,m2,m3` or `m6i:Delta=0.3 c1:d=3,a=2`.
    #[arg(long, num_args = 1.., required = true)]
    models: Vec<String>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [MethodArg::Finite, MethodArg::Boot, MethodArg::Hybrid])]
    methods: Vec<MethodArg>,
    #[command(flatten)]
    harness: HarnessArgs,
    #[arg(long, default_value_t = 2.0)]
    r: f64,
    #[arg(long = "boot-reps", default_value_t = 1000)]
    boot_reps: usize,
    #[arg(long = "spacing-tol", default_value_t = 0.0)]
    spacing_tol: f64,
    /// Directory for cached plug-in truths.
    #[arg(long = "cache-dir", default_value = ".swinfer-cache")]
    cache_dir: PathBuf,
    #[arg(long = "no-cache")]
    no_cache: bool,
    /// Points per side for plug-in truths.
    #[arg(long = "plugin-size", default_value_t = 1_000_000)]
    plugin_size: usize,
    /// Directions for plug-in truths.
    #[arg(long = "plugin-dirs", default_value_t = 2000)]
    plugin_dirs: usize,
    /// Refuse models whose truth would need a plug-in estimate.
    #[arg(long = "exact-truth-only")]
    exact_truth_only: bool,
    /// Distance that coverage is scored against.
    #[arg(long, value_enum, default_value_t = Target::Exact)]
    target: Target,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    /// The population sliced distance.
    Exact,
    /// The population distance averaged over each replication's own directions.
    Directions,
}

pub const RECORD_COLUMNS: [&str; 14] = [
    "model", "method", "n", "m", "rep", "seed", "estimate", "lower", "upper", "length", "truth", "covered", "branch",
    "runtime_s",
];

fn method_name(m: Method) -> &'static str {
    match m {
        Method::FiniteSample => "finite",
        Method::Bootstrap => "bootstrap",
        Method::Hybrid => "hybrid",
    }
}

pub fn write_records(path: &Path, records: &[ExperimentRecord]) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(RECORD_COLUMNS)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in records {
        w.write_record([
            r.model.clone(),
            method_name(r.method).to_string(),
            r.n.to_string(),
            r.m.to_string(),
            r.rep.to_string(),
            r.seed.to_string(),
            r.estimate.to_string(),
            r.lower.to_string(),
            r.upper.to_string(),
            r.length.to_string(),
            opt(r.truth),
            r.covered.map(|c| c.to_string()).unwrap_or_default(),
            r.branch.map(|b| format!("{b:?}").to_lowercase()).unwrap_or_default(),
            opt(r.runtime_s),
        ])?;
    }
    w.into_inner().map_err(|e| CliError::input(e.to_string()))?.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct TruthRow {
    model: String,
    n: usize,
    #[serde(serialize_with = "num")]
    value: f64,
    kind: TruthKind,
}

#[derive(Serialize)]
struct Report {
    out: Option<PathBuf>,
    records: usize,
    truths: Vec<TruthRow>,
    summary: Vec<CoverageSummary>,
}

pub fn run(args: Args) -> CliResult<()> {
    let models = parse_models(&args.models)?;
    let Some(out) = args.harness.out.clone() else {
        return Err(CliError::input("sim needs --out FILE"));
    };
    let mut cfg = args.harness.config(args.r)?;
    cfg.boot_reps = args.boot_reps;
    cfg.spacing_tol = args.spacing_tol;
    let methods: Vec<Method> = args.methods.iter().map(|&m| m.into()).collect();
    if methods.iter().any(|&m| m != Method::FiniteSample) && args.boot_reps == 0 {
        return Err(CliError::input("--boot-reps must be positive"));
    }
    let opts = ReferenceOptions {
        plugin_size: args.plugin_size,
        plugin_dirs: args.plugin_dirs,
        seed: swinfer_core::rng::derive_seed(args.harness.seed, &[swinfer_core::rng::label("truth")]),
        ..ReferenceOptions::default()
    };
    let cache = TruthCache::new((!args.no_cache).then(|| args.cache_dir.clone()));
    let sizes = &args.harness.sizes.0;

    let mut truths = Vec::new();
    let mut records = Vec::new();
    for model in models.iter().filter(|_| args.harness.reps > 0) {
        let mut per_size = Vec::with_capacity(sizes.len());
        for &n in sizes {
            let reference = cache.reference(model, n, cfg.to, &opts)?;
            if args.exact_truth_only && reference.kind == TruthKind::PlugIn {
                return Err(CliError::Oracle(format!("{model} has no exact truth; drop --exact-truth-only")));
            }
            truths.push(TruthRow { model: model.to_string(), n, value: reference.value, kind: reference.kind });
            per_size.push((n, reference.value));
        }
        let profile = match args.target {
            Target::Directions if model.dim() > 1 => Some(direction_profile(model, sizes[0], sizes[0], cfg.to, &opts)?),
            _ => None,
        };
        let truth = |n: usize, dirs: &DirectionSet| match &profile {
            Some(p) => Some(p.sliced(dirs, cfg.to)),
            None => per_size.iter().find(|t| t.0 == n).map(|t| t.1),
        };
        records.extend(run_coverage(model, sizes, args.harness.reps, &methods, truth, &cfg)?);
    }
    write_records(&out, &records)?;
    print_json(&Report { out: Some(out), records: records.len(), truths, summary: summarize(&records) })
}
