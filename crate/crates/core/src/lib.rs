//! Trimmed and sliced Wasserstein distances between empirical samples, with
//! finite-sample, bootstrap and hybrid confidence intervals, a
//! likelihood-free confidence-set procedure and the simulation models used
//! to study them.

pub mod bands;
pub mod error;
pub mod experiments;
pub mod functionals;
pub mod intervals;
pub mod lfi;
pub mod models;
pub mod numeric;
pub mod resampling;
pub mod rng;
pub mod transport;

pub use bands::{check_a1, require_a1, Band, BandFamily, BandSpec};
pub use error::{Error, Result};
pub use experiments::{
    geometric_sizes, loglog_slope, run_coverage, run_replication, run_scaling, summarize, CoverageSummary,
    ExperimentRecord, HarnessConfig, ScalingFit,
};
pub use functionals::{c_r_delta, j_functional_1d, sliced_sj, sphere_coordinate_moment, DistSpec};
pub use intervals::{ci_1d, ci_sliced, envelope_1d, Branch, CiConfig, Envelope, Interval, IntervalParams, Method};
pub use lfi::{
    lfi_confidence_set, sw_projection_estimate, LfiConfig, LfiResult, ParamGrid, ProjectionEstimate, Simulator,
    ThetaInterval, ToggleSimulator,
};
pub use models::{sample_pair, Model};
pub use resampling::{bootstrap_ci, hybrid_ci, min_spacing, BootstrapConfig, ProjectedPair};
pub use transport::{
    empirical_quantile, project, sample_directions, sliced_wasserstein, wasserstein_1d, wasserstein_inf_1d,
    DirectionSet, ProjectedSample, Sample, SortedProjection, TrimOrder,
};
