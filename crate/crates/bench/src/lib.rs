//! Fixtures shared by the benchmarks.

use swinfer_core::{sample_directions, sample_pair, DirectionSet, Model, Sample};

/// A sample pair from `model` with `n` points per side and `dirs` directions.
pub fn fixture(model: &str, n: usize, dirs: usize) -> (Sample, Sample, DirectionSet) {
    let model: Model = model.parse().expect("model name");
    let (x, y) = sample_pair(&model, n, n, 7).expect("sampling");
    let dirs = sample_directions(model.dim(), dirs, 11).expect("directions");
    (x, y, dirs)
}
