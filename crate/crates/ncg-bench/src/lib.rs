//! Shared fixture builders for the criterion benches: deterministic
//! synthetic datasets and models sized to exercise the hot paths without
//! drowning the timer in setup.

use rand::Rng;

use ncg_core::dataset::LabeledDataset;
use ncg_core::rng::{self, STREAM_GEN};
use ncg_core::MLPModel;

/// Uniform points in `[-1, 1]^d` with labels striped by row so every class
/// is populated and differently-labeled points are never identical.
pub fn random_dataset(n: usize, d: usize, classes: usize, seed: u64) -> LabeledDataset {
    let mut r = rng::substream(seed, STREAM_GEN);
    let points: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| r.random_range(-1.0..1.0)).collect())
        .collect();
    let labels: Vec<usize> = (0..n).map(|i| i % classes).collect();
    LabeledDataset::new(points, labels, classes, "bench").expect("valid bench dataset")
}

/// Uniform query points in the same cube as [`random_dataset`].
pub fn random_queries(m: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng::substream(seed, STREAM_GEN);
    (0..m)
        .map(|_| (0..d).map(|_| r.random_range(-1.0..1.0)).collect())
        .collect()
}

/// A freshly initialized network for the given input/output shape.
pub fn model(d: usize, classes: usize, seed: u64) -> MLPModel {
    let mut r = rng::substream(seed, rng::STREAM_INIT);
    MLPModel::new(&[d, 64, 64, classes], &mut r).expect("valid widths")
}
