//! Shared fixtures for the benchmarks.

use dvpool::{FeatureMap, PredictionSet};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// A standard-normal feature map of the given shape.
pub fn random_map(shape: &[usize], seed: u64) -> FeatureMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    FeatureMap::from_fn(shape.to_vec(), |_| rng.sample(StandardNormal)).expect("valid shape")
}

/// Softmax of standard-normal logits with uniformly random labels.
pub fn random_predictions(n: usize, classes: usize, seed: u64) -> PredictionSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let logits = Array2::from_shape_simple_fn((n, classes), || 2.0 * rng.sample::<f64, _>(StandardNormal));
    let labels = (0..n).map(|_| rng.random_range(0..classes)).collect();
    PredictionSet::from_logits(logits.view(), labels).expect("valid predictions")
}
