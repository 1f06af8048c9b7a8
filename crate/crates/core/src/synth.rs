//! Synthetic feature-map datasets whose class evidence is split between the
//! spatial view and the pixel view.
//!
//! Classes come in pairs. Classes `2j` and `2j+1` share a per-channel
//! signature `s_j` (zero mean over channels) and differ in the spatial
//! template added to every channel: even classes get `T_even`, odd classes get
//! `T_odd` (both zero mean over positions). A sample of class `k = 2j + p` is
//!
//! ```text
//! x[c, pos] = β·s_j[c] + α·T_p[pos] + σ·ε
//! ```
//!
//! so channel means (GAP) only see `s_j` and identify the pair, while the
//! channel-averaged map (CAP) only sees `T_p` and identifies the parity. Only
//! features that keep both views separate all classes.
//!
//! Signatures and templates live on a dyadic grid with exactly zero sums, so
//! with `α = β = 1, σ = 0` the single-view confusions hold bit-for-bit.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::tensor::FeatureMap;

const GRID: f64 = 4096.0;
const SPLIT_STREAM: u64 = u64::MAX;

fn default_classes() -> usize {
    4
}
fn default_channels() -> usize {
    16
}
fn default_spatial() -> Vec<usize> {
    vec![8, 8]
}
fn default_samples() -> usize {
    100
}
fn one() -> f64 {
    1.0
}
fn default_noise() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    /// Number of classes; even.
    #[serde(default = "default_classes")]
    pub classes: usize,
    #[serde(default = "default_channels")]
    pub channels: usize,
    /// `[H, W]` or `[D, H, W]`.
    #[serde(default = "default_spatial")]
    pub spatial: Vec<usize>,
    #[serde(default = "default_samples")]
    pub samples_per_class: usize,
    /// Strength of the spatial templates.
    #[serde(default = "one")]
    pub alpha: f64,
    /// Strength of the channel signatures.
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(default = "default_noise")]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            classes: default_classes(),
            channels: default_channels(),
            spatial: default_spatial(),
            samples_per_class: default_samples(),
            alpha: 1.0,
            beta: 1.0,
            noise: default_noise(),
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.classes < 2 || !self.classes.is_multiple_of(2) {
            return Err(contract(format!("class count must be even and >= 2, got {}", self.classes)));
        }
        if self.channels == 0 || self.samples_per_class == 0 {
            return Err(contract("channels and samples per class must be positive"));
        }
        if !(self.spatial.len() == 2 || self.spatial.len() == 3) || self.spatial.contains(&0) {
            return Err(contract(format!("spatial shape must be 2 or 3 positive extents, got {:?}", self.spatial)));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) || !self.alpha.is_finite() || !self.beta.is_finite() {
            return Err(contract("noise must be finite and >= 0; strengths must be finite"));
        }
        Ok(())
    }

    pub fn num_samples(&self) -> usize {
        self.classes * self.samples_per_class
    }

    pub fn map_shape(&self) -> Vec<usize> {
        let mut shape = vec![self.channels];
        shape.extend_from_slice(&self.spatial);
        shape
    }
}

/// Everything needed to audit or regenerate a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthManifest {
    pub spec: SynthSpec,
    /// One spatial template per class, flattened row-major; classes of the
    /// same parity share a template.
    pub templates: Vec<Vec<f64>>,
    /// One channel signature per class pair.
    pub signatures: Vec<Vec<f64>>,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SynthDataset {
    /// Class-major: all samples of class 0, then class 1, ...
    pub maps: Vec<FeatureMap>,
    pub labels: Vec<usize>,
    pub manifest: SynthManifest,
}

impl SynthDataset {
    pub fn select(&self, indices: &[usize]) -> (Vec<FeatureMap>, Vec<usize>) {
        (indices.iter().map(|&i| self.maps[i].clone()).collect(), indices.iter().map(|&i| self.labels[i]).collect())
    }

    pub fn train(&self) -> (Vec<FeatureMap>, Vec<usize>) {
        self.select(&self.manifest.train_indices)
    }

    pub fn test(&self) -> (Vec<FeatureMap>, Vec<usize>) {
        self.select(&self.manifest.test_indices)
    }
}

/// `len` Gaussian draws snapped to a 1/4096 grid and shifted to sum to exactly zero.
fn zero_sum_vector(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let mut ticks: Vec<i64> = (0..len).map(|_| (rng.sample::<f64, _>(StandardNormal) * GRID).round() as i64).collect();
    let sum: i64 = ticks.iter().sum();
    let n = len as i64;
    let shift = sum.div_euclid(n);
    let remainder = sum.rem_euclid(n) as usize;
    for (i, t) in ticks.iter_mut().enumerate() {
        *t -= shift + i64::from(i < remainder);
    }
    debug_assert_eq!(ticks.iter().sum::<i64>(), 0);
    ticks.into_iter().map(|t| t as f64 / GRID).collect()
}

/// Stratified 80/20 split; indices returned ascending.
fn split(spec: &SynthSpec) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(SPLIT_STREAM);
    let per = spec.samples_per_class;
    let n_train = (per * 4).div_ceil(5).min(per);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for class in 0..spec.classes {
        let mut idx: Vec<usize> = (class * per..(class + 1) * per).collect();
        idx.shuffle(&mut rng);
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

pub fn generate(spec: &SynthSpec) -> Result<SynthDataset> {
    spec.validate()?;
    let plane: usize = spec.spatial.iter().product();
    let pairs = spec.classes / 2;

    // stream 0 holds the class structure, stream i + 1 the noise of sample i
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let parity_templates = [zero_sum_vector(&mut rng, plane), zero_sum_vector(&mut rng, plane)];
    let signatures: Vec<Vec<f64>> = (0..pairs).map(|_| zero_sum_vector(&mut rng, spec.channels)).collect();

    let shape = spec.map_shape();
    let maps = (0..spec.num_samples())
        .into_par_iter()
        .map(|i| {
            let class = i / spec.samples_per_class;
            let signature = &signatures[class / 2];
            let template = &parity_templates[class % 2];
            let mut noise_rng = ChaCha8Rng::seed_from_u64(spec.seed);
            noise_rng.set_stream(i as u64 + 1);
            let mut data = Vec::with_capacity(spec.channels * plane);
            for &s in signature {
                for &t in template {
                    let mut v = spec.beta * s + spec.alpha * t;
                    if spec.noise > 0.0 {
                        v += spec.noise * noise_rng.sample::<f64, _>(StandardNormal);
                    }
                    data.push(v);
                }
            }
            FeatureMap::new(shape.clone(), data)
        })
        .collect::<Result<Vec<_>>>()?;

    let labels = (0..spec.num_samples()).map(|i| i / spec.samples_per_class).collect();
    let (train_indices, test_indices) = split(spec);
    let manifest = SynthManifest {
        spec: spec.clone(),
        templates: (0..spec.classes).map(|k| parity_templates[k % 2].clone()).collect(),
        signatures,
        train_indices,
        test_indices,
    };
    Ok(SynthDataset { maps, labels, manifest })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pooling::{ccp_pool, sp_pool, Reduction};

    fn noiseless() -> SynthSpec {
        SynthSpec { noise: 0.0, samples_per_class: 3, seed: 17, ..SynthSpec::default() }
    }

    #[test]
    fn zero_sum_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for len in [1, 2, 7, 64, 100] {
            let v = zero_sum_vector(&mut rng, len);
            assert_eq!(v.iter().sum::<f64>(), 0.0);
        }
    }

    #[test]
    fn default_spec_shape() {
        let ds = generate(&SynthSpec::default()).unwrap();
        assert_eq!(ds.maps.len(), 400);
        assert_eq!(ds.manifest.templates.len(), 4);
        assert_eq!(ds.manifest.signatures.len(), 2);
        assert_eq!(ds.maps[0].shape(), &[16, 8, 8]);
        assert_eq!(ds.manifest.train_indices.len(), 320);
        assert_eq!(ds.manifest.test_indices.len(), 80);
        for class in 0..4 {
            assert_eq!(ds.manifest.test_indices.iter().filter(|&&i| ds.labels[i] == class).count(), 20);
        }
    }

    #[test]
    fn gap_identical_within_pairs() {
        let ds = generate(&noiseless()).unwrap();
        let gap = |i: usize| sp_pool(&ds.maps[i], 1, Reduction::Avg).unwrap().into_data();
        let per = 3;
        for j in 0..2 {
            assert_eq!(gap(2 * j * per), gap((2 * j + 1) * per));
        }
        assert_ne!(gap(0), gap(2 * per));
    }

    #[test]
    fn cap_difference_is_template_difference() {
        let ds = generate(&noiseless()).unwrap();
        let cap = |i: usize| ccp_pool(&ds.maps[i], 1, Reduction::Avg).unwrap().into_data();
        let (t0, t1) = (&ds.manifest.templates[0], &ds.manifest.templates[1]);
        let (a, b) = (cap(0), cap(3));
        for p in 0..a.len() {
            assert_eq!(a[p] - b[p], t0[p] - t1[p]);
        }
        // across pairs, same parity: identical
        assert_eq!(cap(0), cap(6));
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let spec = SynthSpec { samples_per_class: 10, seed: 5, ..SynthSpec::default() };
        let a = generate(&spec).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| generate(&a.manifest.spec)).unwrap();
        assert_eq!(a.maps, b.maps);
        assert_eq!(a.manifest, b.manifest);
    }

    #[test]
    fn volume_spec() {
        let spec = SynthSpec { spatial: vec![2, 4, 4], samples_per_class: 2, ..SynthSpec::default() };
        let ds = generate(&spec).unwrap();
        assert_eq!(ds.maps[0].shape(), &[16, 2, 4, 4]);
    }

    #[test]
    fn invalid_specs() {
        for bad in [
            SynthSpec { classes: 3, ..SynthSpec::default() },
            SynthSpec { classes: 0, ..SynthSpec::default() },
            SynthSpec { channels: 0, ..SynthSpec::default() },
            SynthSpec { spatial: vec![8], ..SynthSpec::default() },
            SynthSpec { noise: -1.0, ..SynthSpec::default() },
        ] {
            assert!(generate(&bad).is_err());
        }
        assert!(serde_json::from_str::<SynthSpec>(r#"{"classes": 4, "colour": 1}"#).is_err());
        assert_eq!(serde_json::from_str::<SynthSpec>("{}").unwrap(), SynthSpec::default());
    }
}
