//! Multinomial logistic-regression head trained on pooled feature vectors.
//!
//! Training is plain minibatch SGD on mean cross-entropy plus `λ·‖W‖²`, from a
//! zero initialization, with a seeded ChaCha stream driving the per-epoch
//! shuffle. Two runs with the same inputs and seed are bit-identical.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::io::npy::{self, NpyArray};
use crate::metrics::softmax;

fn default_learning_rate() -> f64 {
    0.1
}
fn default_epochs() -> usize {
    200
}
fn default_batch_size() -> usize {
    32
}
fn default_l2() -> f64 {
    1e-4
}
fn default_standardize() -> bool {
    true
}

/// SGD hyperparameters. Every field has a default, so `{}` is a valid spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSpec {
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_l2")]
    pub l2: f64,
    #[serde(default)]
    pub seed: u64,
    /// Z-score every feature dimension with training-set statistics.
    #[serde(default = "default_standardize")]
    pub standardize: bool,
}

impl Default for TrainSpec {
    fn default() -> Self {
        Self {
            learning_rate: default_learning_rate(),
            epochs: default_epochs(),
            batch_size: default_batch_size(),
            l2: default_l2(),
            seed: 0,
            standardize: default_standardize(),
        }
    }
}

impl TrainSpec {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(contract("learning rate must be positive"));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(contract("epochs and batch size must be positive"));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(contract("L2 coefficient must be non-negative"));
        }
        Ok(())
    }
}

/// Per-dimension affine normalization fitted on training features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviation; constant dimensions use 1.
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: ArrayView2<f64>) -> Self {
        let n = x.nrows() as f64;
        let mean: Vec<f64> = x.columns().into_iter().map(|c| c.sum() / n).collect();
        let scale = x
            .columns()
            .into_iter()
            .zip(&mean)
            .map(|(c, &mu)| {
                let var = c.iter().map(|&v| (v - mu) * (v - mu)).sum::<f64>() / n;
                let sd = var.sqrt();
                if sd > 1e-12 * (1.0 + mu.abs()) {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn apply(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut out = x.to_owned();
        for mut row in out.outer_iter_mut() {
            for ((v, &mu), &sd) in row.iter_mut().zip(&self.mean).zip(&self.scale) {
                *v = (*v - mu) / sd;
            }
        }
        out
    }
}

/// A trained linear classifier, `softmax(W·f + b)` over standardized features.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProbe {
    /// `K×D`.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub standardizer: Option<Standardizer>,
}

impl LinearProbe {
    pub fn input_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn num_classes(&self) -> usize {
        self.weights.nrows()
    }

    pub fn logits(&self, features: ArrayView2<f64>) -> Result<Array2<f64>> {
        if features.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), found: features.ncols() });
        }
        let x = match &self.standardizer {
            Some(s) => s.apply(features),
            None => features.to_owned(),
        };
        Ok(x.dot(&self.weights.t()) + &self.bias)
    }

    pub fn predict_proba(&self, features: ArrayView2<f64>) -> Result<Array2<f64>> {
        softmax(self.logits(features)?.view())
    }

    /// Writes `weights.npy`, `bias.npy` and a `probe.json` sidecar into `dir`.
    pub fn save(&self, dir: &Path, spec: &TrainSpec, loss_history: &[f64]) -> Result<()> {
        fs::create_dir_all(dir)?;
        let w = NpyArray::f8(vec![self.num_classes(), self.input_dim()], self.weights.iter().copied().collect())?;
        let b = NpyArray::f8(vec![self.num_classes()], self.bias.to_vec())?;
        fs::write(dir.join("weights.npy"), npy::write_npy(&w))?;
        fs::write(dir.join("bias.npy"), npy::write_npy(&b))?;
        let sidecar = ProbeSidecar {
            input_dim: self.input_dim(),
            num_classes: self.num_classes(),
            standardizer: self.standardizer.clone(),
            seed: spec.seed,
            spec: spec.clone(),
            loss_history: loss_history.to_vec(),
        };
        fs::write(dir.join("probe.json"), serde_json::to_string_pretty(&sidecar)?)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<(Self, ProbeSidecar)> {
        let sidecar: ProbeSidecar = serde_json::from_slice(&fs::read(dir.join("probe.json"))?)?;
        let w = npy::read_npy(&fs::read(dir.join("weights.npy"))?)?;
        let b = npy::read_npy(&fs::read(dir.join("bias.npy"))?)?;
        let (k, d) = (sidecar.num_classes, sidecar.input_dim);
        if w.shape() != [k, d] || b.shape() != [k] {
            return Err(contract(format!(
                "probe arrays {:?}/{:?} disagree with sidecar K={k}, D={d}",
                w.shape(),
                b.shape()
            )));
        }
        if let Some(s) = &sidecar.standardizer {
            if s.mean.len() != d || s.scale.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: s.mean.len() });
            }
        }
        let probe = LinearProbe {
            weights: Array2::from_shape_vec((k, d), w.to_f64()?).expect("shape checked"),
            bias: Array1::from(b.to_f64()?),
            standardizer: sidecar.standardizer.clone(),
        };
        Ok((probe, sidecar))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSidecar {
    pub input_dim: usize,
    pub num_classes: usize,
    pub standardizer: Option<Standardizer>,
    pub spec: TrainSpec,
    pub seed: u64,
    pub loss_history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainedProbe {
    pub probe: LinearProbe,
    /// Full-data objective before training, then after every epoch.
    pub loss_history: Vec<f64>,
}

/// Objective `mean CE + λ‖W‖²` and its gradients with respect to `W` and `b`.
pub fn loss_and_grad(
    w: ArrayView2<f64>,
    b: ArrayView1<f64>,
    x: ArrayView2<f64>,
    y: &[usize],
    l2: f64,
) -> (f64, Array2<f64>, Array1<f64>) {
    let n = x.nrows() as f64;
    let mut delta = x.dot(&w.t()) + b;
    let mut ce = 0.0;
    for (mut row, &label) in delta.outer_iter_mut().zip(y) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = row.iter().map(|&z| (z - max).exp()).sum();
        ce += max + sum.ln() - row[label];
        row.mapv_inplace(|z| (z - max).exp() / sum);
        row[label] -= 1.0;
    }
    let loss = ce / n + l2 * w.iter().map(|v| v * v).sum::<f64>();
    let grad_w = delta.t().dot(&x) / n + &(&w * (2.0 * l2));
    let grad_b = delta.sum_axis(Axis(0)) / n;
    (loss, grad_w, grad_b)
}

fn check_training_data(features: ArrayView2<f64>, labels: &[usize]) -> Result<usize> {
    let n = features.nrows();
    if labels.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: labels.len() });
    }
    if features.iter().any(|v| !v.is_finite()) {
        return Err(contract("features contain non-finite values"));
    }
    let k = labels.iter().max().map_or(0, |&m| m + 1);
    let distinct = {
        let mut seen = vec![false; k];
        labels.iter().for_each(|&y| seen[y] = true);
        seen.into_iter().filter(|&s| s).count()
    };
    if distinct < 2 {
        return Err(contract("training labels must cover at least two classes"));
    }
    if n < k {
        return Err(contract(format!("need at least as many samples as classes ({n} < {k})")));
    }
    Ok(k)
}

/// Trains a probe with `K = max(label) + 1` classes.
pub fn train(features: ArrayView2<f64>, labels: &[usize], spec: &TrainSpec) -> Result<TrainedProbe> {
    spec.validate()?;
    let k = check_training_data(features, labels)?;
    let d = features.ncols();

    let standardizer = spec.standardize.then(|| Standardizer::fit(features));
    let x = match &standardizer {
        Some(s) => s.apply(features),
        None => features.to_owned(),
    };

    let mut w = Array2::<f64>::zeros((k, d));
    let mut b = Array1::<f64>::zeros(k);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut order: Vec<usize> = (0..x.nrows()).collect();

    let objective = |w: &Array2<f64>, b: &Array1<f64>| loss_and_grad(w.view(), b.view(), x.view(), labels, spec.l2).0;
    let mut history = Vec::with_capacity(spec.epochs + 1);
    history.push(objective(&w, &b));

    for _ in 0..spec.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(spec.batch_size) {
            let xb = x.select(Axis(0), batch);
            let yb: Vec<usize> = batch.iter().map(|&i| labels[i]).collect();
            let (_, gw, gb) = loss_and_grad(w.view(), b.view(), xb.view(), &yb, spec.l2);
            w.scaled_add(-spec.learning_rate, &gw);
            b.scaled_add(-spec.learning_rate, &gb);
        }
        history.push(objective(&w, &b));
    }

    Ok(TrainedProbe { probe: LinearProbe { weights: w, bias: b, standardizer }, loss_history: history })
}

/// A small problem for checking analytic gradients.
#[derive(Debug, Clone)]
pub struct GradInstance {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    pub l2: f64,
}

impl GradInstance {
    pub fn random<R: Rng>(rng: &mut R, classes: usize, dim: usize, samples: usize, l2: f64) -> Self {
        let mut normal = |shape: (usize, usize), scale: f64| {
            Array2::from_shape_simple_fn(shape, || scale * rng.sample::<f64, _>(StandardNormal))
        };
        let weights = normal((classes, dim), 0.5);
        let bias = normal((1, classes), 0.5).remove_axis(Axis(0));
        let features = normal((samples, dim), 1.0);
        let labels = (0..samples).map(|_| rng.random_range(0..classes)).collect();
        Self { weights, bias, features, labels, l2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck {
    /// Largest `|analytic - numeric| / max(|analytic|, |numeric|, 1e-8)`.
    pub max_rel_error: f64,
    pub max_abs_error: f64,
}

/// Compares [`loss_and_grad`] against central finite differences with step `h`.
pub fn gradient_check(inst: &GradInstance, h: f64) -> GradCheck {
    let loss = |w: &Array2<f64>, b: &Array1<f64>| {
        loss_and_grad(w.view(), b.view(), inst.features.view(), &inst.labels, inst.l2).0
    };
    let (_, gw, gb) = loss_and_grad(inst.weights.view(), inst.bias.view(), inst.features.view(), &inst.labels, inst.l2);

    let mut rel: f64 = 0.0;
    let mut abs: f64 = 0.0;
    let mut record = |analytic: f64, numeric: f64| {
        let err = (analytic - numeric).abs();
        abs = abs.max(err);
        rel = rel.max(err / analytic.abs().max(numeric.abs()).max(1e-8));
    };

    let mut w = inst.weights.clone();
    for idx in 0..w.len() {
        let (i, j) = (idx / w.ncols(), idx % w.ncols());
        let orig = w[[i, j]];
        w[[i, j]] = orig + h;
        let up = loss(&w, &inst.bias);
        w[[i, j]] = orig - h;
        let down = loss(&w, &inst.bias);
        w[[i, j]] = orig;
        record(gw[[i, j]], (up - down) / (2.0 * h));
    }
    let mut b = inst.bias.clone();
    for i in 0..b.len() {
        let orig = b[i];
        b[i] = orig + h;
        let up = loss(&inst.weights, &b);
        b[i] = orig - h;
        let down = loss(&inst.weights, &b);
        b[i] = orig;
        record(gb[i], (up - down) / (2.0 * h));
    }
    GradCheck { max_rel_error: rel, max_abs_error: abs }
}
