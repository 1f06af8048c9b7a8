//! Classification and confidence-calibration metrics over predicted class
//! probabilities, plus temperature scaling.
//!
//! All metrics are returned as fractions in `[0, 1]` (kappa in `[-1, 1]`).

mod calibration;
mod classification;
mod temperature;

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

pub use calibration::{brier, ece, ReliabilityBin, ReliabilityTable, DEFAULT_BINS};
pub use classification::{
    accuracy, balanced_accuracy, cohen_kappa, confusion_matrix, macro_f1, KappaScore, KappaWeighting,
};
pub use temperature::{nll, scale_logits, temperature_fit, TemperatureFit, T_MAX, T_MIN, T_TOL};

use crate::error::{contract, Error, Result};

const ROW_SUM_TOL: f64 = 1e-6;

/// Per-sample class probabilities with integer ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    probs: Array2<f64>,
    labels: Vec<usize>,
}

impl PredictionSet {
    pub fn new(probs: Array2<f64>, labels: Vec<usize>) -> Result<Self> {
        let (n, k) = probs.dim();
        if n == 0 {
            return Err(contract("prediction set needs at least one sample"));
        }
        if k < 2 {
            return Err(contract(format!("prediction set needs at least two classes, got {k}")));
        }
        if labels.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: labels.len() });
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= k) {
            return Err(contract(format!("label {bad} out of range for {k} classes")));
        }
        for (i, row) in probs.outer_iter().enumerate() {
            if row.iter().any(|&p| !p.is_finite() || p < 0.0) {
                return Err(contract(format!("row {i} has negative or non-finite probabilities")));
            }
            let sum = row.sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(contract(format!("row {i} sums to {sum}, not 1")));
            }
        }
        Ok(Self { probs, labels })
    }

    /// Builds a set from raw logits through [`softmax`].
    pub fn from_logits(logits: ArrayView2<f64>, labels: Vec<usize>) -> Result<Self> {
        Self::new(softmax(logits)?, labels)
    }

    pub fn probs(&self) -> &Array2<f64> {
        &self.probs
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.probs.ncols()
    }

    /// Argmax per row, ties going to the smallest class index.
    pub fn predictions(&self) -> Vec<usize> {
        self.probs.outer_iter().map(|row| argmax(row.iter().copied())).collect()
    }

    /// Max class probability per row.
    pub fn confidences(&self) -> Vec<f64> {
        self.probs.outer_iter().map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect()
    }

    /// Reorders samples by `order`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self { probs: self.probs.select(Axis(0), order), labels: order.iter().map(|&i| self.labels[i]).collect() }
    }
}

pub(crate) fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    best
}

/// Row-wise softmax with max subtraction.
pub fn softmax(logits: ArrayView2<f64>) -> Result<Array2<f64>> {
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(contract("softmax input contains non-finite logits"));
    }
    let mut out = logits.to_owned();
    for mut row in out.outer_iter_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    Ok(out)
}

/// The full metric suite for one prediction set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub acc: f64,
    pub bacc: f64,
    pub mf1: f64,
    pub kappa: f64,
    pub kappa_weighting: KappaWeighting,
    pub kappa_degenerate: bool,
    pub ece: f64,
    pub brier: f64,
    pub reliability: ReliabilityTable,
}

impl MetricsReport {
    pub fn evaluate(p: &PredictionSet, bins: usize, weighting: KappaWeighting) -> Result<Self> {
        let kappa = cohen_kappa(p, weighting);
        let reliability = ece(p, bins)?;
        Ok(Self {
            acc: accuracy(p),
            bacc: balanced_accuracy(p),
            mf1: macro_f1(p),
            kappa: kappa.value,
            kappa_weighting: weighting,
            kappa_degenerate: kappa.degenerate,
            ece: reliability.ece,
            brier: brier(p),
            reliability,
        })
    }
}
