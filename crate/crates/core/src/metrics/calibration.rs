use serde::{Deserialize, Serialize};

use super::PredictionSet;
use crate::error::{contract, Result};

/// Equal-width confidence bins used when none are requested.
pub const DEFAULT_BINS: usize = 15;

/// One row of a reliability diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    /// Mean confidence of the samples in the bin, 0 when empty.
    pub confidence: f64,
    /// Fraction of the bin's samples predicted correctly, 0 when empty.
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityTable {
    pub bins: Vec<ReliabilityBin>,
    pub ece: f64,
}

impl ReliabilityTable {
    pub fn total(&self) -> usize {
        self.bins.iter().map(|b| b.count).sum()
    }

    /// CSV rendering with header `lower,upper,count,confidence,accuracy`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lower,upper,count,confidence,accuracy\n");
        for b in &self.bins {
            out.push_str(&format!("{},{},{},{},{}\n", b.lower, b.upper, b.count, b.confidence, b.accuracy));
        }
        out
    }
}

/// Edge `i` of `bins` equal-width bins over `[0, 1]`.
fn edge(i: usize, bins: usize) -> f64 {
    i as f64 / bins as f64
}

/// Index of the bin `[edge(b), edge(b+1))` holding `conf`; the last bin is closed.
fn bin_index(conf: f64, bins: usize) -> usize {
    let mut b = ((conf * bins as f64) as usize).min(bins - 1);
    // the product can land on the wrong side of an edge by one ulp
    while b > 0 && conf < edge(b, bins) {
        b -= 1;
    }
    while b + 1 < bins && conf >= edge(b + 1, bins) {
        b += 1;
    }
    b
}

/// Expected calibration error over `bins` equal-width confidence bins.
///
/// `ECE = Σ_b (n_b / N) · |acc_b - conf_b|`, empty bins contributing nothing.
pub fn ece(p: &PredictionSet, bins: usize) -> Result<ReliabilityTable> {
    if bins == 0 {
        return Err(contract("ECE needs at least one bin"));
    }
    let mut counts = vec![0usize; bins];
    let mut conf_sums = vec![0.0; bins];
    let mut correct = vec![0usize; bins];
    for ((conf, yhat), &y) in p.confidences().into_iter().zip(p.predictions()).zip(p.labels()) {
        let b = bin_index(conf, bins);
        counts[b] += 1;
        conf_sums[b] += conf;
        correct[b] += usize::from(yhat == y);
    }

    let n = p.len() as f64;
    let mut ece = 0.0;
    let rows = (0..bins)
        .map(|b| {
            let (confidence, accuracy) = if counts[b] == 0 {
                (0.0, 0.0)
            } else {
                let count = counts[b] as f64;
                let (conf, acc) = (conf_sums[b] / count, correct[b] as f64 / count);
                ece += (count / n) * (acc - conf).abs();
                (conf, acc)
            };
            ReliabilityBin { lower: edge(b, bins), upper: edge(b + 1, bins), count: counts[b], confidence, accuracy }
        })
        .collect();
    Ok(ReliabilityTable { bins: rows, ece })
}

/// Multiclass Brier score, `mean_i Σ_k (p_ik - [y_i = k])²`, in `[0, 2]`.
pub fn brier(p: &PredictionSet) -> f64 {
    let total: f64 = p
        .probs()
        .outer_iter()
        .zip(p.labels())
        .map(|(row, &y)| {
            row.iter()
                .enumerate()
                .map(|(k, &pk)| {
                    let d = pk - f64::from(u8::from(k == y));
                    d * d
                })
                .sum::<f64>()
        })
        .sum();
    total / p.len() as f64
}
