use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::PredictionSet;

/// Confusion counts, rows indexed by true class and columns by predicted class.
pub fn confusion_matrix(p: &PredictionSet) -> Array2<usize> {
    let k = p.num_classes();
    let mut m = Array2::zeros((k, k));
    for (&y, yhat) in p.labels().iter().zip(p.predictions()) {
        m[[y, yhat]] += 1;
    }
    m
}

pub fn accuracy(p: &PredictionSet) -> f64 {
    let correct = p.labels().iter().zip(p.predictions()).filter(|(&y, yhat)| y == *yhat).count();
    correct as f64 / p.len() as f64
}

/// Mean recall over the classes that occur in the labels.
pub fn balanced_accuracy(p: &PredictionSet) -> f64 {
    let cm = confusion_matrix(p);
    let recalls: Vec<f64> = (0..cm.nrows())
        .filter_map(|k| {
            let support: usize = cm.row(k).sum();
            (support > 0).then(|| cm[[k, k]] as f64 / support as f64)
        })
        .collect();
    recalls.iter().sum::<f64>() / recalls.len() as f64
}

/// Unweighted mean F1 over classes that occur in either the labels or the
/// predictions. A class with zero precision and recall scores 0.
pub fn macro_f1(p: &PredictionSet) -> f64 {
    let cm = confusion_matrix(p);
    let mut total = 0.0;
    let mut classes = 0;
    for k in 0..cm.nrows() {
        let tp = cm[[k, k]] as f64;
        let support = cm.row(k).sum();
        let predicted = cm.column(k).sum();
        if support == 0 && predicted == 0 {
            continue;
        }
        classes += 1;
        let precision = if predicted > 0 { tp / predicted as f64 } else { 0.0 };
        let recall = if support > 0 { tp / support as f64 } else { 0.0 };
        if precision + recall > 0.0 {
            total += 2.0 * precision * recall / (precision + recall);
        }
    }
    total / classes as f64
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KappaWeighting {
    #[default]
    Unweighted,
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaScore {
    pub value: f64,
    /// Chance agreement was total, so kappa is undefined and reported as 0.
    pub degenerate: bool,
}

/// Cohen's kappa between labels and argmax predictions.
///
/// Computed as `1 - Σ w·O / Σ w·E` with observed and chance-expected
/// agreement tables `O`, `E`; unweighted kappa uses `w_ij = [i != j]`,
/// which reduces to `(p_o - p_e) / (1 - p_e)`.
pub fn cohen_kappa(p: &PredictionSet, weighting: KappaWeighting) -> KappaScore {
    let cm = confusion_matrix(p);
    let k = cm.nrows();
    let n = p.len() as f64;
    let rows: Vec<f64> = cm.outer_iter().map(|r| r.sum() as f64 / n).collect();
    let cols: Vec<f64> = cm.columns().into_iter().map(|c| c.sum() as f64 / n).collect();

    let weight = |i: usize, j: usize| match weighting {
        KappaWeighting::Unweighted => f64::from(u8::from(i != j)),
        KappaWeighting::Quadratic => {
            let d = i.abs_diff(j) as f64;
            d * d / ((k - 1) * (k - 1)) as f64
        }
    };
    let mut observed = 0.0;
    let mut expected = 0.0;
    for i in 0..k {
        for j in 0..k {
            let w = weight(i, j);
            observed += w * cm[[i, j]] as f64 / n;
            expected += w * rows[i] * cols[j];
        }
    }
    if expected == 0.0 {
        KappaScore { value: 0.0, degenerate: true }
    } else {
        KappaScore { value: 1.0 - observed / expected, degenerate: false }
    }
}
