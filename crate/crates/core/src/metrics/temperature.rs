use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};

/// Search interval and absolute tolerance for the fitted temperature.
pub const T_MIN: f64 = 0.05;
pub const T_MAX: f64 = 20.0;
pub const T_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperatureFit {
    pub temperature: f64,
    /// Mean negative log-likelihood at `temperature`.
    pub nll: f64,
    /// Every logit row was constant, so the likelihood does not depend on T.
    pub degenerate: bool,
    /// The optimum sits on an end of the search interval.
    pub at_boundary: bool,
}

fn check(logits: ArrayView2<f64>, labels: &[usize]) -> Result<()> {
    let (n, k) = logits.dim();
    if n == 0 {
        return Err(contract("temperature fit needs at least one sample"));
    }
    if labels.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: labels.len() });
    }
    if let Some(&bad) = labels.iter().find(|&&y| y >= k) {
        return Err(contract(format!("label {bad} out of range for {k} classes")));
    }
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(contract("non-finite logits"));
    }
    Ok(())
}

/// Mean negative log-likelihood of `softmax(logits / t)`.
pub fn nll(logits: ArrayView2<f64>, labels: &[usize], t: f64) -> f64 {
    let total: f64 = logits
        .outer_iter()
        .zip(labels)
        .map(|(row, &y)| {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max) / t;
            let lse = max + row.iter().map(|&z| (z / t - max).exp()).sum::<f64>().ln();
            lse - row[y] / t
        })
        .sum();
    total / labels.len() as f64
}

pub fn scale_logits(logits: ArrayView2<f64>, t: f64) -> Array2<f64> {
    logits.mapv(|z| z / t)
}

/// Fits the temperature minimizing the mean NLL by golden-section search on
/// `[T_MIN, T_MAX]` to `T_TOL`.
pub fn temperature_fit(logits: ArrayView2<f64>, labels: &[usize]) -> Result<TemperatureFit> {
    check(logits, labels)?;
    let constant_rows = logits.outer_iter().all(|row| row.iter().all(|&z| z == row[0]));
    if constant_rows {
        return Ok(TemperatureFit {
            temperature: 1.0,
            nll: nll(logits, labels, 1.0),
            degenerate: true,
            at_boundary: false,
        });
    }

    let f = |t: f64| nll(logits, labels, t);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (T_MIN, T_MAX);
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > T_TOL {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = f(b);
        }
    }
    let t = 0.5 * (lo + hi);
    let best = f(t);

    // a monotone likelihood drives the bracket into an end of the interval
    for bound in [T_MIN, T_MAX] {
        if (t - bound).abs() <= T_TOL {
            let at = f(bound);
            if at <= best {
                return Ok(TemperatureFit { temperature: bound, nll: at, degenerate: false, at_boundary: true });
            }
        }
    }
    Ok(TemperatureFit { temperature: t, nll: best, degenerate: false, at_boundary: false })
}
