use dvpool::metrics::{brier, ece, ReliabilityBin, TemperatureFit};
use dvpool::{KappaWeighting, MetricsReport, PredictionSet};
use serde::Serialize;

/// `v` as a percentage rounded to two decimals.
pub fn percent(v: f64) -> f64 {
    (v * 10_000.0).round() / 100.0
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Scores {
    pub acc: f64,
    pub bacc: f64,
    pub mf1: f64,
    pub kappa: f64,
    pub ece: f64,
    pub brier: f64,
}

impl Scores {
    fn of(r: &MetricsReport) -> Self {
        Self { acc: r.acc, bacc: r.bacc, mf1: r.mf1, kappa: r.kappa, ece: r.ece, brier: r.brier }
    }

    fn percent(self) -> Self {
        Self {
            acc: percent(self.acc),
            bacc: percent(self.bacc),
            mf1: percent(self.mf1),
            kappa: percent(self.kappa),
            ece: percent(self.ece),
            brier: percent(self.brier),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Calibrated {
    pub ece: f64,
    pub brier: f64,
}

#[derive(Debug, Serialize)]
pub struct TemperatureReport {
    pub temperature: f64,
    pub nll_before: f64,
    pub nll_after: f64,
    pub degenerate: bool,
    pub at_boundary: bool,
    pub ece: f64,
    pub brier: f64,
    pub raw: Calibrated,
}

/// Percent-formatted report; the unscaled values live under `raw`.
#[derive(Debug, Serialize)]
pub struct Report {
    pub samples: usize,
    pub classes: usize,
    pub num_bins: usize,
    pub kappa_weighting: KappaWeighting,
    pub kappa_degenerate: bool,
    #[serde(flatten)]
    pub scores: Scores,
    pub raw: Scores,
    /// Reliability table before any temperature scaling.
    pub bins: Vec<ReliabilityBin>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature: Option<TemperatureReport>,
}

impl Report {
    pub fn new(p: &PredictionSet, r: &MetricsReport, bins: usize) -> Self {
        let raw = Scores::of(r);
        Self {
            samples: p.len(),
            classes: p.num_classes(),
            num_bins: bins,
            kappa_weighting: r.kappa_weighting,
            kappa_degenerate: r.kappa_degenerate,
            scores: raw.percent(),
            raw,
            bins: r.reliability.bins.clone(),
            temperature: None,
        }
    }
}

pub fn temperature_report(
    fit: &TemperatureFit,
    nll_before: f64,
    scaled: &PredictionSet,
    bins: usize,
) -> dvpool::Result<TemperatureReport> {
    let raw = Calibrated { ece: ece(scaled, bins)?.ece, brier: brier(scaled) };
    Ok(TemperatureReport {
        temperature: fit.temperature,
        nll_before,
        nll_after: fit.nll,
        degenerate: fit.degenerate,
        at_boundary: fit.at_boundary,
        ece: percent(raw.ece),
        brier: percent(raw.brier),
        raw,
    })
}
