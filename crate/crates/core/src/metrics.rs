//! Regression and reject-option metrics.

use serde::{Deserialize, Serialize};

use crate::dataset::ColumnRange;
use crate::error::{Error, Result};
use crate::interval::PredictionOutcome;

const REL_EPS: f64 = 1e-12;

/// `|pred - truth| / max(|truth|, 1e-12)`.
pub fn relative_error(truth: f64, pred: f64) -> f64 {
    (pred - truth).abs() / truth.abs().max(REL_EPS)
}

fn check_pair(truths: &[f64], preds: &[f64]) -> Result<()> {
    if truths.len() != preds.len() {
        return Err(Error::LengthMismatch(truths.len(), preds.len()));
    }
    if truths.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(())
}

/// Share of samples whose relative error is at most `tau`.
pub fn within_ratio(truths: &[f64], preds: &[f64], tau: f64) -> Result<f64> {
    check_pair(truths, preds)?;
    let hits = truths
        .iter()
        .zip(preds)
        .filter(|(&t, &p)| relative_error(t, p) <= tau)
        .count();
    Ok(hits as f64 / truths.len() as f64)
}

/// Mean squared error and coefficient of determination.
pub fn mse_r2(truths: &[f64], preds: &[f64]) -> Result<(f64, f64)> {
    check_pair(truths, preds)?;
    if truths.len() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            got: truths.len(),
        });
    }
    let n = truths.len() as f64;
    let sse: f64 = truths
        .iter()
        .zip(preds)
        .map(|(t, p)| (t - p) * (t - p))
        .sum();
    let mean = truths.iter().sum::<f64>() / n;
    let sst: f64 = truths.iter().map(|t| (t - mean) * (t - mean)).sum();
    if sst == 0.0 {
        return Err(Error::ConstantTruth);
    }
    Ok((sse / n, 1.0 - sse / sst))
}

/// Mean of `1 - relative error`, each term clipped to `[0, 1]`.
pub fn average_accuracy(truths: &[f64], preds: &[f64]) -> Result<f64> {
    check_pair(truths, preds)?;
    let sum: f64 = truths
        .iter()
        .zip(preds)
        .map(|(&t, &p)| (1.0 - relative_error(t, p)).clamp(0.0, 1.0))
        .sum();
    Ok(sum / truths.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MissOverkill {
    /// Inaccurate predictions that were retained.
    pub missed_count: usize,
    pub missed_rate: f64,
    /// Accurate predictions that were excluded.
    pub overkill_count: usize,
    pub overkill_rate: f64,
    pub inaccurate_total: usize,
    pub accurate_total: usize,
}

/// Miss and overkill accounting from raw predictions and exclusion flags.
/// A prediction is inaccurate when its relative error exceeds `accuracy_tau`.
pub fn miss_overkill_flags(
    truths: &[f64],
    preds: &[f64],
    excluded: &[bool],
    accuracy_tau: f64,
) -> Result<MissOverkill> {
    if truths.len() != preds.len() {
        return Err(Error::LengthMismatch(truths.len(), preds.len()));
    }
    if truths.len() != excluded.len() {
        return Err(Error::LengthMismatch(truths.len(), excluded.len()));
    }
    let mut m = MissOverkill {
        missed_count: 0,
        missed_rate: 0.0,
        overkill_count: 0,
        overkill_rate: 0.0,
        inaccurate_total: 0,
        accurate_total: 0,
    };
    for ((&t, &p), &x) in truths.iter().zip(preds).zip(excluded) {
        if relative_error(t, p) > accuracy_tau {
            m.inaccurate_total += 1;
            if !x {
                m.missed_count += 1;
            }
        } else {
            m.accurate_total += 1;
            if x {
                m.overkill_count += 1;
            }
        }
    }
    m.missed_rate = m.missed_count as f64 / m.inaccurate_total.max(1) as f64;
    m.overkill_rate = m.overkill_count as f64 / m.accurate_total.max(1) as f64;
    Ok(m)
}

pub fn miss_overkill(
    outcomes: &[PredictionOutcome],
    truths: &[f64],
    accuracy_tau: f64,
) -> Result<MissOverkill> {
    let preds: Vec<f64> = outcomes.iter().map(|o| o.prediction).collect();
    let excluded: Vec<bool> = outcomes.iter().map(|o| o.excluded).collect();
    miss_overkill_flags(truths, &preds, &excluded, accuracy_tau)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WithinRatio {
    pub tau: f64,
    pub ratio: f64,
}

/// Which samples the accuracy metrics are computed over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum View {
    AllRows,
    RetainedOnly,
}

/// How to score predictions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    pub taus: Vec<f64>,
    pub accuracy_tau: f64,
    /// When set, MSE is computed after min-max scaling truths and
    /// predictions with this range; relative errors always use raw values.
    pub scale: Option<ColumnRange>,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            taus: vec![0.01, 0.005],
            accuracy_tau: 0.01,
            scale: None,
        }
    }
}

/// Full metric set for one prediction run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub view: View,
    /// Samples the accuracy metrics were computed over.
    pub n_scored: usize,
    pub n_total: usize,
    pub mse: f64,
    pub r2: f64,
    pub average_accuracy: f64,
    pub within: Vec<WithinRatio>,
    pub excluded_rate: f64,
    pub missed_count: usize,
    pub missed_rate: f64,
    pub overkill_count: usize,
    pub overkill_rate: f64,
    pub dc_error: Option<f64>,
}

impl EvaluationReport {
    /// Scores raw-unit predictions. Exclusion and miss/overkill figures
    /// always cover every row; the accuracy metrics follow `view`.
    pub fn compute(
        truths: &[f64],
        preds: &[f64],
        excluded: &[bool],
        view: View,
        settings: &EvalSettings,
        dc_error: Option<f64>,
    ) -> Result<Self> {
        let mo = miss_overkill_flags(truths, preds, excluded, settings.accuracy_tau)?;
        let (t, p): (Vec<f64>, Vec<f64>) = truths
            .iter()
            .zip(preds)
            .zip(excluded)
            .filter(|(_, &x)| view == View::AllRows || !x)
            .map(|((&t, &p), _)| (t, p))
            .unzip();
        let (mse, r2) = match &settings.scale {
            Some(range) => {
                let ts: Vec<f64> = t.iter().map(|&v| range.apply(v)).collect();
                let ps: Vec<f64> = p.iter().map(|&v| range.apply(v)).collect();
                mse_r2(&ts, &ps)?
            }
            None => mse_r2(&t, &p)?,
        };
        let within = settings
            .taus
            .iter()
            .map(|&tau| {
                Ok(WithinRatio {
                    tau,
                    ratio: within_ratio(&t, &p, tau)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let n_excluded = excluded.iter().filter(|&&x| x).count();
        Ok(Self {
            view,
            n_scored: t.len(),
            n_total: truths.len(),
            mse,
            r2,
            average_accuracy: average_accuracy(&t, &p)?,
            within,
            excluded_rate: n_excluded as f64 / truths.len() as f64,
            missed_count: mo.missed_count,
            missed_rate: mo.missed_rate,
            overkill_count: mo.overkill_count,
            overkill_rate: mo.overkill_rate,
            dc_error,
        })
    }

    pub fn within_at(&self, tau: f64) -> Option<f64> {
        self.within.iter().find(|w| w.tau == tau).map(|w| w.ratio)
    }
}
