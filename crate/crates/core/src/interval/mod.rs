//! Per-interval regression with redundant training sets, and routed
//! prediction through the interval classifier.

mod ols;

use serde::{Deserialize, Serialize};

use crate::classifier::{pseudo_labels, ClassifierModel};
use crate::dataset::{Dataset, NormalizationParams, Role};
use crate::dynamic::DynamicClassificationResult;
use crate::error::{Error, Result};
use crate::exclusion::{apply_exclusion, expand_intervals, ExclusionConfig, ValidRange};
use crate::segmentation::SegmentationList;

pub use ols::{fit_ols, RegressorKind, RegressorModel};

/// Neighbour rows added to an interval's training set are capped at
/// `floor(K / REDUNDANCY_DIVISOR)`, `K` being the interval's own row count.
pub const REDUNDANCY_DIVISOR: usize = 4;

/// Routed prediction for one sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionOutcome {
    pub interval: usize,
    pub prediction: f64,
    pub range: Option<ValidRange>,
    pub excluded: bool,
}

/// Rows labelled `interval` plus up to `floor(K / divisor)` rows from the
/// adjacent intervals whose targets lie closest to the shared boundary.
pub fn assemble_redundant(
    train: &Dataset,
    labels: &[usize],
    interval: usize,
    seg: &SegmentationList,
    divisor: usize,
) -> Result<Dataset> {
    if interval >= seg.n_intervals() {
        return Err(Error::InvalidParameter(format!(
            "interval {interval} outside 0..{}",
            seg.n_intervals()
        )));
    }
    if labels.len() != train.len() {
        return Err(Error::LengthMismatch(labels.len(), train.len()));
    }
    let own: Vec<usize> = (0..train.len())
        .filter(|&i| labels[i] == interval)
        .collect();
    if own.is_empty() {
        return Err(Error::EmptyInterval(interval));
    }
    let cap = own.len() / divisor.max(1);
    let (lower, upper) = seg.bounds(interval);
    let mut neighbours: Vec<(f64, usize)> = (0..train.len())
        .filter_map(|i| {
            let y = train.targets[i];
            match (lower, upper) {
                (Some(c), _) if interval > 0 && labels[i] == interval - 1 => {
                    Some(((c - y).abs(), i))
                }
                (_, Some(c)) if labels[i] == interval + 1 => Some(((y - c).abs(), i)),
                _ => None,
            }
        })
        .collect();
    neighbours.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut rows = own;
    rows.extend(neighbours.iter().take(cap).map(|&(_, i)| i));
    Ok(train.subset(&rows, Role::Train))
}

/// Ordinary least squares on `subset`.
pub fn fit_regressor(subset: &Dataset) -> Result<RegressorModel> {
    fit_ols(&subset.rows, &subset.targets)
}

/// Classifier, segmentation and one regressor per interval.
///
/// Works internally on normalized values; ranges and predictions exposed
/// by [`IntervalEnsemble::predict`] are in raw target units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalEnsemble {
    pub classifier: ClassifierModel,
    pub segmentation: SegmentationList,
    pub regressors: Vec<RegressorModel>,
    pub regressor_kind: RegressorKind,
    pub normalization: NormalizationParams,
    pub exclusion: ExclusionConfig,
    /// Valid range per interval, raw units.
    pub ranges: Vec<ValidRange>,
    /// Training-set count per interval (own rows, before redundancy).
    pub interval_counts: Vec<usize>,
}

/// Fits one regressor per interval of the refined segmentation on the
/// (normalized) training set.
pub fn build_ensemble(
    train: &Dataset,
    dc: &DynamicClassificationResult,
    normalization: &NormalizationParams,
    exclusion: ExclusionConfig,
    divisor: usize,
) -> Result<IntervalEnsemble> {
    let seg = &dc.segmentation;
    let labels = pseudo_labels(&train.targets, seg);
    let regressors = (0..seg.n_intervals())
        .map(|k| fit_regressor(&assemble_redundant(train, &labels, k, seg, divisor)?))
        .collect::<Result<Vec<_>>>()?;
    let min = train.targets.iter().copied().fold(f64::INFINITY, f64::min);
    let max = train
        .targets
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let ranges = expand_intervals(seg, &exclusion, min, max)?
        .into_iter()
        .map(|r| ValidRange {
            low: normalization.target.invert(r.low),
            high: normalization.target.invert(r.high),
            empty: r.empty,
        })
        .collect();
    Ok(IntervalEnsemble {
        classifier: dc.model.clone(),
        segmentation: seg.clone(),
        regressors,
        regressor_kind: RegressorKind::OrdinaryLeastSquares,
        normalization: normalization.clone(),
        exclusion,
        ranges,
        interval_counts: seg.counts(&train.targets),
    })
}

impl IntervalEnsemble {
    pub fn n_intervals(&self) -> usize {
        self.segmentation.n_intervals()
    }

    pub fn n_features(&self) -> usize {
        self.normalization.columns.len()
    }

    fn route(&self, normalized: &[f64]) -> PredictionOutcome {
        let k = self.classifier.predict(normalized);
        let y = self.regressors[k].predict(normalized);
        PredictionOutcome {
            interval: k,
            prediction: self.normalization.target.invert(y),
            range: Some(self.ranges[k]),
            excluded: false,
        }
    }

    /// Routes raw feature rows; exclusion flags are left unset.
    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<PredictionOutcome>> {
        rows.iter()
            .map(|r| Ok(self.route(&self.normalization.apply_row(r)?)))
            .collect()
    }

    /// Routes rows that are already normalized with this ensemble's params.
    pub fn predict_normalized(&self, rows: &[Vec<f64>]) -> Result<Vec<PredictionOutcome>> {
        rows.iter()
            .map(|r| {
                if r.len() != self.n_features() {
                    return Err(Error::FeatureWidthMismatch {
                        expected: self.n_features(),
                        got: r.len(),
                    });
                }
                Ok(self.route(r))
            })
            .collect()
    }

    /// [`Self::predict`] followed by the exclusion rule.
    pub fn predict_with_exclusion(&self, rows: &[Vec<f64>]) -> Result<Vec<PredictionOutcome>> {
        Ok(apply_exclusion(self.predict(rows)?, &self.ranges))
    }
}

/// Free-function form of [`IntervalEnsemble::predict`].
pub fn predict(ensemble: &IntervalEnsemble, rows: &[Vec<f64>]) -> Result<Vec<PredictionOutcome>> {
    ensemble.predict(rows)
}
