//! Reject rule: a prediction is kept only if it falls inside the valid
//! range of the interval the classifier routed it to.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::PredictionOutcome;
use crate::segmentation::SegmentationList;

/// Default half-width expansion (±5 %).
pub const DEFAULT_EXPANSION: f64 = 1.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExclusionConfig {
    /// One factor ≥ 1 per interval, scaling its half-width.
    pub factors: Vec<f64>,
    pub drop_first: bool,
    pub drop_last: bool,
}

impl ExclusionConfig {
    pub fn uniform(n_intervals: usize, factor: f64) -> Self {
        Self {
            factors: vec![factor; n_intervals],
            drop_first: false,
            drop_last: false,
        }
    }

    pub fn validate(&self, n_intervals: usize) -> Result<()> {
        if self.factors.len() != n_intervals {
            return Err(Error::InvalidParameter(format!(
                "{} expansion factors for {} intervals",
                self.factors.len(),
                n_intervals
            )));
        }
        if self.factors.iter().any(|f| !(*f >= 1.0) || !f.is_finite()) {
            return Err(Error::InvalidParameter(
                "expansion factors must be finite and at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Closed range of acceptable predictions for one interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidRange {
    pub low: f64,
    pub high: f64,
    /// The interval is discarded entirely.
    pub empty: bool,
}

impl ValidRange {
    pub fn contains(&self, value: f64) -> bool {
        !self.empty && value >= self.low && value <= self.high
    }
}

/// Valid range of every interval: its extent (outer intervals bounded by the
/// training target extremes) widened symmetrically about the midpoint.
pub fn expand_intervals(
    seg: &SegmentationList,
    cfg: &ExclusionConfig,
    train_target_min: f64,
    train_target_max: f64,
) -> Result<Vec<ValidRange>> {
    let n = seg.n_intervals();
    cfg.validate(n)?;
    Ok((0..n)
        .map(|k| {
            let (lower, upper) = seg.bounds(k);
            let lo = lower.unwrap_or(train_target_min);
            let hi = upper.unwrap_or(train_target_max);
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo) * cfg.factors[k];
            let dropped = (k == 0 && cfg.drop_first) || (k == n - 1 && cfg.drop_last);
            ValidRange {
                low: mid - half,
                high: mid + half,
                empty: dropped,
            }
        })
        .collect())
}

/// Sets each outcome's range and flags it if the prediction is outside.
pub fn apply_exclusion(
    outcomes: Vec<PredictionOutcome>,
    ranges: &[ValidRange],
) -> Vec<PredictionOutcome> {
    outcomes
        .into_iter()
        .map(|mut o| {
            let range = ranges[o.interval];
            o.range = Some(range);
            o.excluded = !range.contains(o.prediction);
            o
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalCounts {
    pub total: usize,
    pub retained: usize,
    pub excluded: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExclusionSummary {
    pub total: usize,
    pub retained: usize,
    pub excluded: usize,
    pub excluded_rate: f64,
    pub retained_rate: f64,
    pub per_interval: Vec<IntervalCounts>,
}

/// Totals and per-interval counts of retained and excluded outcomes.
pub fn exclusion_summary(
    outcomes: &[PredictionOutcome],
    n_intervals: usize,
) -> Result<ExclusionSummary> {
    if outcomes.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let width = n_intervals.max(outcomes.iter().map(|o| o.interval + 1).max().unwrap_or(0));
    let mut per_interval = vec![IntervalCounts::default(); width];
    for o in outcomes {
        let c = &mut per_interval[o.interval];
        c.total += 1;
        if o.excluded {
            c.excluded += 1;
        } else {
            c.retained += 1;
        }
    }
    let total = outcomes.len();
    let excluded = per_interval.iter().map(|c| c.excluded).sum::<usize>();
    let retained = total - excluded;
    Ok(ExclusionSummary {
        total,
        retained,
        excluded,
        excluded_rate: excluded as f64 / total as f64,
        retained_rate: retained as f64 / total as f64,
        per_interval,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(interval: usize, prediction: f64) -> PredictionOutcome {
        PredictionOutcome {
            interval,
            prediction,
            range: None,
            excluded: false,
        }
    }

    #[test]
    fn expansion_is_symmetric_about_midpoint() {
        let seg = SegmentationList::new(vec![100.0, 200.0]).unwrap();
        let cfg = ExclusionConfig::uniform(3, 1.0025);
        let ranges = expand_intervals(&seg, &cfg, 50.0, 300.0).unwrap();
        assert!((ranges[1].low - 99.875).abs() < 1e-12);
        assert!((ranges[1].high - 200.125).abs() < 1e-12);
        // outer intervals use the observed extremes
        assert!((ranges[0].low - (75.0 - 25.0 * 1.0025)).abs() < 1e-12);
        assert!((ranges[2].high - (250.0 + 50.0 * 1.0025)).abs() < 1e-12);
    }

    #[test]
    fn unit_factor_keeps_raw_range() {
        let seg = SegmentationList::new(vec![100.0, 200.0]).unwrap();
        let ranges =
            expand_intervals(&seg, &ExclusionConfig::uniform(3, 1.0), 50.0, 300.0).unwrap();
        assert_eq!((ranges[1].low, ranges[1].high), (100.0, 200.0));
        assert_eq!((ranges[0].low, ranges[2].high), (50.0, 300.0));
    }

    #[test]
    fn dropped_edges_are_empty() {
        let seg = SegmentationList::new(vec![1.0, 2.0]).unwrap();
        let mut cfg = ExclusionConfig::uniform(3, 1.05);
        cfg.drop_first = true;
        let ranges = expand_intervals(&seg, &cfg, 0.0, 3.0).unwrap();
        assert!(ranges[0].empty);
        assert!(!ranges[1].empty && !ranges[2].empty);
        cfg.drop_last = true;
        let ranges = expand_intervals(&seg, &cfg, 0.0, 3.0).unwrap();
        assert!(ranges[2].empty);
    }

    #[test]
    fn config_validation() {
        let seg = SegmentationList::new(vec![1.0]).unwrap();
        assert!(expand_intervals(&seg, &ExclusionConfig::uniform(3, 1.0), 0.0, 2.0).is_err());
        assert!(expand_intervals(&seg, &ExclusionConfig::uniform(2, 0.9), 0.0, 2.0).is_err());
    }

    #[test]
    fn midpoint_kept_and_overshoot_excluded() {
        let seg = SegmentationList::new(vec![100.0, 200.0]).unwrap();
        let ranges =
            expand_intervals(&seg, &ExclusionConfig::uniform(3, 1.05), 0.0, 300.0).unwrap();
        let out = apply_exclusion(vec![outcome(1, 150.0), outcome(1, 202.6)], &ranges);
        assert!(!out[0].excluded);
        assert!(out[1].excluded);
        assert_eq!(out[0].range, Some(ranges[1]));
    }

    #[test]
    fn summary_of_culled_fixture() {
        // per-interval totals and exclusions of a 13-interval run with both
        // edge intervals discarded
        let totals = [
            818, 2750, 8293, 8200, 8918, 8287, 8618, 9853, 9141, 9027, 7991, 2329, 1002,
        ];
        let excluded = [
            818, 42, 123, 177, 241, 210, 235, 268, 207, 152, 128, 41, 1002,
        ];
        let mut outcomes = Vec::new();
        for (k, (&t, &e)) in totals.iter().zip(&excluded).enumerate() {
            for i in 0..t {
                let mut o = outcome(k, 0.0);
                o.excluded = i < e;
                outcomes.push(o);
            }
        }
        let s = exclusion_summary(&outcomes, 13).unwrap();
        assert_eq!(s.total, 85227);
        assert_eq!(s.excluded, 3644);
        assert_eq!(s.retained, 81583);
        assert_eq!(s.per_interval[0].retained, 0);
        assert_eq!(s.per_interval[12].retained, 0);
        assert_eq!(s.per_interval[1].retained, 2708);
        assert!((s.excluded_rate - 3644.0 / 85227.0).abs() < 1e-15);
        assert_eq!(format!("{:.4}", s.excluded_rate * 100.0), "4.2756");
        assert_eq!(format!("{:.4}", s.retained_rate * 100.0), "95.7244");
        assert_eq!(s.excluded_rate + s.retained_rate, 1.0);
    }

    #[test]
    fn nothing_excluded_gives_zero_rate() {
        let s = exclusion_summary(&[outcome(0, 1.0), outcome(1, 2.0)], 2).unwrap();
        assert_eq!(s.excluded_rate, 0.0);
        assert!(exclusion_summary(&[], 2).is_err());
    }
}
