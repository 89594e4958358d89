//! Target-range division: Gaussian KDE of the targets and the initial cut
//! points.
//!
//! In automatic mode the cut points equalize the integrated *fluctuation*
//! of the density (absolute slope plus a small floor), so regions where the
//! density changes quickly get narrower intervals. In manual mode a list of
//! interval ratios is mapped onto empirical quantiles.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{quantile_sorted, sample_std, sorted_copy};

/// Number of evaluation points of a [`DensityCurve`].
pub const GRID_POINTS: usize = 512;
/// Grid half-margin beyond the data, in bandwidths.
pub const GRID_MARGIN: f64 = 3.0;
/// Fluctuation floor as a fraction of the peak density.
pub const FLUCTUATION_FLOOR: f64 = 0.01;

/// Kernel density estimate sampled on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

impl DensityCurve {
    /// Trapezoidal integral of the density over the grid.
    pub fn integral(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(x, d)| 0.5 * (d[0] + d[1]) * (x[1] - x[0]))
            .sum()
    }

    pub fn max_density(&self) -> f64 {
        self.density.iter().copied().fold(0.0, f64::max)
    }
}

/// Silverman's rule of thumb, `1.06 σ n^(-1/5)`.
pub fn silverman_bandwidth(values: &[f64]) -> f64 {
    1.06 * sample_std(values) * (values.len() as f64).powf(-0.2)
}

/// Gaussian KDE of `values` on a 512-point grid spanning
/// `[min - 3h, max + 3h]`.
pub fn kde_density(values: &[f64], bandwidth: Option<f64>) -> Result<DensityCurve> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.len() < 2 || !(max > min) {
        return Err(Error::DegenerateBandwidth);
    }
    let h = match bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be positive, got {h}"
            )))
        }
        None => silverman_bandwidth(values),
    };
    if !(h > 0.0) {
        return Err(Error::DegenerateBandwidth);
    }
    let lo = min - GRID_MARGIN * h;
    let hi = max + GRID_MARGIN * h;
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..GRID_POINTS).map(|i| lo + step * i as f64).collect();
    let norm = 1.0 / (values.len() as f64 * h * (2.0 * PI).sqrt());
    let density = grid
        .iter()
        .map(|&x| {
            values
                .iter()
                .map(|&v| {
                    let z = (x - v) / h;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
                * norm
        })
        .collect();
    Ok(DensityCurve {
        grid,
        density,
        bandwidth: h,
    })
}

/// Absolute finite-difference slope of the density per grid gap, plus
/// `FLUCTUATION_FLOOR · max(density)`.
pub fn fluctuation_measure(curve: &DensityCurve) -> Vec<f64> {
    let floor = FLUCTUATION_FLOOR * curve.max_density();
    curve
        .grid
        .windows(2)
        .zip(curve.density.windows(2))
        .map(|(x, d)| (d[1] - d[0]).abs() / (x[1] - x[0]) + floor)
        .collect()
}

/// How automatic division weights the target axis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivisionStrategy {
    /// Equal shares of integrated density fluctuation.
    #[default]
    Fluctuation,
    /// Equal shares of integrated density.
    Density,
}

/// `N - 1` strictly ascending cut points delimiting `N` intervals.
///
/// Interval 0 is `(-inf, c_1)`, interval `k` is `[c_k, c_{k+1})` and the last
/// interval is `[c_{N-1}, +inf)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SegmentationList {
    cuts: Vec<f64>,
}

impl SegmentationList {
    pub fn new(cuts: Vec<f64>) -> Result<Self> {
        if cuts.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("cut points must be finite".into()));
        }
        if cuts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "cut points must be strictly increasing".into(),
            ));
        }
        Ok(Self { cuts })
    }

    pub fn single() -> Self {
        Self { cuts: Vec::new() }
    }

    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    pub fn n_intervals(&self) -> usize {
        self.cuts.len() + 1
    }

    /// Index of the interval containing `value`.
    pub fn interval_of(&self, value: f64) -> usize {
        self.cuts.partition_point(|&c| c <= value)
    }

    /// Lower and upper cut of interval `k`; `None` where unbounded.
    pub fn bounds(&self, k: usize) -> (Option<f64>, Option<f64>) {
        let lower = k.checked_sub(1).map(|i| self.cuts[i]);
        let upper = self.cuts.get(k).copied();
        (lower, upper)
    }

    /// Counts of `values` per interval.
    pub fn counts(&self, values: &[f64]) -> Vec<usize> {
        let mut counts = vec![0; self.n_intervals()];
        for &v in values {
            counts[self.interval_of(v)] += 1;
        }
        counts
    }
}

impl TryFrom<Vec<f64>> for SegmentationList {
    type Error = Error;

    fn try_from(cuts: Vec<f64>) -> Result<Self> {
        Self::new(cuts)
    }
}

impl From<SegmentationList> for Vec<f64> {
    fn from(seg: SegmentationList) -> Self {
        seg.cuts
    }
}

/// Free-function form of [`SegmentationList::interval_of`].
pub fn interval_of(value: f64, seg: &SegmentationList) -> usize {
    seg.interval_of(value)
}

/// Unsnapped automatic cut positions: equal shares of the chosen weight,
/// integrated over the part of the KDE grid inside `[min, max]` of the data.
pub fn auto_cut_positions(
    targets: &[f64],
    n_intervals: usize,
    strategy: DivisionStrategy,
) -> Result<Vec<f64>> {
    if n_intervals <= 1 {
        return Ok(Vec::new());
    }
    let curve = kde_density(targets, None)?;
    let weights: Vec<f64> = match strategy {
        DivisionStrategy::Fluctuation => fluctuation_measure(&curve),
        DivisionStrategy::Density => curve
            .density
            .windows(2)
            .map(|d| 0.5 * (d[0] + d[1]))
            .collect(),
    };
    let min = targets.iter().copied().fold(f64::INFINITY, f64::min);
    let max = targets.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    // per-cell clipped extent and mass
    let cells: Vec<(f64, f64, f64)> = curve
        .grid
        .windows(2)
        .zip(&weights)
        .filter_map(|(x, &w)| {
            let a = x[0].max(min);
            let b = x[1].min(max);
            (b > a).then_some((a, b, w * (b - a)))
        })
        .collect();
    let total: f64 = cells.iter().map(|c| c.2).sum();

    let mut cuts = Vec::with_capacity(n_intervals - 1);
    let mut acc = 0.0;
    let mut cell = 0;
    for k in 1..n_intervals {
        let goal = total * k as f64 / n_intervals as f64;
        while cell < cells.len() - 1 && acc + cells[cell].2 < goal {
            acc += cells[cell].2;
            cell += 1;
        }
        let (a, b, m) = cells[cell];
        let frac = if m > 0.0 {
            ((goal - acc) / m).clamp(0.0, 1.0)
        } else {
            0.0
        };
        cuts.push(a + frac * (b - a));
    }
    Ok(cuts)
}

/// Moves each raw cut to the midpoint of the gap between adjacent distinct
/// sorted targets it falls in, forcing distinct gaps so no interval is empty.
fn snap_to_gaps(raw: &[f64], targets: &[f64]) -> Result<SegmentationList> {
    let mut distinct = sorted_copy(targets);
    distinct.dedup();
    let n_gaps = distinct.len().saturating_sub(1);
    if raw.len() > n_gaps {
        return Err(Error::TooManyIntervals {
            n_intervals: raw.len() + 1,
            distinct: distinct.len(),
        });
    }
    let mut gaps: Vec<usize> = raw
        .iter()
        .map(|&c| {
            let below = distinct.partition_point(|&u| u < c);
            below.saturating_sub(1).min(n_gaps - 1)
        })
        .collect();
    for k in 1..gaps.len() {
        gaps[k] = gaps[k].max(gaps[k - 1] + 1);
    }
    let last = gaps.len();
    for k in (0..last).rev() {
        let ceiling = n_gaps - (last - k);
        gaps[k] = gaps[k].min(ceiling);
        if k + 1 < last {
            gaps[k] = gaps[k].min(gaps[k + 1] - 1);
        }
    }
    let cuts: Vec<f64> = gaps
        .iter()
        .map(|&g| 0.5 * (distinct[g] + distinct[g + 1]))
        .collect();
    let seg = SegmentationList::new(cuts)?;
    if let Some(k) = seg.counts(targets).iter().position(|&c| c == 0) {
        return Err(Error::EmptyInterval(k));
    }
    Ok(seg)
}

/// Builds the initial segmentation of `targets` into `n_intervals`.
///
/// With `manual_ratios` the ratios are normalized by their sum and cut `k`
/// sits at the empirical quantile of the cumulative ratio; otherwise
/// [`auto_cut_positions`] decides.
pub fn initial_segmentation(
    targets: &[f64],
    n_intervals: usize,
    manual_ratios: Option<&[f64]>,
    strategy: DivisionStrategy,
) -> Result<SegmentationList> {
    if n_intervals == 0 {
        return Err(Error::InvalidParameter(
            "n_intervals must be at least 1".into(),
        ));
    }
    if let Some(ratios) = manual_ratios {
        if ratios.len() != n_intervals {
            return Err(Error::InvalidParameter(format!(
                "{} manual ratios given for {} intervals",
                ratios.len(),
                n_intervals
            )));
        }
        if ratios.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(Error::InvalidParameter(
                "manual ratios must be positive".into(),
            ));
        }
    }
    if n_intervals == 1 {
        return Ok(SegmentationList::single());
    }
    if targets.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let raw = match manual_ratios {
        Some(ratios) => {
            let total: f64 = ratios.iter().sum();
            let sorted = sorted_copy(targets);
            let mut acc = 0.0;
            ratios[..n_intervals - 1]
                .iter()
                .map(|r| {
                    acc += r;
                    quantile_sorted(&sorted, acc / total)
                })
                .collect()
        }
        None => {
            let mut distinct = sorted_copy(targets);
            distinct.dedup();
            if distinct.len() < n_intervals {
                return Err(Error::TooManyIntervals {
                    n_intervals,
                    distinct: distinct.len(),
                });
            }
            auto_cut_positions(targets, n_intervals, strategy)?
        }
    };
    snap_to_gaps(&raw, targets)
}
