//! The iterative boundary-refinement loop.
//!
//! Each round pseudo-labels both training halves from the current cut
//! points, fits every candidate classifier on `train_t`, scores it on
//! `train_p`, and then re-weights samples and moves cut points toward the
//! side where the round's best classifier disagrees most.

use serde::{Deserialize, Serialize};

use crate::classifier::{
    classification_loss, pseudo_labels, train_candidates, ClassifierKind, ClassifierModel,
    ClassifierParams, ConfusionMatrix,
};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::segmentation::{initial_segmentation, DivisionStrategy, SegmentationList};
use crate::stats::{mean, population_std, sorted_copy};

/// Misclassification-degree penalty `(x / n)² + 1`.
pub fn degree_penalty(x: usize, n: usize) -> f64 {
    let r = x as f64 / n as f64;
    r * r + 1.0
}

/// Secondary penalty on the number of misclassified samples of a class, `m²`.
pub fn count_penalty(m: usize) -> f64 {
    (m as f64) * (m as f64)
}

/// Per-sample and per-class penalties from one round's predictions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyRecord {
    pub n_intervals: usize,
    /// `|true - predicted|` interval distance per sample.
    pub degrees: Vec<usize>,
    /// [`degree_penalty`] of each degree.
    pub degree_penalties: Vec<f64>,
    /// Misclassified samples per true class.
    pub misclassified_per_class: Vec<usize>,
    /// [`count_penalty`] per class.
    pub count_penalties: Vec<f64>,
}

pub fn penalty_record(
    true_labels: &[usize],
    predicted: &[usize],
    n_intervals: usize,
) -> Result<PenaltyRecord> {
    if true_labels.len() != predicted.len() {
        return Err(Error::LengthMismatch(true_labels.len(), predicted.len()));
    }
    let degrees: Vec<usize> = true_labels
        .iter()
        .zip(predicted)
        .map(|(&t, &p)| t.abs_diff(p))
        .collect();
    let mut per_class = vec![0usize; n_intervals];
    for (&t, &d) in true_labels.iter().zip(&degrees) {
        if d > 0 {
            per_class[t] += 1;
        }
    }
    Ok(PenaltyRecord {
        n_intervals,
        degree_penalties: degrees
            .iter()
            .map(|&d| degree_penalty(d, n_intervals))
            .collect(),
        count_penalties: per_class.iter().map(|&m| count_penalty(m)).collect(),
        misclassified_per_class: per_class,
        degrees,
    })
}

/// Training weights for the next round: a misclassified sample of class `c`
/// gets `Y · (1 + m_c² / M²)` where `M` is the total misclassified count;
/// everything else gets 1. The result is rescaled to mean 1.
pub fn build_sample_weights(penalties: &PenaltyRecord, labels: &[usize]) -> Vec<f64> {
    let total: usize = penalties.misclassified_per_class.iter().sum();
    let total_sq = count_penalty(total);
    let raw: Vec<f64> = labels
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            if penalties.degrees[i] == 0 {
                1.0
            } else {
                penalties.degree_penalties[i] * (1.0 + penalties.count_penalties[c] / total_sq)
            }
        })
        .collect();
    let m = mean(&raw);
    raw.iter().map(|w| w / m).collect()
}

fn next_above(sorted: &[f64], value: f64) -> Option<f64> {
    let i = sorted.partition_point(|&v| v <= value);
    sorted.get(i).copied()
}

/// Shifts each cut toward the side with more penalty-weighted contested
/// validation samples.
///
/// For cut `c_k` between intervals `k-1` and `k`, samples truly in `k` but
/// predicted below `k` pull it up, samples truly in `k-1` but predicted at
/// or above `k` pull it down (each weighted by [`degree_penalty`]). The
/// winning side moves the cut past its `ceil(step_fraction · count)`-th
/// nearest contested target; equal pulls leave it alone. Moves are clamped
/// so that cuts stay ordered and every interval keeps a `train_t` sample.
pub fn correct_boundaries(
    seg: &SegmentationList,
    train_t_targets: &[f64],
    train_p_targets: &[f64],
    true_labels: &[usize],
    predicted: &[usize],
    step_fraction: f64,
) -> Result<SegmentationList> {
    if !(step_fraction > 0.0 && step_fraction <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "correction step must lie in (0, 0.5], got {step_fraction}"
        )));
    }
    if true_labels.len() != train_p_targets.len() || predicted.len() != true_labels.len() {
        return Err(Error::LengthMismatch(
            true_labels.len(),
            train_p_targets.len(),
        ));
    }
    let n = seg.n_intervals();
    let mut cuts = seg.cuts().to_vec();
    let t_sorted = sorted_copy(train_t_targets);
    let mut all_sorted = t_sorted.clone();
    all_sorted.extend_from_slice(train_p_targets);
    all_sorted.sort_by(f64::total_cmp);

    for j in 0..cuts.len() {
        let k = j + 1;
        let mut up = Vec::new();
        let mut down = Vec::new();
        let (mut pull_up, mut pull_down) = (0.0, 0.0);
        for i in 0..true_labels.len() {
            let (t, p) = (true_labels[i], predicted[i]);
            if t == k && p < k {
                pull_up += degree_penalty(t - p, n);
                up.push(train_p_targets[i]);
            } else if t == k - 1 && p >= k {
                pull_down += degree_penalty(p - t, n);
                down.push(train_p_targets[i]);
            }
        }
        let old = cuts[j];
        let lower_edge = if j > 0 {
            cuts[j - 1]
        } else {
            f64::NEG_INFINITY
        };
        let upper_edge = cuts.get(j + 1).copied().unwrap_or(f64::INFINITY);

        if pull_up > pull_down {
            up.sort_by(f64::total_cmp);
            let m = ((step_fraction * up.len() as f64).ceil() as usize).clamp(1, up.len());
            let pivot = up[m - 1];
            let Some(next) = next_above(&all_sorted, pivot) else {
                continue;
            };
            // keep the largest train_t target of interval k inside it
            let lo = t_sorted.partition_point(|&v| v < old);
            let hi = t_sorted.partition_point(|&v| v < upper_edge);
            if hi <= lo {
                continue;
            }
            let keep = t_sorted[hi - 1];
            let candidate = (0.5 * (pivot + next)).min(keep).min(next);
            if candidate > old && candidate < upper_edge {
                cuts[j] = candidate;
            }
        } else if pull_down > pull_up {
            down.sort_by(|a, b| b.total_cmp(a));
            let m = ((step_fraction * down.len() as f64).ceil() as usize).clamp(1, down.len());
            let mut candidate = down[m - 1];
            // keep the smallest train_t target of interval k-1 inside it
            let lo = t_sorted.partition_point(|&v| v < lower_edge);
            let hi = t_sorted.partition_point(|&v| v < old);
            if hi <= lo {
                continue;
            }
            let keep = t_sorted[lo];
            if candidate <= keep {
                match next_above(&all_sorted, keep) {
                    Some(next) => candidate = 0.5 * (keep + next),
                    None => continue,
                }
            }
            if candidate < old && candidate > lower_edge && candidate > keep {
                cuts[j] = candidate;
            }
        }
    }
    SegmentationList::new(cuts)
}

/// Blend of best loss and recent loss: `0.5·min + 0.5·mean(last 10)`;
/// shorter lists average everything they have.
pub fn score(loss_list: &[f64]) -> f64 {
    debug_assert!(!loss_list.is_empty());
    let best = loss_list.iter().copied().fold(f64::INFINITY, f64::min);
    let tail = &loss_list[loss_list.len().saturating_sub(10)..];
    0.5 * best + 0.5 * mean(tail)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convergence {
    Continue,
    Stalled,
    Unstable,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvergenceConfig {
    pub stall_window: usize,
    pub stall_tolerance: f64,
    pub instability_window: usize,
    /// Population standard deviation of the recent losses above which the
    /// run is flagged unstable.
    pub instability_threshold: f64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            stall_window: 15,
            stall_tolerance: 1e-12,
            instability_window: 10,
            instability_threshold: 0.05,
        }
    }
}

pub fn convergence_check(loss_list: &[f64], cfg: &ConvergenceConfig) -> Convergence {
    let n = loss_list.len();
    if n >= cfg.stall_window && cfg.stall_window > 0 {
        let tail = &loss_list[n - cfg.stall_window..];
        let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo <= cfg.stall_tolerance {
            return Convergence::Stalled;
        }
    }
    if n >= cfg.instability_window && cfg.instability_window > 0 {
        let tail = &loss_list[n - cfg.instability_window..];
        if population_std(tail) > cfg.instability_threshold {
            return Convergence::Unstable;
        }
    }
    Convergence::Continue
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DynamicConfig {
    pub n_intervals: usize,
    pub manual_ratios: Option<Vec<f64>>,
    pub division: DivisionStrategy,
    pub kinds: Vec<ClassifierKind>,
    pub classifier: ClassifierParams,
    pub max_iterations: usize,
    pub convergence: ConvergenceConfig,
    /// Stop as soon as some candidate's validation loss is at most this.
    pub acceptable_loss: f64,
    pub correction_step: f64,
    pub seed: u64,
}

impl Default for DynamicConfig {
    fn default() -> Self {
        Self {
            n_intervals: 4,
            manual_ratios: None,
            division: DivisionStrategy::default(),
            kinds: ClassifierKind::ALL.to_vec(),
            classifier: ClassifierParams::default(),
            max_iterations: 50,
            convergence: ConvergenceConfig::default(),
            acceptable_loss: 0.0,
            correction_step: 0.25,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KindTrace {
    pub kind: ClassifierKind,
    pub losses: Vec<f64>,
    pub best_loss: f64,
    pub best_iteration: usize,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossTrace {
    pub kinds: Vec<KindTrace>,
}

impl LossTrace {
    pub fn get(&self, kind: ClassifierKind) -> Option<&KindTrace> {
        self.kinds.iter().find(|k| k.kind == kind)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "warning", rename_all = "snake_case")]
pub enum Warning {
    Stalled {
        kind: ClassifierKind,
        iteration: usize,
    },
    Unstable {
        kind: ClassifierKind,
        iteration: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicClassificationResult {
    pub best_kind: ClassifierKind,
    pub model: ClassifierModel,
    pub segmentation: SegmentationList,
    pub initial_segmentation: SegmentationList,
    /// Segmentation used in each iteration.
    pub segmentation_history: Vec<SegmentationList>,
    pub trace: LossTrace,
    /// Best validation loss of the winning kind.
    pub dc_error: f64,
    pub confusion: ConfusionMatrix,
    pub iterations: usize,
    pub warnings: Vec<Warning>,
}

struct KindState {
    kind: ClassifierKind,
    losses: Vec<f64>,
    best: Option<(
        f64,
        usize,
        SegmentationList,
        ClassifierModel,
        ConfusionMatrix,
    )>,
    stalled: bool,
    unstable: bool,
}

/// Runs the refinement loop and returns the winning classifier with its
/// best segmentation.
pub fn run_dynamic_classification(
    train_t: &Dataset,
    train_p: &Dataset,
    cfg: &DynamicConfig,
) -> Result<DynamicClassificationResult> {
    if cfg.kinds.is_empty() {
        return Err(Error::InvalidParameter(
            "no classifier kinds requested".into(),
        ));
    }
    if cfg.max_iterations == 0 {
        return Err(Error::InvalidParameter(
            "max_iterations must be positive".into(),
        ));
    }
    if train_p.is_empty() {
        return Err(Error::TooFewRows { needed: 1, got: 0 });
    }
    if train_t.n_features() != train_p.n_features() {
        return Err(Error::FeatureWidthMismatch {
            expected: train_t.n_features(),
            got: train_p.n_features(),
        });
    }
    let mut kinds = cfg.kinds.clone();
    kinds.sort();
    kinds.dedup();

    let n = cfg.n_intervals;
    let initial = initial_segmentation(
        &train_t.targets,
        n,
        cfg.manual_ratios.as_deref(),
        cfg.division,
    )?;
    let mut seg = initial.clone();
    let mut history = Vec::new();
    let mut weights = vec![1.0; train_t.len()];
    let mut states: Vec<KindState> = kinds
        .iter()
        .map(|&kind| KindState {
            kind,
            losses: Vec::new(),
            best: None,
            stalled: false,
            unstable: false,
        })
        .collect();
    let mut warnings = Vec::new();
    let mut iterations = 0;

    for it in 0..cfg.max_iterations {
        history.push(seg.clone());
        let labels_t = pseudo_labels(&train_t.targets, &seg);
        let labels_p = pseudo_labels(&train_p.targets, &seg);
        let models = train_candidates(
            &train_t.rows,
            &labels_t,
            &weights,
            n,
            &kinds,
            &cfg.classifier,
            cfg.seed,
        )?;
        iterations = it + 1;

        let mut round: Vec<(f64, Vec<usize>)> = Vec::with_capacity(models.len());
        for (state, model) in states.iter_mut().zip(&models) {
            let predicted = model.predict_all(&train_p.rows);
            let cm = ConfusionMatrix::from_labels(&labels_p, &predicted, n);
            let loss = classification_loss(&cm)?;
            state.losses.push(loss);
            if state.best.as_ref().map_or(true, |b| loss < b.0) {
                state.best = Some((loss, it, seg.clone(), model.clone(), cm));
            }
            match convergence_check(&state.losses, &cfg.convergence) {
                Convergence::Stalled if !state.stalled => {
                    state.stalled = true;
                    warnings.push(Warning::Stalled {
                        kind: state.kind,
                        iteration: it,
                    });
                }
                Convergence::Unstable if !state.unstable => {
                    state.unstable = true;
                    warnings.push(Warning::Unstable {
                        kind: state.kind,
                        iteration: it,
                    });
                }
                _ => {}
            }
            round.push((loss, predicted));
        }

        let (driver, driver_loss) =
            round
                .iter()
                .enumerate()
                .map(|(i, r)| (i, r.0))
                .fold(
                    (0, f64::INFINITY),
                    |acc, x| if x.1 < acc.1 { x } else { acc },
                );
        let all_stalled = states.iter().all(|s| s.stalled);
        if driver_loss <= cfg.acceptable_loss || all_stalled || it + 1 == cfg.max_iterations {
            break;
        }

        // the round's best model drives both penalty channels
        let predicted_t = models[driver].predict_all(&train_t.rows);
        let penalties = penalty_record(&labels_t, &predicted_t, n)?;
        weights = build_sample_weights(&penalties, &labels_t);
        seg = correct_boundaries(
            &seg,
            &train_t.targets,
            &train_p.targets,
            &labels_p,
            &round[driver].1,
            cfg.correction_step,
        )?;
    }

    let traces: Vec<KindTrace> = states
        .iter()
        .map(|s| {
            let (best_loss, best_iteration) = s
                .best
                .as_ref()
                .map(|b| (b.0, b.1))
                .expect("at least one iteration ran");
            KindTrace {
                kind: s.kind,
                losses: s.losses.clone(),
                best_loss,
                best_iteration,
                score: score(&s.losses),
            }
        })
        .collect();
    let winner = (0..traces.len())
        .min_by(|&a, &b| {
            let (ta, tb) = (&traces[a], &traces[b]);
            ta.score
                .total_cmp(&tb.score)
                .then(ta.best_loss.total_cmp(&tb.best_loss))
                .then(ta.kind.cmp(&tb.kind))
        })
        .expect("at least one kind");
    let (dc_error, _, segmentation, model, confusion) = states
        .swap_remove(winner)
        .best
        .expect("at least one iteration ran");

    Ok(DynamicClassificationResult {
        best_kind: traces[winner].kind,
        model,
        segmentation,
        initial_segmentation: initial,
        segmentation_history: history,
        trace: LossTrace { kinds: traces },
        dc_error,
        confusion,
        iterations,
        warnings,
    })
}
