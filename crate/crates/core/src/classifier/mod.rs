//! Interval classifiers trained on pseudo-labels.
//!
//! Three candidate kinds are fitted from scratch: a single CART tree, a
//! bagged random forest and one-vs-rest gradient-boosted trees. All of them
//! accept per-sample weights, which the refinement loop uses to push
//! misclassified samples harder in the next round.

mod boosting;
mod confusion;
mod forest;
mod tree;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::segmentation::SegmentationList;
use crate::stats::derive_seed;

pub use boosting::{BoostedTrees, BoostingParams};
pub use confusion::{classification_loss, ConfusionMatrix};
pub use forest::{ForestParams, RandomForest};
pub use tree::{MaxFeatures, Node, Tree, TreeParams};

use tree::{argmax, FeatureOrder, Gini};

/// Candidate classifier family. The declaration order is the tie-break order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    DecisionTree,
    RandomForest,
    GradientBoostedTrees,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [
        ClassifierKind::DecisionTree,
        ClassifierKind::RandomForest,
        ClassifierKind::GradientBoostedTrees,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::DecisionTree => "decision_tree",
            ClassifierKind::RandomForest => "random_forest",
            ClassifierKind::GradientBoostedTrees => "gradient_boosted_trees",
        }
    }

    fn stream(self) -> u64 {
        self as u64 + 1
    }
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Hyperparameters of every candidate kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierParams {
    pub tree: TreeParams,
    pub forest: ForestParams,
    pub boosting: BoostingParams,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        Self {
            tree: TreeParams {
                max_depth: 12,
                min_samples_leaf: 5,
            },
            forest: ForestParams::default(),
            boosting: BoostingParams::default(),
        }
    }
}

/// Single weighted-Gini CART tree; leaves store class shares.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub n_classes: usize,
    pub tree: Tree<Vec<f64>>,
}

impl DecisionTree {
    pub fn fit(
        features: &[Vec<f64>],
        labels: &[usize],
        weights: &[f64],
        n_classes: usize,
        params: TreeParams,
    ) -> Self {
        let order = FeatureOrder::new(features);
        Self::fit_ordered(features, &order, labels, weights, n_classes, params)
    }

    pub(crate) fn fit_ordered(
        features: &[Vec<f64>],
        order: &FeatureOrder,
        labels: &[usize],
        weights: &[f64],
        n_classes: usize,
        params: TreeParams,
    ) -> Self {
        let criterion = Gini {
            labels,
            weights,
            n_classes,
        };
        // no randomness is drawn when every feature is considered
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = tree::grow(
            features,
            order,
            &criterion,
            params,
            MaxFeatures::All,
            &mut rng,
        );
        Self { n_classes, tree }
    }

    pub fn class_shares(&self, row: &[f64]) -> &[f64] {
        self.tree.leaf_for(row)
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        argmax(self.class_shares(row))
    }
}

/// A fitted interval classifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierModel {
    DecisionTree(DecisionTree),
    RandomForest(RandomForest),
    GradientBoostedTrees(BoostedTrees),
}

impl ClassifierModel {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            ClassifierModel::DecisionTree(_) => ClassifierKind::DecisionTree,
            ClassifierModel::RandomForest(_) => ClassifierKind::RandomForest,
            ClassifierModel::GradientBoostedTrees(_) => ClassifierKind::GradientBoostedTrees,
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            ClassifierModel::DecisionTree(m) => m.n_classes,
            ClassifierModel::RandomForest(m) => m.n_classes,
            ClassifierModel::GradientBoostedTrees(m) => m.n_classes,
        }
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        match self {
            ClassifierModel::DecisionTree(m) => m.predict(row),
            ClassifierModel::RandomForest(m) => m.predict(row),
            ClassifierModel::GradientBoostedTrees(m) => m.predict(row),
        }
    }

    pub fn predict_all(&self, rows: &[Vec<f64>]) -> Vec<usize> {
        rows.iter().map(|r| self.predict(r)).collect()
    }
}

/// Interval index of every target: the classification labels.
pub fn pseudo_labels(targets: &[f64], seg: &SegmentationList) -> Vec<usize> {
    targets.iter().map(|&y| seg.interval_of(y)).collect()
}

fn validate_training(
    features: &[Vec<f64>],
    labels: &[usize],
    weights: &[f64],
    n_classes: usize,
) -> Result<()> {
    if features.len() != labels.len() {
        return Err(Error::LengthMismatch(features.len(), labels.len()));
    }
    if weights.len() != labels.len() {
        return Err(Error::LengthMismatch(weights.len(), labels.len()));
    }
    if n_classes == 0 || labels.len() < n_classes {
        return Err(Error::TooFewRows {
            needed: n_classes.max(1),
            got: labels.len(),
        });
    }
    if let Some(width) = features.first().map(Vec::len) {
        if let Some(bad) = features.iter().find(|r| r.len() != width) {
            return Err(Error::FeatureWidthMismatch {
                expected: width,
                got: bad.len(),
            });
        }
    }
    if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
        return Err(Error::InvalidParameter(
            "sample weights must be positive and finite".into(),
        ));
    }
    let mut seen = vec![false; n_classes];
    for &l in labels {
        if l >= n_classes {
            return Err(Error::InvalidParameter(format!(
                "label {l} outside 0..{n_classes}"
            )));
        }
        seen[l] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::MissingClass(missing));
    }
    Ok(())
}

/// Fits one model per requested kind. Each kind draws from its own RNG
/// stream derived from `(seed, kind)`, and kinds are fitted in parallel.
///
/// Weights are rescaled to mean 1 first, so only their ratios matter.
pub fn train_candidates(
    features: &[Vec<f64>],
    labels: &[usize],
    sample_weights: &[f64],
    n_classes: usize,
    kinds: &[ClassifierKind],
    params: &ClassifierParams,
    seed: u64,
) -> Result<Vec<ClassifierModel>> {
    validate_training(features, labels, sample_weights, n_classes)?;
    let mean = sample_weights.iter().sum::<f64>() / sample_weights.len() as f64;
    let weights: Vec<f64> = sample_weights.iter().map(|w| w / mean).collect();
    let order = FeatureOrder::new(features);
    let models = kinds
        .par_iter()
        .map(|&kind| {
            let kind_seed = derive_seed(seed, kind.stream());
            match kind {
                ClassifierKind::DecisionTree => {
                    ClassifierModel::DecisionTree(DecisionTree::fit_ordered(
                        features,
                        &order,
                        labels,
                        &weights,
                        n_classes,
                        params.tree,
                    ))
                }
                ClassifierKind::RandomForest => {
                    ClassifierModel::RandomForest(RandomForest::fit_ordered(
                        features,
                        &order,
                        labels,
                        &weights,
                        n_classes,
                        &params.forest,
                        kind_seed,
                    ))
                }
                ClassifierKind::GradientBoostedTrees => {
                    ClassifierModel::GradientBoostedTrees(BoostedTrees::fit_ordered(
                        features,
                        &order,
                        labels,
                        &weights,
                        n_classes,
                        &params.boosting,
                    ))
                }
            }
        })
        .collect();
    Ok(models)
}

/// Confusion of `model` against `labels`.
pub fn confusion(
    model: &ClassifierModel,
    features: &[Vec<f64>],
    labels: &[usize],
) -> ConfusionMatrix {
    let n = model
        .n_classes()
        .max(labels.iter().map(|&l| l + 1).max().unwrap_or(0));
    ConfusionMatrix::from_labels(labels, &model.predict_all(features), n)
}
