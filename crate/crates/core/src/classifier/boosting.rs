use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{argmax, grow, FeatureOrder, MaxFeatures, Newton, Tree, TreeParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoostingParams {
    pub rounds: usize,
    pub learning_rate: f64,
    pub tree: TreeParams,
    /// L2 penalty on leaf values.
    pub lambda: f64,
}

impl Default for BoostingParams {
    fn default() -> Self {
        Self {
            rounds: 100,
            learning_rate: 0.1,
            tree: TreeParams {
                max_depth: 6,
                min_samples_leaf: 5,
            },
            lambda: 1.0,
        }
    }
}

/// A regression tree with the shrinkage it was accepted with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledTree {
    pub step: f64,
    pub tree: Tree<f64>,
}

/// One-vs-rest logistic gradient boosting with Newton leaf values.
///
/// Each round's shrinkage is halved until the class's weighted training
/// loss does not increase, so the recorded loss history is non-increasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostedTrees {
    pub n_classes: usize,
    pub base_scores: Vec<f64>,
    pub trees: Vec<Vec<ScaledTree>>,
    /// Weighted mean training loss summed over classes, before each round
    /// and after the last.
    pub loss_history: Vec<f64>,
}

const MAX_HALVINGS: usize = 12;

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logistic_loss(scores: &[f64], targets: &[f64], weights: &[f64]) -> f64 {
    scores
        .iter()
        .zip(targets)
        .zip(weights)
        .map(|((&f, &y), &w)| w * (softplus(f) - y * f))
        .sum()
}

impl BoostedTrees {
    pub fn fit(
        features: &[Vec<f64>],
        labels: &[usize],
        weights: &[f64],
        n_classes: usize,
        params: &BoostingParams,
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
        params: &BoostingParams,
    ) -> Self {
        let n = labels.len();
        let total_weight: f64 = weights.iter().sum();
        if n_classes <= 1 {
            return Self {
                n_classes,
                base_scores: vec![0.0; n_classes],
                trees: vec![Vec::new(); n_classes],
                loss_history: vec![0.0; params.rounds + 1],
            };
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut base_scores = Vec::with_capacity(n_classes);
        let mut trees = Vec::with_capacity(n_classes);
        let mut history = vec![0.0; params.rounds + 1];

        for class in 0..n_classes {
            let targets: Vec<f64> = labels
                .iter()
                .map(|&l| f64::from(u8::from(l == class)))
                .collect();
            let positive: f64 = targets.iter().zip(weights).map(|(y, w)| y * w).sum();
            let prior = (positive / total_weight).clamp(1e-6, 1.0 - 1e-6);
            let base = (prior / (1.0 - prior)).ln();
            let mut scores = vec![base; n];
            let mut loss = logistic_loss(&scores, &targets, weights);
            history[0] += loss / total_weight;

            let mut class_trees = Vec::new();
            let mut gradients = vec![0.0; n];
            let mut hessians = vec![0.0; n];
            for round in 0..params.rounds {
                for i in 0..n {
                    let p = sigmoid(scores[i]);
                    gradients[i] = weights[i] * (p - targets[i]);
                    hessians[i] = weights[i] * p * (1.0 - p);
                }
                let criterion = Newton {
                    gradients: &gradients,
                    hessians: &hessians,
                    lambda: params.lambda,
                };
                let tree = grow(
                    features,
                    order,
                    &criterion,
                    params.tree,
                    MaxFeatures::All,
                    &mut rng,
                );
                let deltas: Vec<f64> = features.iter().map(|r| *tree.leaf_for(r)).collect();

                let mut step = params.learning_rate;
                let mut accepted = None;
                for _ in 0..MAX_HALVINGS {
                    let trial: Vec<f64> = scores
                        .iter()
                        .zip(&deltas)
                        .map(|(s, d)| s + step * d)
                        .collect();
                    let trial_loss = logistic_loss(&trial, &targets, weights);
                    if trial_loss <= loss {
                        accepted = Some((trial, trial_loss));
                        break;
                    }
                    step *= 0.5;
                }
                if let Some((trial, trial_loss)) = accepted {
                    scores = trial;
                    loss = trial_loss;
                    class_trees.push(ScaledTree { step, tree });
                }
                history[round + 1] += loss / total_weight;
            }
            base_scores.push(base);
            trees.push(class_trees);
        }
        Self {
            n_classes,
            base_scores,
            trees,
            loss_history: history,
        }
    }

    pub fn scores(&self, row: &[f64]) -> Vec<f64> {
        self.base_scores
            .iter()
            .zip(&self.trees)
            .map(|(base, trees)| {
                base + trees
                    .iter()
                    .map(|t| t.step * t.tree.leaf_for(row))
                    .sum::<f64>()
            })
            .collect()
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        if self.n_classes <= 1 {
            return 0;
        }
        argmax(&self.scores(row))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn training_loss_never_increases() {
        let x: Vec<Vec<f64>> = (0..150)
            .map(|i| vec![((i * 31) % 150) as f64 / 10.0, ((i * 17) % 13) as f64])
            .collect();
        // noisy labels so the booster cannot reach zero loss
        let y: Vec<usize> = x
            .iter()
            .enumerate()
            .map(|(i, r)| (r[0] as usize / 5 + usize::from(i % 7 == 0)) % 3)
            .collect();
        let w: Vec<f64> = (0..150).map(|i| 1.0 + (i % 4) as f64 * 0.5).collect();
        let model = BoostedTrees::fit(&x, &y, &w, 3, &BoostingParams::default());
        assert_eq!(model.loss_history.len(), 101);
        for pair in model.loss_history.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12, "{pair:?}");
        }
        assert!(model.loss_history[100] < model.loss_history[0]);
    }

    #[test]
    fn single_class_predicts_zero() {
        let x = vec![vec![1.0], vec![2.0]];
        let model = BoostedTrees::fit(&x, &[0, 0], &[1.0, 1.0], 1, &BoostingParams::default());
        assert_eq!(model.predict(&[5.0]), 0);
    }
}
