use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{argmax, grow, FeatureOrder, Gini, MaxFeatures, Tree, TreeParams};
use crate::stats::derive_seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub tree: TreeParams,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
            tree: TreeParams {
                max_depth: 12,
                min_samples_leaf: 5,
            },
        }
    }
}

/// Bagged Gini trees; prediction averages the leaves' class shares.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub n_classes: usize,
    pub trees: Vec<Tree<Vec<f64>>>,
}

impl RandomForest {
    pub fn fit(
        features: &[Vec<f64>],
        labels: &[usize],
        weights: &[f64],
        n_classes: usize,
        params: &ForestParams,
        seed: u64,
    ) -> Self {
        let order = FeatureOrder::new(features);
        Self::fit_ordered(features, &order, labels, weights, n_classes, params, seed)
    }

    pub(crate) fn fit_ordered(
        features: &[Vec<f64>],
        order: &FeatureOrder,
        labels: &[usize],
        weights: &[f64],
        n_classes: usize,
        params: &ForestParams,
        seed: u64,
    ) -> Self {
        let n = labels.len();
        let trees = (0..params.n_trees.max(1))
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64));
                if params.bootstrap {
                    let mut counts = vec![0u32; n];
                    for _ in 0..n {
                        counts[rng.random_range(0..n)] += 1;
                    }
                    let keep: Vec<bool> = counts.iter().map(|&c| c > 0).collect();
                    let boot_weights: Vec<f64> = weights
                        .iter()
                        .zip(&counts)
                        .map(|(w, &c)| w * f64::from(c))
                        .collect();
                    let criterion = Gini {
                        labels,
                        weights: &boot_weights,
                        n_classes,
                    };
                    grow(
                        features,
                        &order.restricted(&keep),
                        &criterion,
                        params.tree,
                        params.max_features,
                        &mut rng,
                    )
                } else {
                    let criterion = Gini {
                        labels,
                        weights,
                        n_classes,
                    };
                    grow(
                        features,
                        order,
                        &criterion,
                        params.tree,
                        params.max_features,
                        &mut rng,
                    )
                }
            })
            .collect();
        Self { n_classes, trees }
    }

    pub fn class_shares(&self, row: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.n_classes];
        for tree in &self.trees {
            for (a, s) in acc.iter_mut().zip(tree.leaf_for(row)) {
                *a += s;
            }
        }
        let k = self.trees.len() as f64;
        acc.iter_mut().for_each(|a| *a /= k);
        acc
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        argmax(&self.class_shares(row))
    }
}

#[cfg(test)]
mod tests {
    use super::super::DecisionTree;
    use super::*;

    #[test]
    fn single_full_tree_matches_decision_tree() {
        let x: Vec<Vec<f64>> = (0..80)
            .map(|i| {
                vec![
                    ((i * 13) % 80) as f64,
                    ((i * 7) % 11) as f64,
                    (i % 4) as f64,
                ]
            })
            .collect();
        let y: Vec<usize> = x
            .iter()
            .map(|r| ((r[0] + 3.0 * r[2]) as usize / 20) % 3)
            .collect();
        let w: Vec<f64> = (0..80).map(|i| 1.0 + (i % 2) as f64).collect();
        let tree = TreeParams {
            max_depth: 12,
            min_samples_leaf: 5,
        };
        let params = ForestParams {
            n_trees: 1,
            max_features: MaxFeatures::All,
            bootstrap: false,
            tree,
        };
        let forest = RandomForest::fit(&x, &y, &w, 3, &params, 99);
        let single = DecisionTree::fit(&x, &y, &w, 3, tree);
        assert_eq!(forest.trees[0], single.tree);
        for row in &x {
            assert_eq!(forest.predict(row), single.predict(row));
        }
    }

    #[test]
    fn bootstrap_trees_differ() {
        let x: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64, (i % 9) as f64]).collect();
        let y: Vec<usize> = (0..100)
            .map(|i| usize::from((i % 9) > 4) ^ usize::from(i > 50))
            .collect();
        let forest = RandomForest::fit(&x, &y, &[1.0; 100], 2, &ForestParams::default(), 1);
        assert_eq!(forest.trees.len(), 100);
        assert!(forest.trees.iter().any(|t| t != &forest.trees[0]));
    }
}
