//! Exact-split CART builder shared by the tree-based classifiers.
//!
//! Sample order per feature is computed once ([`FeatureOrder`]) and each
//! split partitions those lists stably, so a level costs `O(n · p)`.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Sample indices sorted ascending by each feature (ties by index).
#[derive(Clone, Debug)]
pub(crate) struct FeatureOrder {
    pub(crate) per_feature: Vec<Vec<u32>>,
}

impl FeatureOrder {
    pub(crate) fn new(features: &[Vec<f64>]) -> Self {
        let n_features = features.first().map_or(0, Vec::len);
        let per_feature = (0..n_features)
            .map(|j| {
                let mut idx: Vec<u32> = (0..features.len() as u32).collect();
                idx.sort_by(|&a, &b| {
                    features[a as usize][j]
                        .total_cmp(&features[b as usize][j])
                        .then(a.cmp(&b))
                });
                idx
            })
            .collect();
        Self { per_feature }
    }

    /// Same order restricted to samples where `keep` is true.
    pub(crate) fn restricted(&self, keep: &[bool]) -> Self {
        Self {
            per_feature: self
                .per_feature
                .iter()
                .map(|l| l.iter().copied().filter(|&i| keep[i as usize]).collect())
                .collect(),
        }
    }
}

/// Node statistics accumulator defining the split objective.
///
/// The gain of a split is `quality(left) + quality(right) - quality(parent)`.
pub(crate) trait Criterion {
    type Stats: Clone;
    type Leaf;

    fn zero(&self) -> Self::Stats;
    fn add(&self, stats: &mut Self::Stats, sample: usize);
    fn remainder(&self, total: &Self::Stats, part: &Self::Stats) -> Self::Stats;
    fn quality(&self, stats: &Self::Stats) -> f64;
    fn leaf(&self, stats: &Self::Stats) -> Self::Leaf;
}

/// Features considered at each split.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    All,
    Sqrt,
}

impl MaxFeatures {
    fn count(self, n_features: usize) -> usize {
        match self {
            MaxFeatures::All => n_features,
            MaxFeatures::Sqrt => ((n_features as f64).sqrt().round() as usize).clamp(1, n_features),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node<L> {
    Leaf(L),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree<L> {
    pub nodes: Vec<Node<L>>,
}

impl<L> Tree<L> {
    pub fn leaf_for(&self, row: &[f64]) -> &L {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf(l) => return l,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf(_)))
            .count()
    }
}

struct Builder<'a, C: Criterion, R: Rng> {
    features: &'a [Vec<f64>],
    criterion: &'a C,
    params: TreeParams,
    max_features: MaxFeatures,
    rng: &'a mut R,
    goes_left: Vec<bool>,
    nodes: Vec<Node<C::Leaf>>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

const MIN_GAIN: f64 = 1e-12;

impl<C: Criterion, R: Rng> Builder<'_, C, R> {
    fn push(&mut self, node: Node<C::Leaf>) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    fn build(&mut self, lists: Vec<Vec<u32>>, depth: usize) -> usize {
        let n = lists[0].len();
        let mut total = self.criterion.zero();
        for &i in &lists[0] {
            self.criterion.add(&mut total, i as usize);
        }
        let min_leaf = self.params.min_samples_leaf.max(1);
        if depth >= self.params.max_depth || n < 2 * min_leaf {
            let leaf = self.criterion.leaf(&total);
            return self.push(Node::Leaf(leaf));
        }

        let n_features = lists.len();
        let k = self.max_features.count(n_features);
        let candidates: Vec<usize> = if k >= n_features {
            (0..n_features).collect()
        } else {
            let mut v = sample(self.rng, n_features, k).into_vec();
            v.sort_unstable();
            v
        };

        let parent_quality = self.criterion.quality(&total);
        let mut best: Option<BestSplit> = None;
        for &f in &candidates {
            let list = &lists[f];
            let mut left = self.criterion.zero();
            for pos in 0..n - 1 {
                let i = list[pos] as usize;
                self.criterion.add(&mut left, i);
                let n_left = pos + 1;
                if n_left < min_leaf {
                    continue;
                }
                if n - n_left < min_leaf {
                    break;
                }
                let x = self.features[i][f];
                let x_next = self.features[list[pos + 1] as usize][f];
                if x == x_next {
                    continue;
                }
                let right = self.criterion.remainder(&total, &left);
                let gain =
                    self.criterion.quality(&left) + self.criterion.quality(&right) - parent_quality;
                if gain > best.as_ref().map_or(MIN_GAIN, |b| b.gain) {
                    let mut threshold = x + (x_next - x) / 2.0;
                    if threshold >= x_next {
                        threshold = x;
                    }
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        gain,
                    });
                }
            }
        }

        let Some(split) = best else {
            let leaf = self.criterion.leaf(&total);
            return self.push(Node::Leaf(leaf));
        };

        for &i in &lists[0] {
            self.goes_left[i as usize] =
                self.features[i as usize][split.feature] <= split.threshold;
        }
        let mut left_lists = Vec::with_capacity(n_features);
        let mut right_lists = Vec::with_capacity(n_features);
        for list in lists {
            let (l, r): (Vec<u32>, Vec<u32>) =
                list.into_iter().partition(|&i| self.goes_left[i as usize]);
            left_lists.push(l);
            right_lists.push(r);
        }

        // reserve the split slot so children follow their parent
        let at = self.push(Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: 0,
            right: 0,
        });
        let left = self.build(left_lists, depth + 1);
        let right = self.build(right_lists, depth + 1);
        if let Node::Split {
            left: l, right: r, ..
        } = &mut self.nodes[at]
        {
            *l = left;
            *r = right;
        }
        at
    }
}

/// Grows a tree over the samples listed in `order` (all of them must share
/// the same sample set per feature).
pub(crate) fn grow<C: Criterion, R: Rng>(
    features: &[Vec<f64>],
    order: &FeatureOrder,
    criterion: &C,
    params: TreeParams,
    max_features: MaxFeatures,
    rng: &mut R,
) -> Tree<C::Leaf> {
    let mut builder = Builder {
        features,
        criterion,
        params,
        max_features,
        rng,
        goes_left: vec![false; features.len()],
        nodes: Vec::new(),
    };
    if order.per_feature.is_empty() {
        // no features: a single leaf over every sample
        let mut total = criterion.zero();
        for i in 0..features.len() {
            criterion.add(&mut total, i);
        }
        builder.nodes.push(Node::Leaf(criterion.leaf(&total)));
    } else {
        builder.build(order.per_feature.clone(), 0);
    }
    Tree {
        nodes: builder.nodes,
    }
}

/// Weighted Gini criterion over class labels; leaves hold class shares.
pub(crate) struct Gini<'a> {
    pub labels: &'a [usize],
    pub weights: &'a [f64],
    pub n_classes: usize,
}

impl Criterion for Gini<'_> {
    type Stats = Vec<f64>;
    type Leaf = Vec<f64>;

    fn zero(&self) -> Vec<f64> {
        vec![0.0; self.n_classes]
    }

    fn add(&self, stats: &mut Vec<f64>, sample: usize) {
        stats[self.labels[sample]] += self.weights[sample];
    }

    fn remainder(&self, total: &Vec<f64>, part: &Vec<f64>) -> Vec<f64> {
        total.iter().zip(part).map(|(t, p)| t - p).collect()
    }

    // W·(1 - gini) = Σ c²/W; maximizing it minimizes weighted impurity
    fn quality(&self, stats: &Vec<f64>) -> f64 {
        let w: f64 = stats.iter().sum();
        if w <= 0.0 {
            return 0.0;
        }
        stats.iter().map(|c| c * c).sum::<f64>() / w
    }

    fn leaf(&self, stats: &Vec<f64>) -> Vec<f64> {
        let w: f64 = stats.iter().sum();
        if w <= 0.0 {
            return vec![1.0 / self.n_classes as f64; self.n_classes];
        }
        stats.iter().map(|c| c / w).collect()
    }
}

/// Second-order (Newton) criterion for boosting; leaves hold the step.
pub(crate) struct Newton<'a> {
    pub gradients: &'a [f64],
    pub hessians: &'a [f64],
    pub lambda: f64,
}

impl Criterion for Newton<'_> {
    type Stats = (f64, f64);
    type Leaf = f64;

    fn zero(&self) -> (f64, f64) {
        (0.0, 0.0)
    }

    fn add(&self, stats: &mut (f64, f64), sample: usize) {
        stats.0 += self.gradients[sample];
        stats.1 += self.hessians[sample];
    }

    fn remainder(&self, total: &(f64, f64), part: &(f64, f64)) -> (f64, f64) {
        (total.0 - part.0, total.1 - part.1)
    }

    fn quality(&self, &(g, h): &(f64, f64)) -> f64 {
        g * g / (h + self.lambda)
    }

    fn leaf(&self, &(g, h): &(f64, f64)) -> f64 {
        -g / (h + self.lambda)
    }
}

/// Index of the largest value; ties resolve to the lowest index.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
