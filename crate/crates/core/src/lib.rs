//! Dynamic classification for tabular regression.
//!
//! The target range of a regression problem is cut into `N` contiguous
//! intervals. A classifier learns to route samples to intervals from their
//! features, the cut points are refined iteratively from its confusion on a
//! held-out half of the training data, one regressor is fitted per interval
//! and predictions that leave their interval's (expanded) range are flagged
//! as unreliable.
//!
//! Pipeline, bottom up:
//!
//! - [`dataset`]: CSV ingestion, IQR outlier filter, min-max normalization, seeded splits.
//! - [`segmentation`]: Gaussian KDE of the targets and the initial cut points.
//! - [`classifier`]: decision tree, random forest and boosted-tree interval classifiers.
//! - [`dynamic`]: the iterative boundary-refinement loop.
//! - [`interval`]: redundant per-interval training sets, OLS regressors, routed prediction.
//! - [`exclusion`]: valid ranges and the reject rule.
//! - [`metrics`]: MSE, R², within-τ ratios, miss/overkill accounting.
//! - [`baselines`]: direct prediction, k-means and GMM cluster-then-regress, synthetic data.

pub mod baselines;
pub mod classifier;
pub mod dataset;
pub mod dynamic;
pub mod error;
pub mod exclusion;
pub mod interval;
pub mod metrics;
pub mod segmentation;
pub(crate) mod stats;

pub use classifier::{ClassifierKind, ClassifierModel, ConfusionMatrix};
pub use dataset::{Dataset, NormalizationParams, Role};
pub use dynamic::{DynamicClassificationResult, DynamicConfig, LossTrace};
pub use error::{Error, Result};
pub use exclusion::{ExclusionConfig, ValidRange};
pub use interval::{IntervalEnsemble, PredictionOutcome, RegressorModel};
pub use metrics::EvaluationReport;
pub use segmentation::SegmentationList;
