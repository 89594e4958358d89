//! Reference pipelines: one global regressor (DP), and cluster-then-regress
//! with k-means (KC) or a Gaussian mixture (GC) over the features. Also a
//! synthetic data generator.

mod gmm;
mod kmeans;
mod synthetic;

use serde::{Deserialize, Serialize};

use crate::dataset::{ColumnRange, Dataset};
use crate::error::{Error, Result};
use crate::interval::{fit_ols, RegressorModel};
use crate::metrics::{EvalSettings, EvaluationReport, View};

pub use gmm::GaussianMixture;
pub use kmeans::{kmeans, nearest, KMeans};
pub use synthetic::{generate_synthetic, SyntheticSpec, TargetDistribution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaselineMethod {
    #[serde(rename = "DP")]
    DirectPrediction,
    #[serde(rename = "KC")]
    KMeansClusters,
    #[serde(rename = "GC")]
    GaussianClusters,
}

impl BaselineMethod {
    pub const ALL: [BaselineMethod; 3] = [
        BaselineMethod::DirectPrediction,
        BaselineMethod::KMeansClusters,
        BaselineMethod::GaussianClusters,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Self::DirectPrediction => "DP",
            Self::KMeansClusters => "KC",
            Self::GaussianClusters => "GC",
        }
    }
}

/// How baseline predictions are scored.
#[derive(Clone, Copy, Debug)]
pub struct Scoring<'a> {
    /// Raw-unit truth per test row.
    pub truths: &'a [f64],
    /// Maps model-space predictions back to raw units; `None` when the
    /// model already works in raw units.
    pub target_range: Option<&'a ColumnRange>,
    pub settings: &'a EvalSettings,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub method: BaselineMethod,
    pub n_clusters: Option<usize>,
    /// Raw-unit predictions, one per test row.
    pub predictions: Vec<f64>,
    pub report: EvaluationReport,
}

fn finish(
    method: BaselineMethod,
    n_clusters: Option<usize>,
    model_space: Vec<f64>,
    scoring: &Scoring,
) -> Result<BaselineResult> {
    if scoring.truths.len() != model_space.len() {
        return Err(Error::LengthMismatch(
            scoring.truths.len(),
            model_space.len(),
        ));
    }
    let predictions: Vec<f64> = match scoring.target_range {
        Some(r) => model_space.iter().map(|&p| r.invert(p)).collect(),
        None => model_space,
    };
    let excluded = vec![false; predictions.len()];
    let report = EvaluationReport::compute(
        scoring.truths,
        &predictions,
        &excluded,
        View::AllRows,
        scoring.settings,
        None,
    )?;
    Ok(BaselineResult {
        method,
        n_clusters,
        predictions,
        report,
    })
}

fn check_widths(train: &Dataset, test: &Dataset) -> Result<()> {
    if train.n_features() != test.n_features() {
        return Err(Error::FeatureWidthMismatch {
            expected: train.n_features(),
            got: test.n_features(),
        });
    }
    Ok(())
}

/// One regressor per cluster, in train row order. Clusters with fewer than
/// two training rows fall back to the global regressor.
fn per_cluster_predict(
    train: &Dataset,
    test: &Dataset,
    train_assign: &[usize],
    test_assign: &[usize],
    k: usize,
) -> Result<Vec<f64>> {
    let global = fit_ols(&train.rows, &train.targets)?;
    let models: Vec<RegressorModel> = (0..k)
        .map(|c| {
            let idx: Vec<usize> = (0..train.len()).filter(|&i| train_assign[i] == c).collect();
            if idx.len() < 2 {
                return Ok(global.clone());
            }
            let rows: Vec<Vec<f64>> = idx.iter().map(|&i| train.rows[i].clone()).collect();
            let targets: Vec<f64> = idx.iter().map(|&i| train.targets[i]).collect();
            fit_ols(&rows, &targets)
        })
        .collect::<Result<_>>()?;
    Ok(test
        .rows
        .iter()
        .zip(test_assign)
        .map(|(r, &c)| models[c].predict(r))
        .collect())
}

pub fn baseline_dp(train: &Dataset, test: &Dataset, scoring: &Scoring) -> Result<BaselineResult> {
    check_widths(train, test)?;
    let model = fit_ols(&train.rows, &train.targets)?;
    let preds = test.rows.iter().map(|r| model.predict(r)).collect();
    finish(BaselineMethod::DirectPrediction, None, preds, scoring)
}

pub fn baseline_kmeans(
    train: &Dataset,
    test: &Dataset,
    k: usize,
    seed: u64,
    scoring: &Scoring,
) -> Result<BaselineResult> {
    check_widths(train, test)?;
    let km = kmeans(&train.rows, k, seed)?;
    let preds = per_cluster_predict(
        train,
        test,
        &km.assign(&train.rows),
        &km.assign(&test.rows),
        k,
    )?;
    finish(BaselineMethod::KMeansClusters, Some(k), preds, scoring)
}

pub fn baseline_gmm(
    train: &Dataset,
    test: &Dataset,
    k: usize,
    seed: u64,
    scoring: &Scoring,
) -> Result<BaselineResult> {
    check_widths(train, test)?;
    let gmm = GaussianMixture::fit(&train.rows, k, seed)?;
    let preds = per_cluster_predict(
        train,
        test,
        &gmm.assign(&train.rows),
        &gmm.assign(&test.rows),
        k,
    )?;
    finish(BaselineMethod::GaussianClusters, Some(k), preds, scoring)
}
