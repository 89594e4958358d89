//! In-process pipeline shared by every command.

use dca_core::baselines::{
    baseline_dp, baseline_gmm, baseline_kmeans, generate_synthetic, BaselineMethod, Scoring,
};
use dca_core::dataset::{iqr_filter, load_csv, split, split_tt};
use dca_core::dynamic::run_dynamic_classification;
use dca_core::exclusion::{apply_exclusion, exclusion_summary, ExclusionSummary};
use dca_core::interval::build_ensemble;
use dca_core::metrics::{EvalSettings, EvaluationReport, View, WithinRatio};
use dca_core::{
    ClassifierKind, Dataset, DynamicClassificationResult, IntervalEnsemble, NormalizationParams,
    PredictionOutcome,
};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{AtStage, CliError, CliResult, Stage};

/// Loads the configured data source. Returns the dataset and the number of
/// rows dropped for missing or non-finite values.
pub fn load(cfg: &RunConfig) -> CliResult<(Dataset, usize)> {
    if let Some(spec) = &cfg.synthetic {
        let ds = generate_synthetic(spec).at(Stage::Load)?;
        return Ok((ds, 0));
    }
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| CliError::invalid(Stage::Config, "no input configured"))?;
    let loaded = load_csv(path, &cfg.target).at(Stage::Load)?;
    Ok((loaded.dataset, loaded.dropped_count))
}

/// Data after outlier filtering, normalization and both splits.
///
/// Normalization is fitted once on the filtered data, before splitting.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub dropped_rows: usize,
    pub outliers_removed: usize,
    pub normalization: NormalizationParams,
    pub train: Dataset,
    pub test: Dataset,
    /// Raw-unit targets of `test`.
    pub test_truths: Vec<f64>,
    pub train_t: Dataset,
    pub train_p: Dataset,
}

/// Seed of the Train_t / Train_p split, distinct from the train/test split.
pub fn tt_seed(seed: u64) -> u64 {
    seed.wrapping_add(1)
}

pub fn prepare(
    ds: &Dataset,
    dropped_rows: usize,
    cfg: &RunConfig,
    seed: u64,
) -> CliResult<Prepared> {
    let (filtered, outliers_removed) = match cfg.iqr_multiplier {
        Some(m) => iqr_filter(ds, m).at(Stage::Preprocess)?,
        None => (ds.clone(), 0),
    };
    let normalization = NormalizationParams::fit(&filtered).at(Stage::Preprocess)?;
    let normalized = normalization.apply(&filtered).at(Stage::Preprocess)?;
    let (train, test) = split(&normalized, cfg.train_fraction, seed).at(Stage::Preprocess)?;
    let (_, raw_test) = split(&filtered, cfg.train_fraction, seed).at(Stage::Preprocess)?;
    let (train_t, train_p) = split_tt(&train, tt_seed(seed)).at(Stage::Preprocess)?;
    Ok(Prepared {
        dropped_rows,
        outliers_removed,
        normalization,
        train,
        test,
        test_truths: raw_test.targets,
        train_t,
        train_p,
    })
}

/// Output of the training stages.
#[derive(Clone, Debug)]
pub struct Fitted {
    pub dynamic: DynamicClassificationResult,
    pub ensemble: IntervalEnsemble,
}

pub fn fit(prepared: &Prepared, cfg: &RunConfig, seed: u64) -> CliResult<Fitted> {
    let dynamic = run_dynamic_classification(
        &prepared.train_t,
        &prepared.train_p,
        &cfg.dynamic_config(seed),
    )
    .map_err(|e| {
        let stage = match e {
            dca_core::Error::TooManyIntervals { .. }
            | dca_core::Error::DegenerateBandwidth
            | dca_core::Error::EmptyInterval(_) => Stage::Segmentation,
            _ => Stage::DynamicLoop,
        };
        CliError::core(stage, e)
    })?;
    let ensemble = build_ensemble(
        &prepared.train,
        &dynamic,
        &prepared.normalization,
        cfg.exclusion_config(),
        cfg.redundancy_divisor,
    )
    .at(Stage::IntervalModels)?;
    Ok(Fitted { dynamic, ensemble })
}

/// Test-set predictions scored with and without the exclusion rule.
#[derive(Clone, Debug)]
pub struct Scored {
    pub outcomes: Vec<PredictionOutcome>,
    pub summary: ExclusionSummary,
    /// Every prediction kept.
    pub dc: EvaluationReport,
    /// Excluded predictions removed.
    pub dc_e: EvaluationReport,
}

/// Settings for scoring test predictions: MSE on the normalized target
/// scale, relative metrics in raw units.
pub fn scaled_settings(cfg: &RunConfig, normalization: &NormalizationParams) -> EvalSettings {
    EvalSettings {
        scale: Some(normalization.target),
        ..cfg.eval_settings()
    }
}

pub fn score_test(prepared: &Prepared, fitted: &Fitted, cfg: &RunConfig) -> CliResult<Scored> {
    let ens = &fitted.ensemble;
    let raw = ens
        .predict_normalized(&prepared.test.rows)
        .at(Stage::Predict)?;
    let outcomes = apply_exclusion(raw, &ens.ranges);
    let summary = exclusion_summary(&outcomes, ens.n_intervals()).at(Stage::Evaluate)?;
    let preds: Vec<f64> = outcomes.iter().map(|o| o.prediction).collect();
    let flags: Vec<bool> = outcomes.iter().map(|o| o.excluded).collect();
    let settings = scaled_settings(cfg, &prepared.normalization);
    let dc_error = Some(fitted.dynamic.dc_error);
    let dc = EvaluationReport::compute(
        &prepared.test_truths,
        &preds,
        &vec![false; preds.len()],
        View::AllRows,
        &settings,
        dc_error,
    )
    .at(Stage::Evaluate)?;
    let dc_e = EvaluationReport::compute(
        &prepared.test_truths,
        &preds,
        &flags,
        View::RetainedOnly,
        &settings,
        dc_error,
    )
    .at(Stage::Evaluate)?;
    Ok(Scored {
        outcomes,
        summary,
        dc,
        dc_e,
    })
}

/// One method's line in a comparison table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub seed: u64,
    pub method: String,
    pub n_intervals: Option<usize>,
    pub n_clusters: Option<usize>,
    pub mse: f64,
    pub r2: f64,
    pub average_accuracy: f64,
    pub within: Vec<WithinRatio>,
    pub excluded_rate: f64,
    pub missed_count: usize,
    pub overkill_count: usize,
    pub dc_error: Option<f64>,
}

impl CompareRow {
    fn from_report(
        seed: u64,
        method: &str,
        n_intervals: Option<usize>,
        n_clusters: Option<usize>,
        r: &EvaluationReport,
    ) -> Self {
        Self {
            seed,
            method: method.to_string(),
            n_intervals,
            n_clusters,
            mse: r.mse,
            r2: r.r2,
            average_accuracy: r.average_accuracy,
            within: r.within.clone(),
            excluded_rate: r.excluded_rate,
            missed_count: r.missed_count,
            overkill_count: r.overkill_count,
            dc_error: r.dc_error,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub best_kind: ClassifierKind,
    pub iterations: usize,
    pub dc_error: f64,
    pub rows: Vec<CompareRow>,
}

impl SeedReport {
    pub fn row(&self, method: &str) -> Option<&CompareRow> {
        self.rows.iter().find(|r| r.method == method)
    }
}

/// Runs the baselines and the full pipeline on one seed's split.
pub fn compare_seed(
    ds: &Dataset,
    dropped: usize,
    cfg: &RunConfig,
    seed: u64,
) -> CliResult<SeedReport> {
    let prepared = prepare(ds, dropped, cfg, seed)?;
    let settings = scaled_settings(cfg, &prepared.normalization);
    let scoring = Scoring {
        truths: &prepared.test_truths,
        target_range: Some(&prepared.normalization.target),
        settings: &settings,
    };
    let k = cfg.cluster_count();
    let mut rows = Vec::new();
    for &method in &cfg.baselines {
        let result = match method {
            BaselineMethod::DirectPrediction => {
                baseline_dp(&prepared.train, &prepared.test, &scoring)
            }
            BaselineMethod::KMeansClusters => {
                baseline_kmeans(&prepared.train, &prepared.test, k, seed, &scoring)
            }
            BaselineMethod::GaussianClusters => {
                baseline_gmm(&prepared.train, &prepared.test, k, seed, &scoring)
            }
        }
        .at(Stage::Baselines)?;
        rows.push(CompareRow::from_report(
            seed,
            method.code(),
            None,
            result.n_clusters,
            &result.report,
        ));
    }
    let fitted = fit(&prepared, cfg, seed)?;
    let scored = score_test(&prepared, &fitted, cfg)?;
    let n = Some(cfg.n_intervals);
    rows.push(CompareRow::from_report(seed, "DC", n, None, &scored.dc));
    rows.push(CompareRow::from_report(seed, "DC-E", n, None, &scored.dc_e));
    Ok(SeedReport {
        seed,
        n_train: prepared.train.len(),
        n_test: prepared.test.len(),
        best_kind: fitted.dynamic.best_kind,
        iterations: fitted.dynamic.iterations,
        dc_error: fitted.dynamic.dc_error,
        rows,
    })
}
