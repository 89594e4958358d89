//! Run configuration, read from a JSON document.

use std::path::{Path, PathBuf};

use dca_core::baselines::{BaselineMethod, SyntheticSpec};
use dca_core::classifier::ClassifierParams;
use dca_core::dynamic::{ConvergenceConfig, DynamicConfig};
use dca_core::exclusion::{ExclusionConfig, DEFAULT_EXPANSION};
use dca_core::interval::{RegressorKind, REDUNDANCY_DIVISOR};
use dca_core::metrics::EvalSettings;
use dca_core::segmentation::DivisionStrategy;
use dca_core::ClassifierKind;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult, Stage};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExclusionSection {
    /// One factor for every interval.
    pub factor: f64,
    /// Per-interval factors; overrides `factor` when present.
    pub factors: Option<Vec<f64>>,
    pub drop_first: bool,
    pub drop_last: bool,
}

impl Default for ExclusionSection {
    fn default() -> Self {
        Self {
            factor: DEFAULT_EXPANSION,
            factors: None,
            drop_first: false,
            drop_last: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// CSV input; exactly one of `input` and `synthetic` must be set.
    pub input: Option<PathBuf>,
    pub synthetic: Option<SyntheticSpec>,
    pub target: String,
    pub seed: u64,
    /// Seeds for `compare`; empty means just `seed`.
    pub seeds: Vec<u64>,
    /// Share of rows used for training; the rest is the test set.
    pub train_fraction: f64,
    /// `None` disables the outlier filter.
    pub iqr_multiplier: Option<f64>,
    pub n_intervals: usize,
    pub manual_ratios: Option<Vec<f64>>,
    pub division: DivisionStrategy,
    pub kinds: Vec<ClassifierKind>,
    pub classifier: ClassifierParams,
    pub max_iterations: usize,
    pub acceptable_loss: f64,
    pub convergence: ConvergenceConfig,
    pub correction_step: f64,
    pub exclusion: ExclusionSection,
    pub regressor: RegressorKind,
    pub redundancy_divisor: usize,
    pub baselines: Vec<BaselineMethod>,
    /// Cluster count for KC and GC; defaults to `n_intervals`.
    pub n_clusters: Option<usize>,
    pub taus: Vec<f64>,
    /// Tolerance separating accurate from inaccurate predictions in the
    /// miss/overkill accounting.
    pub accuracy_tau: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let dynamic = DynamicConfig::default();
        let eval = EvalSettings::default();
        Self {
            input: None,
            synthetic: None,
            target: "y".into(),
            seed: 0,
            seeds: Vec::new(),
            train_fraction: 0.8,
            iqr_multiplier: Some(1.5),
            n_intervals: dynamic.n_intervals,
            manual_ratios: None,
            division: dynamic.division,
            kinds: dynamic.kinds,
            classifier: dynamic.classifier,
            max_iterations: dynamic.max_iterations,
            acceptable_loss: dynamic.acceptable_loss,
            convergence: dynamic.convergence,
            correction_step: dynamic.correction_step,
            exclusion: ExclusionSection::default(),
            regressor: RegressorKind::default(),
            redundancy_divisor: REDUNDANCY_DIVISOR,
            baselines: BaselineMethod::ALL.to_vec(),
            n_clusters: None,
            taus: eval.taus,
            accuracy_tau: eval.accuracy_tau,
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::invalid(Stage::Config, msg)
}

impl RunConfig {
    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every field; nothing is computed or written before this passes.
    pub fn validate(&self) -> CliResult<()> {
        match (&self.input, &self.synthetic) {
            (Some(_), Some(_)) => return Err(invalid("set only one of input and synthetic")),
            (None, None) => return Err(invalid("one of input or synthetic is required")),
            (Some(p), None) if !p.is_file() => {
                return Err(invalid(format!(
                    "input file {} does not exist",
                    p.display()
                )))
            }
            _ => {}
        }
        if self.target.is_empty() {
            return Err(invalid("target column name is empty"));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(invalid("train_fraction must lie in (0, 1)"));
        }
        if let Some(m) = self.iqr_multiplier {
            if !(m >= 0.0 && m.is_finite()) {
                return Err(invalid("iqr_multiplier must be finite and non-negative"));
            }
        }
        if self.n_intervals == 0 {
            return Err(invalid("n_intervals must be at least 1"));
        }
        if let Some(r) = &self.manual_ratios {
            if r.len() != self.n_intervals {
                return Err(invalid(format!(
                    "{} manual ratios for {} intervals",
                    r.len(),
                    self.n_intervals
                )));
            }
            if r.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(invalid("manual ratios must be positive"));
            }
        }
        if self.kinds.is_empty() {
            return Err(invalid("at least one classifier kind is required"));
        }
        if self.max_iterations == 0 {
            return Err(invalid("max_iterations must be positive"));
        }
        if !(self.correction_step > 0.0 && self.correction_step <= 0.5) {
            return Err(invalid("correction_step must lie in (0, 0.5]"));
        }
        if self.redundancy_divisor == 0 {
            return Err(invalid("redundancy_divisor must be positive"));
        }
        self.exclusion_config()
            .validate(self.n_intervals)
            .map_err(|e| invalid(e.to_string()))?;
        if self.n_clusters == Some(0) {
            return Err(invalid("n_clusters must be positive"));
        }
        if self.taus.iter().any(|t| !(*t > 0.0 && t.is_finite()))
            || !(self.accuracy_tau > 0.0 && self.accuracy_tau.is_finite())
        {
            return Err(invalid("accuracy tolerances must be positive"));
        }
        if let Some(s) = &self.synthetic {
            dca_core::baselines::generate_synthetic(&SyntheticSpec {
                n_samples: 2,
                ..s.clone()
            })
            .map_err(|e| invalid(format!("synthetic: {e}")))?;
        }
        Ok(())
    }

    pub fn dynamic_config(&self, seed: u64) -> DynamicConfig {
        DynamicConfig {
            n_intervals: self.n_intervals,
            manual_ratios: self.manual_ratios.clone(),
            division: self.division,
            kinds: self.kinds.clone(),
            classifier: self.classifier.clone(),
            max_iterations: self.max_iterations,
            convergence: self.convergence,
            acceptable_loss: self.acceptable_loss,
            correction_step: self.correction_step,
            seed,
        }
    }

    pub fn exclusion_config(&self) -> ExclusionConfig {
        ExclusionConfig {
            factors: self
                .exclusion
                .factors
                .clone()
                .unwrap_or_else(|| vec![self.exclusion.factor; self.n_intervals]),
            drop_first: self.exclusion.drop_first,
            drop_last: self.exclusion.drop_last,
        }
    }

    pub fn eval_settings(&self) -> EvalSettings {
        EvalSettings {
            taus: self.taus.clone(),
            accuracy_tau: self.accuracy_tau,
            scale: None,
        }
    }

    pub fn seed_list(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            vec![self.seed]
        } else {
            self.seeds.clone()
        }
    }

    pub fn cluster_count(&self) -> usize {
        self.n_clusters.unwrap_or(self.n_intervals)
    }
}
