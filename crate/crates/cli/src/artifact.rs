//! Persisted model.

use std::path::Path;

use dca_core::dynamic::Warning;
use dca_core::{
    ClassifierKind, IntervalEnsemble, LossTrace, NormalizationParams, SegmentationList,
};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult, Stage};

/// Bumped whenever the serialized layout changes.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub format_version: u32,
    pub feature_names: Vec<String>,
    pub target_name: String,
    pub ensemble: IntervalEnsemble,
    pub normalization: NormalizationParams,
    /// Refined cut points, normalized target scale.
    pub segmentation: SegmentationList,
    pub initial_segmentation: SegmentationList,
    pub config: RunConfig,
    pub best_kind: ClassifierKind,
    pub dc_error: f64,
    pub trace: LossTrace,
    pub warnings: Vec<Warning>,
}

impl ModelArtifact {
    pub fn to_json(&self) -> CliResult<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| CliError::runtime(Stage::Artifact, e.to_string()))
    }

    /// Parses an artifact, rejecting any other format version.
    pub fn from_json(text: &str) -> CliResult<Self> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| CliError::invalid(Stage::Artifact, format!("not valid JSON: {e}")))?;
        let version = value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| CliError::invalid(Stage::Artifact, "missing format_version"))?;
        if version != u64::from(FORMAT_VERSION) {
            return Err(CliError::invalid(
                Stage::Artifact,
                format!("format version {version} is not supported (expected {FORMAT_VERSION})"),
            ));
        }
        serde_json::from_value(value).map_err(|e| CliError::invalid(Stage::Artifact, e.to_string()))
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        let text = self.to_json()?;
        std::fs::write(path, text).map_err(|e| {
            CliError::runtime(
                Stage::Output,
                format!("cannot write {}: {e}", path.display()),
            )
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::invalid(
                Stage::Artifact,
                format!("cannot read {}: {e}", path.display()),
            )
        })?;
        Self::from_json(&text)
    }
}
