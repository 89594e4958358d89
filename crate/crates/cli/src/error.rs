use std::fmt;

use dca_core::Error as CoreError;

/// Pipeline stage a failure is attributed to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Config,
    Load,
    Preprocess,
    Segmentation,
    DynamicLoop,
    IntervalModels,
    Baselines,
    Predict,
    Evaluate,
    Artifact,
    Output,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Load => "load",
            Stage::Preprocess => "preprocess",
            Stage::Segmentation => "segmentation",
            Stage::DynamicLoop => "dynamic_loop",
            Stage::IntervalModels => "interval_models",
            Stage::Baselines => "baselines",
            Stage::Predict => "predict",
            Stage::Evaluate => "evaluate",
            Stage::Artifact => "artifact",
            Stage::Output => "output",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    /// Bad configuration or input data; exit code 2.
    Invalid,
    /// Failure while computing or writing; exit code 1.
    Runtime,
}

#[derive(Debug, thiserror::Error)]
#[error("{stage}: {message}")]
pub struct CliError {
    pub stage: Stage,
    pub severity: Severity,
    pub message: String,
}

impl CliError {
    pub fn invalid(stage: Stage, message: impl Into<String>) -> Self {
        Self {
            stage,
            severity: Severity::Invalid,
            message: message.into(),
        }
    }

    pub fn runtime(stage: Stage, message: impl Into<String>) -> Self {
        Self {
            stage,
            severity: Severity::Runtime,
            message: message.into(),
        }
    }

    /// Wraps a library error; input and parameter problems count as invalid.
    pub fn core(stage: Stage, err: CoreError) -> Self {
        let severity = match err {
            CoreError::Io { .. }
            | CoreError::Csv(_)
            | CoreError::MissingTargetColumn(_)
            | CoreError::NonNumericCell { .. }
            | CoreError::NoUsableRows
            | CoreError::EmptyDataset
            | CoreError::InvalidParameter(_)
            | CoreError::FeatureWidthMismatch { .. }
            | CoreError::LengthMismatch(..) => Severity::Invalid,
            _ => Severity::Runtime,
        };
        Self {
            stage,
            severity,
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.severity {
            Severity::Invalid => 2,
            Severity::Runtime => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Attaches a stage to library results.
pub trait AtStage<T> {
    fn at(self, stage: Stage) -> CliResult<T>;
}

impl<T> AtStage<T> for dca_core::Result<T> {
    fn at(self, stage: Stage) -> CliResult<T> {
        self.map_err(|e| CliError::core(stage, e))
    }
}
