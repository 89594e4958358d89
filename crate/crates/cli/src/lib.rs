//! Command layer over `dca-core`: run configuration, model artifacts and
//! the `train`, `predict`, `evaluate`, `compare` and `synth` commands.

pub mod artifact;
pub mod commands;
pub mod config;
pub mod error;
pub mod pipeline;

pub use artifact::{ModelArtifact, FORMAT_VERSION};
pub use config::RunConfig;
pub use error::{CliError, CliResult, Stage};
