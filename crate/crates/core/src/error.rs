use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the dynamic classification library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("target column `{0}` not found in header")]
    MissingTargetColumn(String),

    #[error("cell `{value}` in column `{column}` (row {row}) is not a number")]
    NonNumericCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("no usable rows")]
    NoUsableRows,

    #[error("empty dataset")]
    EmptyDataset,

    #[error("too few rows: need at least {needed}, got {got}")]
    TooFewRows { needed: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("feature width mismatch: expected {expected}, got {got}")]
    FeatureWidthMismatch { expected: usize, got: usize },

    #[error("all values are identical; density bandwidth is degenerate")]
    DegenerateBandwidth,

    #[error("{n_intervals} intervals requested but only {distinct} distinct target values")]
    TooManyIntervals { n_intervals: usize, distinct: usize },

    #[error("interval {0} is empty")]
    EmptyInterval(usize),

    #[error("class {0} is absent from the training labels")]
    MissingClass(usize),

    #[error("confusion matrix is empty")]
    EmptyConfusion,

    #[error("truth values are constant; R² is undefined")]
    ConstantTruth,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("{k} clusters requested but only {distinct} distinct rows")]
    TooManyClusters { k: usize, distinct: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
