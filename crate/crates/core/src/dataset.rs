//! Tabular data ingestion, preprocessing and seeded splitting.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{quantile_sorted, sorted_copy};

/// Which part of the pipeline a dataset plays.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Raw,
    Train,
    Test,
    TrainT,
    TrainP,
}

/// Feature matrix (row-major) plus target vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub column_names: Vec<String>,
    pub target_name: String,
    pub rows: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub role: Role,
}

impl Dataset {
    pub fn new(
        column_names: Vec<String>,
        target_name: impl Into<String>,
        rows: Vec<Vec<f64>>,
        targets: Vec<f64>,
    ) -> Result<Self> {
        if rows.len() != targets.len() {
            return Err(Error::LengthMismatch(rows.len(), targets.len()));
        }
        let width = column_names.len();
        for row in &rows {
            if row.len() != width {
                return Err(Error::FeatureWidthMismatch {
                    expected: width,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("non-finite feature value".into()));
            }
        }
        if targets.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite target value".into()));
        }
        Ok(Self {
            column_names,
            target_name: target_name.into(),
            rows,
            targets,
            role: Role::Raw,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.column_names.len()
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    /// Rows at `indices`, in the order given.
    pub fn subset(&self, indices: &[usize], role: Role) -> Dataset {
        Dataset {
            column_names: self.column_names.clone(),
            target_name: self.target_name.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            targets: indices.iter().map(|&i| self.targets[i]).collect(),
            role,
        }
    }

    /// Values of feature column `j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }
}

/// A parsed CSV: header plus cells, `None` for missing.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn read<R: Read>(reader: R) -> Result<Table> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (r, record) in rdr.records().enumerate() {
            let record = record?;
            let mut row = Vec::with_capacity(headers.len());
            for (c, cell) in record.iter().enumerate() {
                if cell.is_empty() {
                    row.push(None);
                    continue;
                }
                let v: f64 = cell.parse().map_err(|_| Error::NonNumericCell {
                    row: r,
                    column: headers.get(c).cloned().unwrap_or_default(),
                    value: cell.to_string(),
                })?;
                row.push(v.is_finite().then_some(v));
            }
            rows.push(row);
        }
        Ok(Table { headers, rows })
    }

    pub fn from_path(path: &Path) -> Result<Table> {
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Table::read(file)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }
}

/// Result of CSV ingestion.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub dataset: Dataset,
    /// Rows dropped because at least one cell was empty.
    pub dropped_count: usize,
}

impl Dataset {
    /// Splits a table into features and `target_column`; rows with any
    /// missing cell are dropped.
    pub fn from_table(table: &Table, target_column: &str) -> Result<Loaded> {
        let t = table
            .column_index(target_column)
            .ok_or_else(|| Error::MissingTargetColumn(target_column.to_string()))?;
        let column_names: Vec<String> = table
            .headers
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != t)
            .map(|(_, h)| h.clone())
            .collect();
        let mut rows = Vec::new();
        let mut targets = Vec::new();
        let mut dropped = 0;
        for raw in &table.rows {
            let complete: Option<Vec<f64>> = raw.iter().copied().collect();
            match complete {
                Some(values) if values.len() == table.headers.len() => {
                    targets.push(values[t]);
                    rows.push(
                        values
                            .iter()
                            .enumerate()
                            .filter(|&(i, _)| i != t)
                            .map(|(_, v)| *v)
                            .collect(),
                    );
                }
                _ => dropped += 1,
            }
        }
        if rows.is_empty() {
            return Err(Error::NoUsableRows);
        }
        let dataset = Dataset::new(column_names, target_column, rows, targets)?;
        Ok(Loaded {
            dataset,
            dropped_count: dropped,
        })
    }
}

/// Reads a headed numeric CSV and extracts `target_column`.
pub fn load_csv(path: &Path, target_column: &str) -> Result<Loaded> {
    let table = Table::from_path(path)?;
    Dataset::from_table(&table, target_column)
}

/// Inclusive bounds `[Q1 - m·IQR, Q3 + m·IQR]` per feature column, then the
/// target as the last entry.
pub fn iqr_bounds(ds: &Dataset, multiplier: f64) -> Result<Vec<(f64, f64)>> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(multiplier > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "IQR multiplier must be positive, got {multiplier}"
        )));
    }
    let bounds_of = |values: Vec<f64>| {
        let sorted = sorted_copy(&values);
        let q1 = quantile_sorted(&sorted, 0.25);
        let q3 = quantile_sorted(&sorted, 0.75);
        let iqr = q3 - q1;
        (q1 - multiplier * iqr, q3 + multiplier * iqr)
    };
    let mut bounds: Vec<(f64, f64)> = (0..ds.n_features())
        .map(|j| bounds_of(ds.column(j)))
        .collect();
    bounds.push(bounds_of(ds.targets.clone()));
    Ok(bounds)
}

/// Removes every row with any feature or target outside its IQR fence.
pub fn iqr_filter(ds: &Dataset, multiplier: f64) -> Result<(Dataset, usize)> {
    let bounds = iqr_bounds(ds, multiplier)?;
    let (target_bounds, feature_bounds) = bounds.split_last().expect("target bounds present");
    let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
    let keep: Vec<usize> = (0..ds.len())
        .filter(|&i| {
            inside(ds.targets[i], *target_bounds)
                && ds.rows[i]
                    .iter()
                    .zip(feature_bounds)
                    .all(|(&v, &b)| inside(v, b))
        })
        .collect();
    let removed = ds.len() - keep.len();
    Ok((ds.subset(&keep, ds.role), removed))
}

/// Observed range of one column.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnRange {
    pub min: f64,
    pub max: f64,
}

impl ColumnRange {
    pub fn of(values: &[f64]) -> Self {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { min, max }
    }

    pub fn is_constant(&self) -> bool {
        self.max == self.min
    }

    pub fn apply(&self, v: f64) -> f64 {
        if self.is_constant() {
            0.0
        } else {
            (v - self.min) / (self.max - self.min)
        }
    }

    pub fn invert(&self, v: f64) -> f64 {
        if self.is_constant() {
            self.min
        } else {
            v * (self.max - self.min) + self.min
        }
    }
}

/// Min-max parameters for every feature column and the target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub columns: Vec<ColumnRange>,
    pub target: ColumnRange,
}

impl NormalizationParams {
    pub fn fit(ds: &Dataset) -> Result<Self> {
        if ds.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(Self {
            columns: (0..ds.n_features())
                .map(|j| ColumnRange::of(&ds.column(j)))
                .collect(),
            target: ColumnRange::of(&ds.targets),
        })
    }

    /// Indices of columns that were constant when fitted.
    pub fn constant_columns(&self) -> Vec<usize> {
        (0..self.columns.len())
            .filter(|&j| self.columns[j].is_constant())
            .collect()
    }

    pub fn apply_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.columns.len() {
            return Err(Error::FeatureWidthMismatch {
                expected: self.columns.len(),
                got: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(&self.columns)
            .map(|(&v, c)| c.apply(v))
            .collect())
    }

    pub fn invert_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.columns)
            .map(|(&v, c)| c.invert(v))
            .collect()
    }

    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        let rows = ds
            .rows
            .iter()
            .map(|r| self.apply_row(r))
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            column_names: ds.column_names.clone(),
            target_name: ds.target_name.clone(),
            rows,
            targets: ds.targets.iter().map(|&y| self.target.apply(y)).collect(),
            role: ds.role,
        })
    }

    pub fn invert(&self, ds: &Dataset) -> Dataset {
        Dataset {
            column_names: ds.column_names.clone(),
            target_name: ds.target_name.clone(),
            rows: ds.rows.iter().map(|r| self.invert_row(r)).collect(),
            targets: ds.targets.iter().map(|&y| self.target.invert(y)).collect(),
            role: ds.role,
        }
    }
}

/// Min-max scales every column and the target to `[0, 1]`.
pub fn normalize(ds: &Dataset) -> Result<(Dataset, NormalizationParams)> {
    let params = NormalizationParams::fit(ds)?;
    Ok((params.apply(ds)?, params))
}

fn partition(n: usize, first_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    // ceil, with a guard so that e.g. 10 * 0.3 = 3.0000000000000004 stays 3
    let first = ((n as f64 * first_fraction) - 1e-9).ceil() as usize;
    let first = first.clamp(1, n - 1);
    let mut a = order[..first].to_vec();
    let mut b = order[first..].to_vec();
    a.sort_unstable();
    b.sort_unstable();
    (a, b)
}

/// Seeded uniform random train/test partition. Odd remainders go to `train`.
pub fn split(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    if ds.len() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            got: ds.len(),
        });
    }
    let (a, b) = partition(ds.len(), train_fraction, seed);
    Ok((ds.subset(&a, Role::Train), ds.subset(&b, Role::Test)))
}

/// 1:1 split of the training set into the classifier-fitting half
/// (`train_t`) and the validation half (`train_p`).
pub fn split_tt(train: &Dataset, seed: u64) -> Result<(Dataset, Dataset)> {
    if train.len() < 4 {
        return Err(Error::TooFewRows {
            needed: 4,
            got: train.len(),
        });
    }
    let (a, b) = partition(train.len(), 0.5, seed);
    Ok((
        train.subset(&a, Role::TrainT),
        train.subset(&b, Role::TrainP),
    ))
}
