use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressorKind {
    #[default]
    OrdinaryLeastSquares,
}

/// Linear model `intercept + coefficients · x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressorModel {
    pub kind: RegressorKind,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
}

impl RegressorModel {
    pub fn predict(&self, row: &[f64]) -> f64 {
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(row)
                .map(|(c, x)| c * x)
                .sum::<f64>()
    }
}

/// Least squares with intercept. The slope vector is the minimum-norm
/// solution on centred data, so rank-deficient designs are fine.
pub fn fit_ols(rows: &[Vec<f64>], targets: &[f64]) -> Result<RegressorModel> {
    let n = rows.len();
    if n != targets.len() {
        return Err(Error::LengthMismatch(n, targets.len()));
    }
    if n < 2 {
        return Err(Error::TooFewRows { needed: 2, got: n });
    }
    let p = rows[0].len();
    if p == 0 {
        return Err(Error::InvalidParameter(
            "at least one feature is required".into(),
        ));
    }
    let x_mean: Vec<f64> = (0..p)
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();
    let y_mean = targets.iter().sum::<f64>() / n as f64;
    let design = DMatrix::from_fn(n, p, |i, j| rows[i][j] - x_mean[j]);
    let response = DVector::from_iterator(n, targets.iter().map(|y| y - y_mean));

    let svd = design.svd(true, true);
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let coefficients: Vec<f64> = if sigma_max == 0.0 {
        vec![0.0; p]
    } else {
        let eps = sigma_max * n.max(p) as f64 * f64::EPSILON;
        svd.solve(&response, eps)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .iter()
            .copied()
            .collect()
    };
    let intercept = y_mean
        - coefficients
            .iter()
            .zip(&x_mean)
            .map(|(c, m)| c * m)
            .sum::<f64>();
    Ok(RegressorModel {
        kind: RegressorKind::OrdinaryLeastSquares,
        coefficients,
        intercept,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| 2.0 * i as f64 + 1.0).collect();
        let m = fit_ols(&rows, &y).unwrap();
        assert!((m.coefficients[0] - 2.0).abs() < 1e-9);
        assert!((m.intercept - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_target() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let m = fit_ols(&rows, &[4.0; 6]).unwrap();
        assert!(m.coefficients.iter().all(|c| c.abs() < 1e-12));
        assert!((m.intercept - 4.0).abs() < 1e-12);
    }

    #[test]
    fn duplicated_column_splits_weight_evenly() {
        // min-norm on collinear columns gives equal halves
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64, i as f64]).collect();
        let y: Vec<f64> = (0..8).map(|i| 3.0 * i as f64).collect();
        let m = fit_ols(&rows, &y).unwrap();
        assert!((m.coefficients[0] - 1.5).abs() < 1e-9);
        assert!((m.coefficients[1] - 1.5).abs() < 1e-9);
        assert!(m.intercept.abs() < 1e-9);
    }

    #[test]
    fn too_few_rows() {
        assert!(matches!(
            fit_ols(&[vec![1.0]], &[1.0]),
            Err(Error::TooFewRows { .. })
        ));
    }
}
