use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square confusion matrix; rows are true intervals, columns predicted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    n: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(n_classes: usize) -> Self {
        Self {
            n: n_classes,
            counts: vec![0; n_classes * n_classes],
        }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Self {
        let n = rows.len();
        let mut cm = Self::new(n);
        for (t, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "confusion matrix must be square");
            for (p, &c) in row.iter().enumerate() {
                cm.counts[t * n + p] = c;
            }
        }
        cm
    }

    pub fn from_labels(truth: &[usize], predicted: &[usize], n_classes: usize) -> Self {
        let mut cm = Self::new(n_classes);
        for (&t, &p) in truth.iter().zip(predicted) {
            cm.record(t, p);
        }
        cm
    }

    pub fn record(&mut self, truth: usize, predicted: usize) {
        self.counts[truth * self.n + predicted] += 1;
    }

    pub fn n_classes(&self) -> usize {
        self.n
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.n + predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Off-diagonal count per true class.
    pub fn misclassified_per_class(&self) -> Vec<u64> {
        (0..self.n)
            .map(|t| {
                (0..self.n)
                    .filter(|&p| p != t)
                    .map(|p| self.get(t, p))
                    .sum()
            })
            .collect()
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts
            .chunks(self.n.max(1))
            .map(<[u64]>::to_vec)
            .collect()
    }
}

/// Off-diagonal share of the matrix, `(total - trace) / total`.
pub fn classification_loss(cm: &ConfusionMatrix) -> Result<f64> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyConfusion);
    }
    Ok((total - cm.trace()) as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_has_zero_loss() {
        let cm = ConfusionMatrix::from_rows(&[vec![3, 0], vec![0, 4]]);
        assert_eq!(classification_loss(&cm).unwrap(), 0.0);
    }

    #[test]
    fn zero_diagonal_has_unit_loss() {
        let cm = ConfusionMatrix::from_rows(&[vec![0, 3], vec![4, 0]]);
        assert_eq!(classification_loss(&cm).unwrap(), 1.0);
    }

    #[test]
    fn hand_fixture() {
        let truth: Vec<usize> = [vec![0; 50], vec![1; 50]].concat();
        let mut pred = vec![0; 45];
        pred.extend(vec![1; 5]);
        pred.extend(vec![0; 10]);
        pred.extend(vec![1; 40]);
        let cm = ConfusionMatrix::from_labels(&truth, &pred, 2);
        assert_eq!(cm.rows(), vec![vec![45, 5], vec![10, 40]]);
        assert_eq!(cm.total(), 100);
        assert_eq!(cm.misclassified_per_class(), vec![5, 10]);
        assert!((classification_loss(&cm).unwrap() - 0.15).abs() < 1e-15);
    }

    #[test]
    fn empty_matrix_is_an_error() {
        assert!(matches!(
            classification_loss(&ConfusionMatrix::new(3)),
            Err(Error::EmptyConfusion)
        ));
    }
}
