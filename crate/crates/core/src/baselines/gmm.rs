use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::kmeans::kmeans;
use crate::error::Result;

pub const MAX_ITERATIONS: usize = 100;
pub const LOG_LIKELIHOOD_TOLERANCE: f64 = 1e-6;
pub const VARIANCE_FLOOR: f64 = 1e-9;

/// Gaussian mixture with diagonal covariances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture {
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
    /// Total log-likelihood before each M-step.
    pub log_likelihood_history: Vec<f64>,
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

impl GaussianMixture {
    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    /// `log(w_c) + log N(row | mean_c, var_c)` per component.
    pub fn component_log_densities(&self, row: &[f64]) -> Vec<f64> {
        (0..self.n_components())
            .map(|c| {
                let mut s = self.weights[c].ln();
                for ((x, m), v) in row.iter().zip(&self.means[c]).zip(&self.variances[c]) {
                    s -= 0.5 * ((2.0 * PI * v).ln() + (x - m) * (x - m) / v);
                }
                s
            })
            .collect()
    }

    /// Component with the largest responsibility; ties go to the lower index.
    pub fn assign_one(&self, row: &[f64]) -> usize {
        let dens = self.component_log_densities(row);
        let mut best = 0;
        for c in 1..dens.len() {
            if dens[c] > dens[best] {
                best = c;
            }
        }
        best
    }

    pub fn assign(&self, rows: &[Vec<f64>]) -> Vec<usize> {
        rows.iter().map(|r| self.assign_one(r)).collect()
    }

    fn m_step(rows: &[Vec<f64>], resp: &[Vec<f64>], prev: Option<&Self>) -> Self {
        let (n, p, k) = (rows.len(), rows[0].len(), resp[0].len());
        let mut weights = vec![0.0; k];
        let mut means = vec![vec![0.0; p]; k];
        let mut variances = vec![vec![0.0; p]; k];
        for c in 0..k {
            let nk: f64 = resp.iter().map(|r| r[c]).sum();
            weights[c] = nk / n as f64;
            if nk <= 0.0 {
                // an abandoned component keeps its shape and drops out by weight
                if let Some(prev) = prev {
                    means[c] = prev.means[c].clone();
                    variances[c] = prev.variances[c].clone();
                } else {
                    variances[c] = vec![1.0; p];
                }
                continue;
            }
            for (row, r) in rows.iter().zip(resp) {
                for j in 0..p {
                    means[c][j] += r[c] * row[j];
                }
            }
            for m in &mut means[c] {
                *m /= nk;
            }
            for (row, r) in rows.iter().zip(resp) {
                for j in 0..p {
                    let d = row[j] - means[c][j];
                    variances[c][j] += r[c] * d * d;
                }
            }
            for v in &mut variances[c] {
                *v = (*v / nk).max(VARIANCE_FLOOR);
            }
        }
        Self {
            weights,
            means,
            variances,
            log_likelihood_history: Vec::new(),
        }
    }

    fn e_step(&self, rows: &[Vec<f64>]) -> (Vec<Vec<f64>>, f64) {
        let mut total = 0.0;
        let resp = rows
            .iter()
            .map(|row| {
                let dens = self.component_log_densities(row);
                let norm = log_sum_exp(&dens);
                total += norm;
                dens.iter().map(|d| (d - norm).exp()).collect()
            })
            .collect();
        (resp, total)
    }

    /// Expectation-maximization from the hard k-means partition. Stops after
    /// [`MAX_ITERATIONS`] or once the log-likelihood gains less than
    /// [`LOG_LIKELIHOOD_TOLERANCE`].
    pub fn fit(rows: &[Vec<f64>], k: usize, seed: u64) -> Result<Self> {
        let km = kmeans(rows, k, seed)?;
        let resp: Vec<Vec<f64>> = km
            .assign(rows)
            .into_iter()
            .map(|c| {
                let mut r = vec![0.0; k];
                r[c] = 1.0;
                r
            })
            .collect();
        let mut model = Self::m_step(rows, &resp, None);
        let mut history = Vec::new();
        for _ in 0..MAX_ITERATIONS {
            let (resp, ll) = model.e_step(rows);
            let done = history
                .last()
                .is_some_and(|&prev: &f64| (ll - prev).abs() < LOG_LIKELIHOOD_TOLERANCE);
            history.push(ll);
            if done {
                break;
            }
            model = Self::m_step(rows, &resp, Some(&model));
        }
        model.log_likelihood_history = history;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn two_gaussians(n: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = Normal::new(0.0, 1.0).unwrap();
        let b = Normal::new(8.0, 1.5).unwrap();
        let mut rows = Vec::new();
        let mut truth = Vec::new();
        for i in 0..n {
            let (d, c) = if i % 2 == 0 { (&a, 0) } else { (&b, 1) };
            rows.push(vec![d.sample(&mut rng), d.sample(&mut rng)]);
            truth.push(c);
        }
        (rows, truth)
    }

    #[test]
    fn recovers_two_components() {
        let (rows, truth) = two_gaussians(400);
        let gmm = GaussianMixture::fit(&rows, 2, 1).unwrap();
        let assigned = gmm.assign(&rows);
        let agree = assigned.iter().zip(&truth).filter(|(a, b)| a == b).count();
        let acc = agree.max(rows.len() - agree) as f64 / rows.len() as f64;
        assert!(acc > 0.95, "{acc}");
    }

    #[test]
    fn log_likelihood_never_decreases() {
        let (rows, _) = two_gaussians(300);
        let gmm = GaussianMixture::fit(&rows, 3, 2).unwrap();
        for w in gmm.log_likelihood_history.windows(2) {
            assert!(w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0), "{w:?}");
        }
    }

    #[test]
    fn constant_column_is_floored() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, 3.0]).collect();
        let gmm = GaussianMixture::fit(&rows, 2, 0).unwrap();
        assert!(gmm.variances.iter().all(|v| v[1] == VARIANCE_FLOOR));
        assert!(gmm.log_likelihood_history.iter().all(|l| l.is_finite()));
    }
}
