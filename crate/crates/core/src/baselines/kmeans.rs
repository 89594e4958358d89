use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_ROUNDS: usize = 100;
pub const SHIFT_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KMeans {
    pub centroids: Vec<Vec<f64>>,
    /// Inertia after each assignment step.
    pub inertia_history: Vec<f64>,
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn distinct_rows(rows: &[Vec<f64>]) -> usize {
    let mut keys: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| r.iter().map(|v| (v + 0.0).to_bits()).collect())
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

/// Index of the closest centroid; ties go to the lower index.
pub fn nearest(centroids: &[Vec<f64>], row: &[f64]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(centroid, row);
        if d < best.1 {
            best = (c, d);
        }
    }
    best.0
}

fn plus_plus_init(rows: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids = vec![rows[rng.random_range(0..rows.len())].clone()];
    let mut d2: Vec<f64> = rows.iter().map(|r| sq_dist(r, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let mut pick = rng.random::<f64>() * total;
        let mut chosen = None;
        for (i, &d) in d2.iter().enumerate() {
            if d > 0.0 {
                chosen = Some(i);
                if pick < d {
                    break;
                }
                pick -= d;
            }
        }
        let c = rows[chosen.expect("fewer distinct rows than clusters")].clone();
        for (d, r) in d2.iter_mut().zip(rows) {
            *d = d.min(sq_dist(r, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Lloyd's algorithm from a k-means++ start. Stops when no centroid moves
/// more than [`SHIFT_TOLERANCE`] or after [`MAX_ROUNDS`] rounds. A cluster
/// that loses all its points keeps its previous centroid.
pub fn kmeans(rows: &[Vec<f64>], k: usize, seed: u64) -> Result<KMeans> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let distinct = distinct_rows(rows);
    if k > distinct {
        return Err(Error::TooManyClusters { k, distinct });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus_init(rows, k, &mut rng);
    let p = rows[0].len();
    let mut inertia_history = Vec::new();
    for _ in 0..MAX_ROUNDS {
        let mut sums = vec![vec![0.0; p]; k];
        let mut counts = vec![0usize; k];
        let mut inertia = 0.0;
        for r in rows {
            let c = nearest(&centroids, r);
            inertia += sq_dist(r, &centroids[c]);
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(r) {
                *s += v;
            }
        }
        inertia_history.push(inertia);
        let mut shift: f64 = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let updated: Vec<f64> = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            shift = shift.max(sq_dist(&updated, &centroids[c]).sqrt());
            centroids[c] = updated;
        }
        if shift < SHIFT_TOLERANCE {
            break;
        }
    }
    Ok(KMeans {
        centroids,
        inertia_history,
    })
}

impl KMeans {
    pub fn assign(&self, rows: &[Vec<f64>]) -> Vec<usize> {
        rows.iter().map(|r| nearest(&self.centroids, r)).collect()
    }
}
