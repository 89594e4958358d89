use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetDistribution {
    Normal { mean: f64, sd: f64 },
    Uniform { low: f64, high: f64 },
}

impl TargetDistribution {
    fn centre_and_scale(self) -> (f64, f64) {
        match self {
            Self::Normal { mean, sd } => (mean, sd),
            Self::Uniform { low, high } => (0.5 * (low + high), (high - low) / 12f64.sqrt()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_samples: usize,
    pub n_features: usize,
    pub distribution: TargetDistribution,
    /// In `[0, 1]`; 1 makes every feature an exact affine map of the target.
    pub correlation: f64,
    /// Standard deviation of the extra noise added to each feature.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_samples: 1000,
            n_features: 4,
            distribution: TargetDistribution::Normal {
                mean: 100.0,
                sd: 15.0,
            },
            correlation: 1.0,
            noise: 0.0,
            seed: 0,
        }
    }
}

/// Slope and offset of feature `j` as a function of the standardized target.
fn feature_law(j: usize) -> (f64, f64) {
    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
    (sign * (1.0 + 0.5 * j as f64), j as f64)
}

/// Feature `j` is `ρ·(a_j·s + b_j) + sqrt(1 − ρ²)·z + noise·e`, where `s`
/// is the standardized target and `z`, `e` are independent standard normals.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    if spec.n_samples < 2 || spec.n_features < 1 {
        return Err(Error::InvalidParameter(
            "synthetic data needs at least 2 samples and 1 feature".into(),
        ));
    }
    if !(0.0..=1.0).contains(&spec.correlation) || !(spec.noise >= 0.0) {
        return Err(Error::InvalidParameter(
            "correlation must lie in [0, 1] and noise must be non-negative".into(),
        ));
    }
    let bad = |e: rand_distr::NormalError| Error::InvalidParameter(e.to_string());
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let targets: Vec<f64> = match spec.distribution {
        TargetDistribution::Normal { mean, sd } => {
            let d = Normal::new(mean, sd).map_err(bad)?;
            (0..spec.n_samples).map(|_| d.sample(&mut rng)).collect()
        }
        TargetDistribution::Uniform { low, high } => {
            let d = Uniform::new(low, high).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            (0..spec.n_samples).map(|_| d.sample(&mut rng)).collect()
        }
    };
    let (centre, scale) = spec.distribution.centre_and_scale();
    let std_normal = Normal::new(0.0, 1.0).map_err(bad)?;
    let rho = spec.correlation;
    let mix = (1.0 - rho * rho).sqrt();
    let rows = targets
        .iter()
        .map(|&y| {
            let s = if scale > 0.0 {
                (y - centre) / scale
            } else {
                0.0
            };
            (0..spec.n_features)
                .map(|j| {
                    let (a, b) = feature_law(j);
                    let z = std_normal.sample(&mut rng);
                    let e = std_normal.sample(&mut rng);
                    rho * (a * s + b) + mix * z + spec.noise * e
                })
                .collect()
        })
        .collect();
    let names = (0..spec.n_features).map(|j| format!("x{j}")).collect();
    Dataset::new(names, "y", rows, targets)
}
