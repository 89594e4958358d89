//! Shared fixtures for the benchmarks under `benches/`.

use dca_core::baselines::{generate_synthetic, SyntheticSpec};
use dca_core::dataset::{normalize, split};
use dca_core::Dataset;

/// Normalized synthetic table with a moderately noisy feature/target link.
pub fn fixture(n_samples: usize, seed: u64) -> Dataset {
    let raw = generate_synthetic(&SyntheticSpec {
        n_samples,
        n_features: 6,
        correlation: 0.95,
        noise: 0.1,
        seed,
        ..SyntheticSpec::default()
    })
    .expect("valid synthetic spec");
    normalize(&raw).expect("non-constant columns").0
}

/// `fixture` split in half, as the refinement loop consumes it.
pub fn halves(n_samples: usize, seed: u64) -> (Dataset, Dataset) {
    split(&fixture(n_samples, seed), 0.5, seed).expect("enough rows")
}
