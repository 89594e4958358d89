use dca_core::baselines::{generate_synthetic, SyntheticSpec};
use dca_core::dataset::{normalize, split, split_tt};
use dca_core::dynamic::{run_dynamic_classification, DynamicConfig};
use dca_core::exclusion::ExclusionConfig;
use dca_core::interval::{build_ensemble, fit_ols};

fn prepared(
    correlation: f64,
) -> (
    dca_core::Dataset,
    dca_core::Dataset,
    dca_core::Dataset,
    dca_core::NormalizationParams,
) {
    let ds = generate_synthetic(&SyntheticSpec {
        n_samples: 600,
        correlation,
        noise: 0.05,
        seed: 4,
        ..SyntheticSpec::default()
    })
    .unwrap();
    let (norm, params) = normalize(&ds).unwrap();
    let (train, _) = split(&norm, 0.8, 1).unwrap();
    let (t, p) = split_tt(&train, 2).unwrap();
    (train, t, p, params)
}

#[test]
fn best_loss_is_running_minimum_and_history_stays_valid() {
    let (_, t, p, _) = prepared(0.9);
    let cfg = DynamicConfig {
        n_intervals: 4,
        max_iterations: 6,
        acceptable_loss: -1.0,
        ..DynamicConfig::default()
    };
    let res = run_dynamic_classification(&t, &p, &cfg).unwrap();
    for k in &res.trace.kinds {
        let min = k.losses.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(k.best_loss, min);
        assert_eq!(k.losses[k.best_iteration], min);
    }
    for seg in &res.segmentation_history {
        assert!(seg.cuts().windows(2).all(|w| w[0] < w[1]));
        assert!(seg.counts(&t.targets).iter().all(|&c| c > 0));
    }
}

#[test]
fn separable_data_reaches_small_dc_error_quickly() {
    let rows: Vec<Vec<f64>> = (0..400).map(|i| vec![i as f64 / 400.0]).collect();
    let targets: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let ds = dca_core::Dataset::new(vec!["x".into()], "y", rows, targets).unwrap();
    let (t, p) = split_tt(&ds, 3).unwrap();
    let cfg = DynamicConfig {
        n_intervals: 3,
        max_iterations: 10,
        ..DynamicConfig::default()
    };
    let res = run_dynamic_classification(&t, &p, &cfg).unwrap();
    assert!(res.dc_error < 0.01, "{}", res.dc_error);
    assert!(res.iterations <= 10);
}

#[test]
fn single_interval_ensemble_is_the_global_regressor() {
    let (train, t, p, params) = prepared(0.7);
    let cfg = DynamicConfig {
        n_intervals: 1,
        ..DynamicConfig::default()
    };
    let dc = run_dynamic_classification(&t, &p, &cfg).unwrap();
    let ens = build_ensemble(&train, &dc, &params, ExclusionConfig::uniform(1, 1.05), 4).unwrap();
    assert_eq!(
        ens.regressors[0],
        fit_ols(&train.rows, &train.targets).unwrap()
    );
}

#[test]
fn piecewise_linear_target_recovers_each_slope() {
    // slope 1 below 0.5, slope 3 above, continuous at the knee
    let xs: Vec<f64> = (0..400)
        .map(|i| i as f64 / 400.0)
        .filter(|x| (x - 0.5).abs() > 0.05)
        .collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| if x < 0.5 { x } else { 0.5 + 3.0 * (x - 0.5) })
        .collect();
    let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
    let ds = dca_core::Dataset::new(vec!["x".into()], "y", rows, ys).unwrap();
    let (norm, params) = normalize(&ds).unwrap();
    let (t, p) = split_tt(&norm, 5).unwrap();
    // ratios equal to the piece sizes put the quantile inside the gap
    let knee = params.target.apply(0.5);
    let below = t.targets.iter().filter(|&&y| y < knee).count() as f64;
    let cfg = DynamicConfig {
        n_intervals: 2,
        manual_ratios: Some(vec![below, t.len() as f64 - below]),
        ..DynamicConfig::default()
    };
    let dc = run_dynamic_classification(&t, &p, &cfg).unwrap();
    let ens = build_ensemble(
        &norm,
        &dc,
        &params,
        ExclusionConfig::uniform(2, 1.05),
        usize::MAX,
    )
    .unwrap();
    let y_span = params.target.max - params.target.min;
    let x_span = params.columns[0].max - params.columns[0].min;
    let slope = |k: usize| ens.regressors[k].coefficients[0] * y_span / x_span;
    assert!((slope(0) - 1.0).abs() < 1e-3, "{}", slope(0));
    assert!((slope(1) - 3.0).abs() < 1e-3, "{}", slope(1));
}
