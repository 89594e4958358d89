//! Acceptance harness. Prints one `[PASS]` or `[FAIL]` line per criterion
//! and exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use dca_cli::commands::{cmd_compare, compare};
use dca_cli::pipeline::{compare_seed, fit, load, prepare, score_test};
use dca_cli::RunConfig;
use dca_core::baselines::{kmeans, GaussianMixture, SyntheticSpec, TargetDistribution};
use dca_core::classifier::{classification_loss, pseudo_labels};
use dca_core::dataset::split;
use dca_core::dynamic::{
    count_penalty, degree_penalty, run_dynamic_classification, score, DynamicConfig,
};
use dca_core::exclusion::{apply_exclusion, exclusion_summary, expand_intervals, ExclusionConfig};
use dca_core::interval::fit_ols;
use dca_core::metrics::miss_overkill_flags;
use dca_core::segmentation::kde_density;
use dca_core::{ConfusionMatrix, Dataset, PredictionOutcome, SegmentationList};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const EXACT: f64 = 1e-12;
const DEGENERATE: f64 = 1e-9;
const OLS_ORACLE: f64 = 1e-8;
const KDE_MASS: f64 = 0.01;
const DC_ERROR_THRESHOLD: f64 = 0.05;
const C3_EXCLUDED_MAX: f64 = 0.10;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn criterion(
    id: u8,
    title: &str,
    tolerance: &str,
    budget: Duration,
    body: impl FnOnce() -> Verdict,
) -> bool {
    let start = Instant::now();
    let v = catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        verdict(false, format!("panicked: {msg}"))
    });
    let elapsed = start.elapsed();
    let in_budget = elapsed <= budget;
    let pass = v.pass && in_budget;
    println!(
        "[{}] C{id} {title} ({tolerance}; {:.2} s, budget {} s{}): {}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs(),
        if in_budget { "" } else { ", OVER BUDGET" },
        v.detail
    );
    pass
}

fn uniform_spec(n: usize, correlation: f64, seed: u64) -> SyntheticSpec {
    SyntheticSpec {
        n_samples: n,
        n_features: 4,
        distribution: TargetDistribution::Uniform {
            low: 100.0,
            high: 200.0,
        },
        correlation,
        noise: 0.0,
        seed,
    }
}

fn c1_formulas() -> Verdict {
    let mut failures = Vec::new();
    let mut check = |name: &str, got: f64, want: f64| {
        if (got - want).abs() > EXACT {
            failures.push(format!("{name}: {got} vs {want}"));
        }
    };
    for n in 1..=8 {
        check("degree penalty X=N", degree_penalty(n, n), 2.0);
        check("degree penalty X=0", degree_penalty(0, n), 1.0);
    }
    check("degree penalty 1/4", degree_penalty(1, 4), 1.0625);
    check("count penalty 7", count_penalty(7), 49.0);
    check(
        "score",
        score(&[0.3, 0.2, 0.1, 0.1]),
        0.5 * 0.1 + 0.5 * 0.7 / 4.0,
    );
    let long: Vec<f64> = (1..=12).map(|i| i as f64 / 100.0).collect();
    check(
        "score tail",
        score(&long),
        0.5 * 0.01 + 0.5 * (3..=12).sum::<i32>() as f64 / 1000.0,
    );
    let cm = ConfusionMatrix::from_rows(&[vec![5, 1, 0], vec![2, 2, 0], vec![0, 1, 9]]);
    check(
        "classification loss",
        classification_loss(&cm).unwrap(),
        4.0 / 20.0,
    );

    let n = 85227;
    let outcomes: Vec<PredictionOutcome> = (0..n)
        .map(|i| PredictionOutcome {
            interval: i % 3,
            prediction: 0.0,
            range: None,
            excluded: i < 3644,
        })
        .collect();
    let summary = exclusion_summary(&outcomes, 3).unwrap();
    check("excluded rate", summary.excluded_rate, 3644.0 / 85227.0);
    check("retained rate", summary.retained_rate, 81583.0 / 85227.0);
    let shown = format!("{:.4}", 100.0 * summary.excluded_rate);
    if shown != "4.2756" {
        failures.push(format!("excluded rate shows {shown}%"));
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!("all hand values reproduced; 3644/85227 = {shown}%")
        } else {
            failures.join("; ")
        },
    )
}

fn c2_degenerate() -> Verdict {
    let cfg = RunConfig {
        synthetic: Some(SyntheticSpec {
            n_samples: 10_000,
            correlation: 0.8,
            noise: 0.3,
            seed: 2,
            ..SyntheticSpec::default()
        }),
        n_intervals: 1,
        n_clusters: Some(1),
        ..RunConfig::default()
    };
    let (ds, dropped) = load(&cfg).unwrap();
    let report = compare_seed(&ds, dropped, &cfg, 0).unwrap();
    let dp = report.row("DP").unwrap();
    let mut worst: f64 = 0.0;
    for method in ["DC", "KC", "GC"] {
        let r = report.row(method).unwrap();
        worst = worst.max((r.mse - dp.mse).abs()).max((r.r2 - dp.r2).abs());
        for (a, b) in r.within.iter().zip(&dp.within) {
            worst = worst.max((a.ratio - b.ratio).abs());
        }
    }
    verdict(
        worst <= DEGENERATE,
        format!(
            "max |DC,KC,GC - DP| over MSE, R2, within ratios = {worst:.3e} (DP R2 {:.4})",
            dp.r2
        ),
    )
}

/// Largest `(high - low) / min(|low|, |high|)` over the valid ranges.
fn max_relative_width(ranges: &[dca_core::ValidRange]) -> f64 {
    ranges
        .iter()
        .map(|r| (r.high - r.low) / r.low.abs().min(r.high.abs()))
        .fold(0.0, f64::max)
}

struct SweepPoint {
    correlation: f64,
    dc_error: f64,
    missed: usize,
    excluded_rate: f64,
}

fn run_missed(cfg: &RunConfig, tau: Option<f64>) -> (SweepPoint, f64) {
    let (ds, dropped) = load(cfg).unwrap();
    let prepared = prepare(&ds, dropped, cfg, cfg.seed).unwrap();
    let fitted = fit(&prepared, cfg, cfg.seed).unwrap();
    let scored = score_test(&prepared, &fitted, cfg).unwrap();
    let tau = tau.unwrap_or_else(|| max_relative_width(&fitted.ensemble.ranges));
    let preds: Vec<f64> = scored.outcomes.iter().map(|o| o.prediction).collect();
    let flags: Vec<bool> = scored.outcomes.iter().map(|o| o.excluded).collect();
    let mo = miss_overkill_flags(&prepared.test_truths, &preds, &flags, tau).unwrap();
    let point = SweepPoint {
        correlation: cfg.synthetic.as_ref().unwrap().correlation,
        dc_error: fitted.dynamic.dc_error,
        missed: mo.missed_count,
        excluded_rate: scored.summary.excluded_rate,
    };
    (point, tau)
}

fn sweep_config(n: usize, correlation: f64) -> RunConfig {
    RunConfig {
        synthetic: Some(uniform_spec(n, correlation, 7)),
        n_intervals: 4,
        exclusion: dca_cli::config::ExclusionSection {
            factor: 1.0,
            ..Default::default()
        },
        ..RunConfig::default()
    }
}

fn c3_zero_missed() -> Verdict {
    let cfg = sweep_config(50_000, 1.0);
    let (p, tau) = run_missed(&cfg, None);
    verdict(
        p.dc_error == 0.0 && p.missed == 0 && p.excluded_rate < C3_EXCLUDED_MAX,
        format!(
            "50000 rows, tau {tau:.4}: dc_error {:.4}, missed {}, excluded rate {:.4}",
            p.dc_error, p.missed, p.excluded_rate
        ),
    )
}

fn c4_degradation() -> Verdict {
    let base = RunConfig {
        max_iterations: 10,
        ..sweep_config(4000, 1.0)
    };
    let (first, tau) = run_missed(&base, None);
    let mut points = vec![first];
    for rho in [0.999, 0.995, 0.99, 0.98, 0.95, 0.9, 0.8, 0.6, 0.4, 0.2] {
        let mut cfg = base.clone();
        cfg.synthetic.as_mut().unwrap().correlation = rho;
        points.push(run_missed(&cfg, Some(tau)).0);
    }
    println!("      tau fixed at {tau:.4}");
    println!("      correlation  dc_error  missed  excluded_rate");
    for p in &points {
        println!(
            "      {:>11}  {:>8.4}  {:>6}  {:>13.4}",
            p.correlation, p.dc_error, p.missed, p.excluded_rate
        );
    }
    let transition = points.iter().position(|p| p.missed > 0);
    let clean_below = points[..transition.unwrap_or(points.len())]
        .iter()
        .any(|p| p.dc_error <= DC_ERROR_THRESHOLD);
    match transition {
        Some(i) => {
            let t = &points[i];
            let beyond = t.dc_error > DC_ERROR_THRESHOLD;
            verdict(
                clean_below && beyond,
                format!(
                    "missed first > 0 at correlation {} with dc_error {:.4} ({} the {} threshold); zero misses before it",
                    t.correlation,
                    t.dc_error,
                    if beyond { "beyond" } else { "within" },
                    DC_ERROR_THRESHOLD
                ),
            )
        }
        None => verdict(false, "missed_count never became positive over the sweep"),
    }
}

fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn c5_california() -> Verdict {
    let path = std::env::var_os("DCA_CALIFORNIA_CSV")
        .map(PathBuf::from)
        .unwrap_or_else(|| workspace_root().join("data/california_housing.csv"));
    if !path.exists() {
        return verdict(
            false,
            format!(
                "dataset not available at {} (set DCA_CALIFORNIA_CSV to a numeric CSV)",
                path.display()
            ),
        );
    }
    let cfg = RunConfig {
        input: Some(path),
        target: std::env::var("DCA_CALIFORNIA_TARGET").unwrap_or_else(|_| "MedHouseVal".into()),
        n_intervals: 3,
        ..RunConfig::default()
    };
    let (ds, dropped) = load(&cfg).unwrap();
    let r = compare_seed(&ds, dropped, &cfg, cfg.seed).unwrap();
    let dc = r.row("DC").unwrap();
    let dce = r.row("DC-E").unwrap();
    verdict(
        dc.mse <= 0.015 && dc.r2 >= 0.70 && dce.mse < dc.mse && dce.r2 > dc.r2,
        format!(
            "DC MSE {:.4} R2 {:.4}; DC-E MSE {:.4} R2 {:.4}; excluded rate {:.4}",
            dc.mse, dc.r2, dce.mse, dce.r2, dce.excluded_rate
        ),
    )
}

/// Body-weight table with the class balance and BMI bands of the public
/// obesity-level survey, plus a log-scale girth index.
fn obesity_stand_in(seed: u64) -> Dataset {
    const COUNTS: [usize; 7] = [272, 287, 290, 290, 351, 297, 324];
    const BMI: [(f64, f64); 7] = [
        (16.0, 18.5),
        (18.5, 25.0),
        (25.0, 27.5),
        (27.5, 30.0),
        (30.0, 35.0),
        (35.0, 40.0),
        (40.0, 50.0),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let height = Normal::new(0.0, 0.075).unwrap();
    let age = Normal::<f64>::new(24.3, 6.35).unwrap();
    let girth_noise = Normal::new(0.0, 1.0).unwrap();
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for (level, (&count, &(lo, hi))) in COUNTS.iter().zip(&BMI).enumerate() {
        for _ in 0..count {
            let gender = rng.random_range(0..2) as f64;
            let h = (1.64 + 0.12 * gender + height.sample(&mut rng)).clamp(1.45, 1.98);
            let weight = rng.random_range(lo..hi) * h * h;
            let a = age.sample(&mut rng).clamp(14.0, 61.0);
            let girth = 100.0 * (weight / 30.0).ln() + girth_noise.sample(&mut rng);
            rows.push(vec![
                gender,
                a,
                h,
                girth,
                level as f64,
                rng.random_range(1.0..3.0),
                rng.random_range(1.0..4.0),
                rng.random_range(1.0..3.0),
                rng.random_range(0.0..3.0),
                rng.random_range(0.0..2.0),
            ]);
            targets.push(weight);
        }
    }
    let names = [
        "gender", "age", "height", "girth", "level", "fcvc", "ncp", "ch2o", "faf", "tue",
    ]
    .map(String::from)
    .to_vec();
    Dataset::new(names, "weight", rows, targets).unwrap()
}

fn c6_obesity() -> Verdict {
    let ds = obesity_stand_in(2111);
    let cfg = RunConfig {
        target: "weight".into(),
        n_intervals: 4,
        ..RunConfig::default()
    };
    let r = compare_seed(&ds, 0, &cfg, 0).unwrap();
    let dc = r.row("DC").unwrap();
    let dce = r.row("DC-E").unwrap();
    let dp = r.row("DP").unwrap();
    verdict(
        r.dc_error <= DC_ERROR_THRESHOLD && dce.r2 >= dc.r2,
        format!(
            "synthetic stand-in, {} rows: dc_error {:.4}; DC R2 {:.6}, DC-E R2 {:.6} (excluded rate {:.4}); DP R2 {:.4}",
            ds.len(),
            r.dc_error,
            dc.r2,
            dce.r2,
            dce.excluded_rate,
            dp.r2
        ),
    )
}

/// Normal equations with an intercept column, solved by Gauss-Jordan
/// elimination with partial pivoting.
fn normal_equations(rows: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = rows[0].len() + 1;
    let mut a = vec![vec![0.0; p + 1]; p];
    for (r, &t) in rows.iter().zip(y) {
        let x: Vec<f64> = std::iter::once(1.0).chain(r.iter().copied()).collect();
        for i in 0..p {
            for j in 0..p {
                a[i][j] += x[i] * x[j];
            }
            a[i][p] += x[i] * t;
        }
    }
    for col in 0..p {
        let pivot = (col..p)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        for row in 0..p {
            if row != col {
                let f = a[row][col] / a[col][col];
                for k in col..=p {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    (0..p).map(|i| a[i][p] / a[i][i]).collect()
}

fn random_table(rng: &mut ChaCha8Rng, n: usize, p: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..p).map(|_| rng.random_range(-50.0..50.0)).collect())
        .collect();
    let y = (0..n).map(|_| rng.random_range(-100.0..100.0)).collect();
    (rows, y)
}

fn c7_properties() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut failures: Vec<String> = Vec::new();
    let mut counts = [0usize; 6];

    // segmentation stays ordered and populated through every correction round
    for case in 0..6u64 {
        let n = 600;
        let targets: Vec<f64> = (0..n)
            .map(|_| rng.random_range(0.0..1.0f64).powi(2))
            .collect();
        let rows: Vec<Vec<f64>> = targets
            .iter()
            .map(|&t| {
                vec![
                    t + rng.random_range(-0.15..0.15),
                    rng.random_range(0.0..1.0),
                ]
            })
            .collect();
        let ds = Dataset::new(vec!["a".into(), "b".into()], "y", rows, targets).unwrap();
        let (tt, tp) = split(&ds, 0.5, case).unwrap();
        let cfg = DynamicConfig {
            n_intervals: 2 + case as usize % 3,
            max_iterations: 8,
            seed: case,
            ..DynamicConfig::default()
        };
        let result = run_dynamic_classification(&tt, &tp, &cfg).unwrap();
        for seg in &result.segmentation_history {
            counts[0] += 1;
            if !seg.cuts().windows(2).all(|w| w[0] < w[1]) || seg.counts(&tt.targets).contains(&0) {
                failures.push(format!("invalid segmentation {:?}", seg.cuts()));
            }
        }
        for k in &result.trace.kinds {
            counts[1] += 1;
            let min = k.losses.iter().copied().fold(f64::INFINITY, f64::min);
            let mut running = f64::INFINITY;
            for (i, &l) in k.losses.iter().enumerate() {
                running = running.min(l);
                if i == k.best_iteration && l != running {
                    failures.push("best iteration is not a running minimum".into());
                }
            }
            if k.best_loss != min || k.losses[k.best_iteration] != min {
                failures.push(format!(
                    "{:?} best_loss {} vs min {}",
                    k.kind, k.best_loss, min
                ));
            }
        }
        let labels = pseudo_labels(&tp.targets, &result.segmentation);
        if labels.iter().any(|&l| l >= cfg.n_intervals) {
            failures.push("pseudo label out of range".into());
        }
    }

    // wider factors never exclude a retained prediction
    let seg = SegmentationList::new(vec![0.3, 0.6]).unwrap();
    for _ in 0..200 {
        counts[2] += 1;
        let outcomes: Vec<PredictionOutcome> = (0..40)
            .map(|_| PredictionOutcome {
                interval: rng.random_range(0..3),
                prediction: rng.random_range(-0.2..1.2),
                range: None,
                excluded: false,
            })
            .collect();
        let f1 = rng.random_range(1.0..1.5);
        let f2 = f1 + rng.random_range(0.0..0.5);
        let narrow = expand_intervals(&seg, &ExclusionConfig::uniform(3, f1), 0.0, 1.0).unwrap();
        let wide = expand_intervals(&seg, &ExclusionConfig::uniform(3, f2), 0.0, 1.0).unwrap();
        let a = apply_exclusion(outcomes.clone(), &narrow);
        let b = apply_exclusion(outcomes, &wide);
        if a.iter().zip(&b).any(|(x, y)| !x.excluded && y.excluded) {
            failures.push(format!("factor {f2} excludes a sample retained at {f1}"));
        }
    }

    // KDE mass, also on skewed and multimodal samples
    for case in 0..100 {
        counts[3] += 1;
        let n = rng.random_range(5..300);
        let y: Vec<f64> = (0..n)
            .map(|i| match case % 3 {
                0 => rng.random_range(-5.0..5.0),
                1 => rng.random_range(0.0..1.0f64).powi(4) * 100.0,
                _ => (i % 2) as f64 * 10.0 + rng.random_range(0.0..1.0),
            })
            .collect();
        let mass = kde_density(&y, None).unwrap().integral();
        if (mass - 1.0).abs() >= KDE_MASS {
            failures.push(format!("KDE mass {mass}"));
        }
    }

    // k-means inertia and EM log-likelihood
    for seed in 0..40u64 {
        counts[4] += 1;
        let (rows, _) = random_table(&mut rng, 120, 2);
        let k = 1 + seed as usize % 5;
        let km = kmeans(&rows, k, seed).unwrap();
        if km
            .inertia_history
            .windows(2)
            .any(|w| w[1] > w[0] * (1.0 + EXACT) + EXACT)
        {
            failures.push(format!("k-means inertia rose, seed {seed}"));
        }
        let gmm = GaussianMixture::fit(&rows, 1 + seed as usize % 3, seed).unwrap();
        if gmm
            .log_likelihood_history
            .windows(2)
            .any(|w| w[1] < w[0] - DEGENERATE * w[0].abs().max(1.0))
        {
            failures.push(format!("EM log-likelihood fell, seed {seed}"));
        }
    }

    // OLS against the normal equations
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        counts[5] += 1;
        let (rows, y) = random_table(&mut rng, 10 + case % 50, 1 + case % 4);
        let model = fit_ols(&rows, &y).unwrap();
        let oracle = normal_equations(&rows, &y);
        let got = std::iter::once(model.intercept).chain(model.coefficients.iter().copied());
        for (g, o) in got.zip(&oracle) {
            worst = worst.max((g - o).abs() / o.abs().max(1.0));
        }
    }
    if worst >= OLS_ORACLE {
        failures.push(format!("OLS deviates from normal equations by {worst:e}"));
    }

    failures.dedup();
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "{} segmentations, {} loss traces, {} exclusion pairs, {} KDE curves, {} clustering fits, {} OLS fits; worst OLS deviation {worst:.2e}",
                counts[0], counts[1], counts[2], counts[3], counts[4], counts[5]
            )
        } else {
            failures.into_iter().take(5).collect::<Vec<_>>().join("; ")
        },
    )
}

fn headline(r: &dca_cli::pipeline::SeedReport) -> [f64; 4] {
    let dc = r.row("DC").unwrap();
    [dc.mse, dc.r2, r.row("DC-E").unwrap().r2, r.dc_error]
}

fn c8_determinism() -> Verdict {
    let base = RunConfig {
        synthetic: Some(SyntheticSpec {
            n_samples: 2000,
            correlation: 0.97,
            noise: 0.1,
            seed: 8,
            ..SyntheticSpec::default()
        }),
        n_intervals: 4,
        max_iterations: 8,
        ..RunConfig::default()
    };
    let dir = tempfile::TempDir::new().unwrap();
    let two = RunConfig {
        seeds: vec![0, 1],
        ..base.clone()
    };
    let a = cmd_compare(&two, &dir.path().join("a")).unwrap();
    let b = cmd_compare(&two, &dir.path().join("b")).unwrap();
    let identical = a
        .iter()
        .zip(&b)
        .all(|(x, y)| std::fs::read(x).unwrap() == std::fs::read(y).unwrap());

    let pair = compare(&two).unwrap();
    let five = compare(&RunConfig {
        seeds: (2..7).collect(),
        ..base
    })
    .unwrap();
    let names = ["DC MSE", "DC R2", "DC-E R2", "dc_error"];
    let mut within = true;
    let mut parts = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let values: Vec<f64> = five.seeds.iter().map(|s| headline(s)[i]).collect();
        let spread = values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - values.iter().copied().fold(f64::INFINITY, f64::min);
        let diff = (headline(&pair.seeds[0])[i] - headline(&pair.seeds[1])[i]).abs();
        let ok = diff < 2.0 * spread || (diff == 0.0 && spread == 0.0);
        within &= ok;
        parts.push(format!(
            "{name} diff {diff:.2e} vs 2x spread {:.2e}",
            2.0 * spread
        ));
    }
    verdict(
        identical && within,
        format!(
            "{} report files {}; {}",
            a.len(),
            if identical {
                "byte-identical"
            } else {
                "DIFFER"
            },
            parts.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let results = [
        criterion(1, "formula exactness", "tol 1e-12", secs(1), c1_formulas),
        criterion(
            2,
            "N=1 equals direct prediction",
            "tol 1e-9",
            secs(10),
            c2_degenerate,
        ),
        criterion(
            3,
            "zero missed detections at correlation 1",
            "excluded rate < 0.10",
            secs(30),
            c3_zero_missed,
        ),
        criterion(
            4,
            "missed detections appear past the dc_error threshold",
            "threshold 0.05",
            secs(300),
            c4_degradation,
        ),
        criterion(
            5,
            "California Housing, N=3",
            "MSE <= 0.015, R2 >= 0.70, DC-E better",
            secs(600),
            c5_california,
        ),
        criterion(
            6,
            "obesity-style low-error regime",
            "dc_error <= 0.05, DC-E R2 >= DC R2",
            secs(600),
            c6_obesity,
        ),
        criterion(
            7,
            "property suites",
            "OLS tol 1e-8, KDE mass tol 0.01",
            secs(120),
            c7_properties,
        ),
        criterion(
            8,
            "determinism and seed stability",
            "diff < 2x spread over 5 seeds",
            secs(300),
            c8_determinism,
        ),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
