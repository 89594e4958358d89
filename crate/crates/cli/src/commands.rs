//! File-level commands. Each one validates its inputs completely before
//! writing anything.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use dca_core::baselines::{generate_synthetic, SyntheticSpec};
use dca_core::dataset::Table;
use dca_core::dynamic::Warning;
use dca_core::exclusion::{apply_exclusion, IntervalCounts};
use dca_core::metrics::{EvalSettings, EvaluationReport, View};
use dca_core::{ClassifierKind, Dataset, Error as CoreError, LossTrace, PredictionOutcome};
use serde::{Deserialize, Serialize};

use crate::artifact::{ModelArtifact, FORMAT_VERSION};
use crate::config::RunConfig;
use crate::error::{AtStage, CliError, CliResult, Stage};
use crate::pipeline::{compare_seed, fit, load, prepare, score_test, SeedReport};

fn write_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::runtime(
        Stage::Output,
        format!("cannot write {}: {e}", path.display()),
    )
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| write_error(path, e))
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::runtime(Stage::Output, e.to_string()))
}

/// Fails early when an output path cannot possibly be written.
fn check_writable(path: &Path) -> CliResult<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(CliError::invalid(
            Stage::Config,
            format!("output directory {} does not exist", dir.display()),
        )),
        _ => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalRow {
    pub interval: usize,
    /// Valid range, raw units.
    pub range_low: f64,
    pub range_high: f64,
    pub dropped: bool,
    pub train_count: usize,
    pub test: IntervalCounts,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub n_rows: usize,
    pub dropped_rows: usize,
    pub outliers_removed: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub n_intervals: usize,
    pub best_kind: ClassifierKind,
    pub iterations: usize,
    pub dc_error: f64,
    /// Cut points in raw target units.
    pub initial_cuts: Vec<f64>,
    pub optimal_cuts: Vec<f64>,
    pub trace: LossTrace,
    pub warnings: Vec<Warning>,
    pub intervals: Vec<IntervalRow>,
    pub excluded_rate: f64,
    pub dc: EvaluationReport,
    pub dc_e: EvaluationReport,
}

#[derive(Clone, Debug)]
pub struct TrainOutput {
    pub artifact: ModelArtifact,
    pub report: TrainReport,
}

/// Whole training pipeline in memory, with a held-out evaluation.
pub fn train(cfg: &RunConfig) -> CliResult<TrainOutput> {
    cfg.validate()?;
    let (ds, dropped) = load(cfg)?;
    let prepared = prepare(&ds, dropped, cfg, cfg.seed)?;
    let fitted = fit(&prepared, cfg, cfg.seed)?;
    let scored = score_test(&prepared, &fitted, cfg)?;
    let target = prepared.normalization.target;
    let raw_cuts = |cuts: &[f64]| cuts.iter().map(|&c| target.invert(c)).collect::<Vec<_>>();
    let ens = &fitted.ensemble;
    let dc = &fitted.dynamic;
    let intervals = (0..ens.n_intervals())
        .map(|k| IntervalRow {
            interval: k,
            range_low: ens.ranges[k].low,
            range_high: ens.ranges[k].high,
            dropped: ens.ranges[k].empty,
            train_count: ens.interval_counts[k],
            test: scored.summary.per_interval[k],
        })
        .collect();
    let report = TrainReport {
        n_rows: ds.len(),
        dropped_rows: prepared.dropped_rows,
        outliers_removed: prepared.outliers_removed,
        n_train: prepared.train.len(),
        n_test: prepared.test.len(),
        n_intervals: ens.n_intervals(),
        best_kind: dc.best_kind,
        iterations: dc.iterations,
        dc_error: dc.dc_error,
        initial_cuts: raw_cuts(dc.initial_segmentation.cuts()),
        optimal_cuts: raw_cuts(dc.segmentation.cuts()),
        trace: dc.trace.clone(),
        warnings: dc.warnings.clone(),
        intervals,
        excluded_rate: scored.summary.excluded_rate,
        dc: scored.dc,
        dc_e: scored.dc_e,
    };
    let artifact = ModelArtifact {
        format_version: FORMAT_VERSION,
        feature_names: ds.column_names.clone(),
        target_name: ds.target_name.clone(),
        ensemble: fitted.ensemble.clone(),
        normalization: prepared.normalization.clone(),
        segmentation: dc.segmentation.clone(),
        initial_segmentation: dc.initial_segmentation.clone(),
        config: cfg.clone(),
        best_kind: dc.best_kind,
        dc_error: dc.dc_error,
        trace: dc.trace.clone(),
        warnings: dc.warnings.clone(),
    };
    Ok(TrainOutput { artifact, report })
}

pub fn cmd_train(
    cfg: &RunConfig,
    artifact_path: &Path,
    report_path: &Path,
) -> CliResult<TrainReport> {
    check_writable(artifact_path)?;
    check_writable(report_path)?;
    let out = train(cfg)?;
    let report_json = to_json(&out.report)?;
    out.artifact.save(artifact_path)?;
    write_text(report_path, &report_json)?;
    Ok(out.report)
}

/// Routes every row of `table` through the artifact's ensemble. Columns are
/// matched by name; extra columns are ignored.
pub fn predict_table(artifact: &ModelArtifact, table: &Table) -> CliResult<Vec<PredictionOutcome>> {
    if table.rows.is_empty() {
        return Ok(Vec::new());
    }
    let columns = artifact
        .feature_names
        .iter()
        .map(|name| {
            table.column_index(name).ok_or_else(|| {
                CliError::invalid(
                    Stage::Predict,
                    format!("schema mismatch: missing feature column {name}"),
                )
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let rows = table
        .rows
        .iter()
        .enumerate()
        .map(|(r, cells)| {
            columns
                .iter()
                .zip(&artifact.feature_names)
                .map(|(&c, name)| {
                    cells.get(c).copied().flatten().ok_or_else(|| {
                        CliError::invalid(
                            Stage::Predict,
                            format!("row {r}: missing value in {name}"),
                        )
                    })
                })
                .collect::<CliResult<Vec<f64>>>()
        })
        .collect::<CliResult<Vec<_>>>()?;
    let outcomes = artifact.ensemble.predict(&rows).at(Stage::Predict)?;
    Ok(apply_exclusion(outcomes, &artifact.ensemble.ranges))
}

/// One line of a prediction file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRow {
    pub row_id: usize,
    pub interval: usize,
    pub prediction: f64,
    pub range_low: f64,
    pub range_high: f64,
    pub excluded: bool,
}

pub fn outcome_rows(outcomes: &[PredictionOutcome]) -> Vec<OutcomeRow> {
    outcomes
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let range = o.range.expect("exclusion applied");
            OutcomeRow {
                row_id: i,
                interval: o.interval,
                prediction: o.prediction,
                range_low: range.low,
                range_high: range.high,
                excluded: o.excluded,
            }
        })
        .collect()
}

pub fn write_outcomes<W: Write>(out: W, rows: &[OutcomeRow]) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    let fail = |e: csv::Error| CliError::runtime(Stage::Output, e.to_string());
    w.write_record([
        "row_id",
        "interval",
        "prediction",
        "range_low",
        "range_high",
        "excluded",
    ])
    .map_err(fail)?;
    for r in rows {
        w.serialize(r).map_err(fail)?;
    }
    w.flush()
        .map_err(|e| CliError::runtime(Stage::Output, e.to_string()))
}

pub fn read_outcomes(path: &Path) -> CliResult<Vec<OutcomeRow>> {
    let file = File::open(path).map_err(|e| {
        CliError::invalid(
            Stage::Evaluate,
            format!("cannot read {}: {e}", path.display()),
        )
    })?;
    csv::Reader::from_reader(file)
        .deserialize()
        .collect::<Result<Vec<OutcomeRow>, _>>()
        .map_err(|e| CliError::invalid(Stage::Evaluate, format!("bad outcome file: {e}")))
}

pub fn cmd_predict(artifact_path: &Path, input: &Path, output: &Path) -> CliResult<usize> {
    check_writable(output)?;
    let artifact = ModelArtifact::load(artifact_path)?;
    let table = Table::from_path(input).at(Stage::Load)?;
    let outcomes = predict_table(&artifact, &table)?;
    let rows = outcome_rows(&outcomes);
    let file = File::create(output).map_err(|e| write_error(output, e))?;
    write_outcomes(file, &rows)?;
    Ok(rows.len())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluateReport {
    pub n_rows: usize,
    pub retained_count: usize,
    pub excluded_count: usize,
    pub excluded_rate: f64,
    pub retained_rate: f64,
    /// Retained predictions only; absent with fewer than two retained rows.
    pub retained: Option<EvaluationReport>,
    pub all_rows: Option<EvaluationReport>,
}

fn optional_report(
    truths: &[f64],
    preds: &[f64],
    excluded: &[bool],
    view: View,
    settings: &EvalSettings,
) -> CliResult<Option<EvaluationReport>> {
    match EvaluationReport::compute(truths, preds, excluded, view, settings, None) {
        Ok(r) => Ok(Some(r)),
        Err(CoreError::TooFewRows { .. }) => Ok(None),
        Err(e) => Err(CliError::core(Stage::Evaluate, e)),
    }
}

/// Scores outcome rows against truths aligned by row id.
pub fn evaluate_rows(
    rows: &[OutcomeRow],
    truth: &Table,
    target: &str,
    settings: &EvalSettings,
) -> CliResult<EvaluateReport> {
    let col = truth.column_index(target).ok_or_else(|| {
        CliError::invalid(
            Stage::Evaluate,
            format!("truth file has no column {target}"),
        )
    })?;
    let mut seen = vec![false; truth.rows.len()];
    let mut truths = Vec::with_capacity(rows.len());
    for r in rows {
        let value = truth
            .rows
            .get(r.row_id)
            .and_then(|cells| cells.get(col).copied().flatten())
            .ok_or_else(|| {
                CliError::invalid(
                    Stage::Evaluate,
                    format!("id mismatch: no truth for row {}", r.row_id),
                )
            })?;
        if std::mem::replace(&mut seen[r.row_id], true) {
            return Err(CliError::invalid(
                Stage::Evaluate,
                format!("id mismatch: row {} appears twice", r.row_id),
            ));
        }
        truths.push(value);
    }
    let preds: Vec<f64> = rows.iter().map(|r| r.prediction).collect();
    let excluded: Vec<bool> = rows.iter().map(|r| r.excluded).collect();
    let n = rows.len();
    let excluded_count = excluded.iter().filter(|&&x| x).count();
    let rate = |c: usize| if n == 0 { 0.0 } else { c as f64 / n as f64 };
    Ok(EvaluateReport {
        n_rows: n,
        retained_count: n - excluded_count,
        excluded_count,
        excluded_rate: rate(excluded_count),
        retained_rate: rate(n - excluded_count),
        retained: optional_report(&truths, &preds, &excluded, View::RetainedOnly, settings)?,
        all_rows: optional_report(&truths, &preds, &excluded, View::AllRows, settings)?,
    })
}

pub fn cmd_evaluate(
    outcomes: &Path,
    truth: &Path,
    target: &str,
    settings: &EvalSettings,
    output: Option<&Path>,
) -> CliResult<EvaluateReport> {
    if let Some(p) = output {
        check_writable(p)?;
    }
    let rows = read_outcomes(outcomes)?;
    let table = Table::from_path(truth).at(Stage::Load)?;
    let report = evaluate_rows(&rows, &table, target, settings)?;
    let json = to_json(&report)?;
    match output {
        Some(p) => write_text(p, &json)?,
        None => {
            let mut out = std::io::stdout().lock();
            if let Err(e) = writeln!(out, "{json}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(CliError::runtime(Stage::Output, e.to_string()));
                }
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub n_intervals: usize,
    pub n_clusters: usize,
    pub seeds: Vec<SeedReport>,
}

pub fn compare(cfg: &RunConfig) -> CliResult<CompareReport> {
    cfg.validate()?;
    let (ds, dropped) = load(cfg)?;
    let seeds = cfg
        .seed_list()
        .into_iter()
        .map(|s| compare_seed(&ds, dropped, cfg, s))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(CompareReport {
        n_intervals: cfg.n_intervals,
        n_clusters: cfg.cluster_count(),
        seeds,
    })
}

/// Comparison table as CSV, one line per seed and method.
pub fn compare_csv(report: &CompareReport) -> CliResult<String> {
    let taus: Vec<f64> = report
        .seeds
        .first()
        .and_then(|s| s.rows.first())
        .map(|r| r.within.iter().map(|w| w.tau).collect())
        .unwrap_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::runtime(Stage::Output, e.to_string());
    let mut header: Vec<String> = [
        "seed",
        "method",
        "n_intervals",
        "n_clusters",
        "mse",
        "r2",
        "average_accuracy",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(taus.iter().map(|t| format!("within_{t}")));
    header.extend(
        [
            "excluded_rate",
            "missed_count",
            "overkill_count",
            "dc_error",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    w.write_record(&header).map_err(fail)?;
    let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
    for seed in &report.seeds {
        for r in &seed.rows {
            let mut rec = vec![
                r.seed.to_string(),
                r.method.clone(),
                opt(r.n_intervals),
                opt(r.n_clusters),
                r.mse.to_string(),
                r.r2.to_string(),
                r.average_accuracy.to_string(),
            ];
            rec.extend(r.within.iter().map(|w| w.ratio.to_string()));
            rec.push(r.excluded_rate.to_string());
            rec.push(r.missed_count.to_string());
            rec.push(r.overkill_count.to_string());
            rec.push(r.dc_error.map(|d| d.to_string()).unwrap_or_default());
            w.write_record(&rec).map_err(fail)?;
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::runtime(Stage::Output, e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::runtime(Stage::Output, e.to_string()))
}

/// Writes `compare.json`, `compare.csv` and one `seed_<n>.json` per seed
/// into `out_dir`, returning the paths written.
pub fn cmd_compare(cfg: &RunConfig, out_dir: &Path) -> CliResult<Vec<PathBuf>> {
    cfg.validate()?;
    if out_dir.exists() && !out_dir.is_dir() {
        return Err(CliError::invalid(
            Stage::Config,
            format!("{} is not a directory", out_dir.display()),
        ));
    }
    let report = compare(cfg)?;
    let mut files = vec![
        (out_dir.join("compare.json"), to_json(&report)?),
        (out_dir.join("compare.csv"), compare_csv(&report)?),
    ];
    for s in &report.seeds {
        files.push((out_dir.join(format!("seed_{}.json", s.seed)), to_json(s)?));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| write_error(out_dir, e))?;
    for (path, text) in &files {
        write_text(path, text)?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

pub fn write_dataset<W: Write>(out: W, ds: &Dataset) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let fail = |e: csv::Error| CliError::runtime(Stage::Output, e.to_string());
    let mut header = ds.column_names.clone();
    header.push(ds.target_name.clone());
    w.write_record(&header).map_err(fail)?;
    for (row, y) in ds.rows.iter().zip(&ds.targets) {
        let mut rec: Vec<String> = row.iter().map(f64::to_string).collect();
        rec.push(y.to_string());
        w.write_record(&rec).map_err(fail)?;
    }
    w.flush()
        .map_err(|e| CliError::runtime(Stage::Output, e.to_string()))
}

pub fn cmd_synth(spec: &SyntheticSpec, output: &Path) -> CliResult<usize> {
    check_writable(output)?;
    let ds = generate_synthetic(spec).map_err(|e| CliError::core(Stage::Config, e))?;
    let file = File::create(output).map_err(|e| write_error(output, e))?;
    write_dataset(std::io::BufWriter::new(file), &ds)?;
    Ok(ds.len())
}
