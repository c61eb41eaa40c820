//! Benchmark orchestration: the three experimental conditions, seeded
//! iterations, the weighted-average combination, runtime accounting, and
//! report emission.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::classifiers::{self, ClassifierKind, Hyperparams, TrainedModel};
use crate::dataio::{container_digest, RecordingSet};
use crate::dsp::{extract_features, FeatureMatrix, FilterSpec};
use crate::error::{Error, Result};
use crate::featsel::{fit_selector, transform};
use crate::matrix::Matrix;
use crate::segmentation::{halves_of_rows, split_train_val_test, SplitIndices, DEFAULT_RATIOS};

/// The three experimental conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// Pooled data, no feature selection.
    Sota,
    /// Pooled data with univariate selection fitted on the training rows.
    Fs,
    /// Per-half selection and training, combined by weighted average.
    Twoheads,
}

impl Condition {
    pub const ALL: [Condition; 3] = [Condition::Sota, Condition::Fs, Condition::Twoheads];

    pub fn name(self) -> &'static str {
        match self {
            Condition::Sota => "sota",
            Condition::Fs => "fs",
            Condition::Twoheads => "twoheads",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sota" => Ok(Condition::Sota),
            "fs" => Ok(Condition::Fs),
            "twoheads" => Ok(Condition::Twoheads),
            other => Err(Error::Argument(format!(
                "unknown condition `{other}`; valid names: sota, fs, twoheads"
            ))),
        }
    }
}

/// Size-weighted mean of the two per-half accuracies, in percent.
pub fn combine_weighted(acc_1h: f64, n_1h: usize, acc_2h: f64, n_2h: usize) -> Result<f64> {
    if n_1h == 0 || n_2h == 0 {
        return Err(Error::Argument("combine weights must be >= 1".into()));
    }
    for a in [acc_1h, acc_2h] {
        if !(0.0..=100.0).contains(&a) {
            return Err(Error::Argument(format!(
                "accuracy {a} outside [0, 100]"
            )));
        }
    }
    Ok((n_1h as f64 * acc_1h + n_2h as f64 * acc_2h) / (n_1h + n_2h) as f64)
}

/// Per-half detail carried for the twoheads condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfStats {
    pub acc_1h_pct: f64,
    pub acc_2h_pct: f64,
    pub n_test_1h: usize,
    pub n_test_2h: usize,
}

/// One (classifier, condition, seed) cell execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub seed: u64,
    pub accuracy_pct: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub halves: Option<HalfStats>,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    /// Fit + predict (+ selection) wall clock, seconds.
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub classifier: String,
    pub condition: String,
    pub mean_accuracy_pct: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_acc_1h_pct: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_acc_2h_pct: Option<f64>,
    pub mean_runtime_s: f64,
    pub runs: Vec<RunEntry>,
}

/// Full benchmark output: config echo plus one cell per
/// (classifier, condition).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// FNV-1a 64 digest of the dataset's EEGB byte stream, hex.
    pub dataset_digest: String,
    pub n_trials: usize,
    pub n_channels: usize,
    pub selector_k: usize,
    pub seeds: Vec<u64>,
    pub hyperparams: Hyperparams,
    pub cells: Vec<CellReport>,
}

fn gather(features: &FeatureMatrix, rows: &[usize]) -> (Matrix, Vec<u8>) {
    let x = features.values.select_rows(rows);
    let y: Vec<u8> = rows.iter().map(|&i| features.row_meta[i].label).collect();
    (x, y)
}

/// Re-wraps an error with a context prefix, keeping its variant.
fn prefix_error(prefix: &str, e: Error) -> Error {
    match e {
        Error::Validation(m) => Error::Validation(format!("{prefix}: {m}")),
        Error::Format(m) => Error::Format(format!("{prefix}: {m}")),
        Error::Argument(m) => Error::Argument(format!("{prefix}: {m}")),
        Error::Stratification(m) => Error::Stratification(format!("{prefix}: {m}")),
        Error::Precondition(m) => Error::Precondition(format!("{prefix}: {m}")),
        other => other,
    }
}

struct PipelineOutcome {
    accuracy: f64,
    n_test: usize,
    seconds: f64,
}

/// Runs split -> (optional selector) -> fit -> predict on the given rows and
/// times exactly the selector + fit + predict section.
fn run_pipeline(
    features: &FeatureMatrix,
    rows: &[usize],
    select_k: Option<usize>,
    kind: ClassifierKind,
    hp: &Hyperparams,
    seed: u64,
) -> Result<(PipelineOutcome, SplitIndices)> {
    let labels: Vec<u8> = rows.iter().map(|&i| features.row_meta[i].label).collect();
    let split = split_train_val_test(&labels, DEFAULT_RATIOS, seed)?;
    let to_global = |local: &[usize]| -> Vec<usize> { local.iter().map(|&i| rows[i]).collect() };
    let (train_x, train_y) = gather(features, &to_global(&split.train));
    let (test_x, test_y) = gather(features, &to_global(&split.test));

    let started = Instant::now();
    let (model, test_x): (TrainedModel, Matrix) = match select_k {
        Some(k) => {
            let selector = fit_selector(&train_x, &train_y, k)?;
            let train_sel = transform(&train_x, &selector)?;
            let test_sel = transform(&test_x, &selector)?;
            (classifiers::fit(kind, &train_sel, &train_y, hp, seed)?, test_sel)
        }
        None => (classifiers::fit(kind, &train_x, &train_y, hp, seed)?, test_x),
    };
    let pred = classifiers::predict(&model, &test_x)?;
    let seconds = started.elapsed().as_secs_f64();

    let accuracy = classifiers::accuracy(&pred, &test_y)?;
    Ok((
        PipelineOutcome {
            accuracy,
            n_test: test_y.len(),
            seconds,
        },
        split,
    ))
}

/// Executes one (condition, classifier, seed) cell on an already-extracted
/// feature matrix.
pub fn run_condition(
    features: &FeatureMatrix,
    condition: Condition,
    kind: ClassifierKind,
    k: usize,
    hp: &Hyperparams,
    seed: u64,
) -> Result<RunEntry> {
    match condition {
        Condition::Sota | Condition::Fs => {
            let rows: Vec<usize> = (0..features.n_rows()).collect();
            let select_k = match condition {
                Condition::Fs => Some(k),
                _ => None,
            };
            let (out, split) = run_pipeline(features, &rows, select_k, kind, hp, seed)?;
            Ok(RunEntry {
                seed,
                accuracy_pct: out.accuracy * 100.0,
                halves: None,
                n_train: split.train.len(),
                n_val: split.val.len(),
                n_test: split.test.len(),
                runtime_s: out.seconds,
            })
        }
        Condition::Twoheads => {
            let halves = halves_of_rows(&features.row_meta)?;
            let mut acc = [0.0f64; 2];
            let mut n_test = [0usize; 2];
            let mut seconds = 0.0;
            let mut n_train = 0;
            let mut n_val = 0;
            for (h, rows) in [&halves.half_1h, &halves.half_2h].into_iter().enumerate() {
                let name = if h == 0 { "1H" } else { "2H" };
                let labels_present = rows.iter().any(|&i| features.row_meta[i].label == 0)
                    && rows.iter().any(|&i| features.row_meta[i].label == 1);
                if !labels_present {
                    return Err(Error::Stratification(format!(
                        "half {name} lost a label entirely"
                    )));
                }
                let (out, split) = run_pipeline(features, rows, Some(k), kind, hp, seed)
                    .map_err(|e| prefix_error(&format!("half {name}"), e))?;
                acc[h] = out.accuracy * 100.0;
                n_test[h] = out.n_test;
                seconds += out.seconds;
                n_train += split.train.len();
                n_val += split.val.len();
            }
            let combined = combine_weighted(acc[0], n_test[0], acc[1], n_test[1])?;
            Ok(RunEntry {
                seed,
                accuracy_pct: combined,
                halves: Some(HalfStats {
                    acc_1h_pct: acc[0],
                    acc_2h_pct: acc[1],
                    n_test_1h: n_test[0],
                    n_test_2h: n_test[1],
                }),
                n_train,
                n_val,
                n_test: n_test[0] + n_test[1],
                runtime_s: seconds,
            })
        }
    }
}

/// Extracts features once, then runs every (classifier, condition, seed)
/// cell sequentially (timed sections must not contend) and aggregates means.
pub fn run_benchmark(
    data: &RecordingSet,
    kinds: &[ClassifierKind],
    conditions: &[Condition],
    k: usize,
    hp: &Hyperparams,
    seeds: &[u64],
) -> Result<RunReport> {
    if kinds.is_empty() || conditions.is_empty() || seeds.is_empty() {
        return Err(Error::Argument(
            "need at least one classifier, condition, and seed".into(),
        ));
    }
    hp.validate()?;
    let digest = container_digest(data);
    let spec = FilterSpec::alpha_band(f64::from(data.sample_rate_hz));
    let features = extract_features(data, &spec)?;

    let mut cells = Vec::with_capacity(kinds.len() * conditions.len());
    for &kind in kinds {
        for &condition in conditions {
            let mut runs = Vec::with_capacity(seeds.len());
            for &seed in seeds {
                let entry = run_condition(&features, condition, kind, k, hp, seed)
                    .map_err(|e| {
                        prefix_error(
                            &format!(
                                "cell ({}, {}, seed {seed})",
                                kind.name(),
                                condition.name()
                            ),
                            e,
                        )
                    })?;
                runs.push(entry);
            }
            let mean = |get: &dyn Fn(&RunEntry) -> f64| -> f64 {
                runs.iter().map(|r| get(r)).sum::<f64>() / runs.len() as f64
            };
            let halves = runs.iter().all(|r| r.halves.is_some());
            cells.push(CellReport {
                classifier: kind.name().to_string(),
                condition: condition.name().to_string(),
                mean_accuracy_pct: mean(&|r| r.accuracy_pct),
                mean_acc_1h_pct: halves
                    .then(|| mean(&|r| r.halves.expect("checked").acc_1h_pct)),
                mean_acc_2h_pct: halves
                    .then(|| mean(&|r| r.halves.expect("checked").acc_2h_pct)),
                mean_runtime_s: mean(&|r| r.runtime_s),
                runs,
            });
        }
    }

    Ok(RunReport {
        dataset_digest: format!("{digest:016x}"),
        n_trials: data.n_trials(),
        n_channels: data.n_channels,
        selector_k: k,
        seeds: seeds.to_vec(),
        hyperparams: hp.clone(),
        cells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::Argument(format!(
                "unknown report format `{other}`; valid: json, csv"
            ))),
        }
    }
}

pub fn report_to_json(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes infallibly");
    s.push('\n');
    s
}

pub fn report_from_json(s: &str) -> Result<RunReport> {
    serde_json::from_str(s).map_err(|e| Error::Format(format!("report json: {e}")))
}

/// CSV rendering: one row per (classifier, condition) with empty half
/// columns for the pooled conditions.
pub fn report_to_csv(report: &RunReport) -> String {
    let mut out = String::from("classifier,condition,mean_acc,acc_1h,acc_2h,runtime_s\n");
    for cell in &report.cells {
        let h1 = cell
            .mean_acc_1h_pct
            .map_or(String::new(), |v| format!("{v}"));
        let h2 = cell
            .mean_acc_2h_pct
            .map_or(String::new(), |v| format!("{v}"));
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            cell.classifier, cell.condition, cell.mean_accuracy_pct, h1, h2, cell.mean_runtime_s
        ));
    }
    out
}

pub fn emit_report(report: &RunReport, path: &Path, format: ReportFormat) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let body = match format {
        ReportFormat::Json => report_to_json(report),
        ReportFormat::Csv => report_to_csv(report),
    };
    w.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Clears every wall-clock field, for byte-comparing reports across runs.
pub fn zero_runtimes(report: &mut RunReport) {
    for cell in &mut report.cells {
        cell.mean_runtime_s = 0.0;
        for run in &mut cell.runs {
            run.runtime_s = 0.0;
        }
    }
}
