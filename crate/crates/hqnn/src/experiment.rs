//! The experiment grid and single-model workflows.
//!
//! Each grid cell is one (protocol, model kind, feature count) triple and
//! gets its own seed derived from the master seed and the cell's name.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use hqnn_core::eval::{compare_models, comparison_csv, error_stats, rmse, ComparisonRow, ErrorStats, DEFAULT_BINS};
use hqnn_core::indicators::OhlcSeries;
use hqnn_core::models::{ModelKind, RegressorSpec};
use hqnn_core::preprocess::{build_features, fit_scaler_rows, select_k_best_rows, window, FeatureMatrix, ScalerParams};
use hqnn_core::synth::synth_data;
use hqnn_core::train::{
    cross_validate, fit, holdout, plan_folds, predict, Clock, EpochLoss, EvalReport, NoClock, Protocol,
    TrainedModel, HOLDOUT_TRAIN_FRACTION,
};
use serde::{Deserialize, Serialize};

use crate::config::{derive_seed, DataSource, ExperimentConfig};
use crate::io::{ingest_csv, loss_csv, write_atomic};
use crate::{FailureKind, StageError};

pub const COMPARISON_FILE: &str = "comparison.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

struct WallClock(Instant);

impl Clock for WallClock {
    fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

fn output_error(err: impl std::fmt::Display) -> StageError {
    StageError::new("output", FailureKind::Data, err)
}

pub fn load_series(config: &ExperimentConfig) -> Result<OhlcSeries, StageError> {
    match &config.data {
        DataSource::Csv { path } => ingest_csv(path).map_err(|e| {
            let message = format!("{}: {e}", path.display());
            StageError::new("ingest", FailureKind::Data, message)
        }),
        DataSource::Synthetic { n_bars, regime } => {
            synth_data(*n_bars, derive_seed(config.seed, "data"), *regime).map_err(|e| StageError::core("synth", e))
        }
    }
}

pub fn prepare(config: &ExperimentConfig) -> Result<FeatureMatrix, StageError> {
    let series = load_series(config)?;
    build_features(&series).map_err(|e| StageError::core("preprocess", e))
}

/// Name under which a cell's seed is derived.
pub fn cell_component(protocol: Protocol, kind: ModelKind, k: usize) -> String {
    format!("model/{protocol}/{kind}/{k}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub spec: RegressorSpec,
    pub report: EvalReport,
    pub error_stats: Option<ErrorStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub protocol: Protocol,
    pub model: ModelKind,
    pub k: usize,
    pub seed: u64,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_sha256: String,
    pub seed: u64,
    pub data_seed: u64,
    pub fold_seed: u64,
    pub status: String,
    pub cells: Vec<CellRecord>,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub reports: Vec<EvalReport>,
    pub comparison: Vec<(Protocol, Vec<ComparisonRow>)>,
    pub manifest: Manifest,
}

struct Cell {
    protocol: Protocol,
    kind: ModelKind,
    k: usize,
    seed: u64,
    dir: PathBuf,
}

fn protocol_dir(config: &ExperimentConfig, protocol: Protocol) -> PathBuf {
    if config.protocols.len() == 1 {
        config.output_dir.clone()
    } else {
        config.output_dir.join(protocol.name())
    }
}

fn write_cell(cell: &Cell, spec: &RegressorSpec, report: &EvalReport) -> Result<(), StageError> {
    let residuals = report.residuals();
    let predictions: Vec<f64> = report.folds.iter().flat_map(|f| f.predictions.clone()).collect();
    let targets: Vec<f64> = predictions.iter().zip(&residuals).map(|(p, r)| p - r).collect();
    let file = ReportFile {
        spec: spec.clone(),
        report: report.clone(),
        error_stats: error_stats(&predictions, &targets, DEFAULT_BINS).ok(),
    };
    let json = serde_json::to_vec_pretty(&file).map_err(output_error)?;
    write_atomic(&cell.dir.join(format!("report_{}_{}.json", cell.kind, cell.k)), &json).map_err(output_error)?;
    for fold in &report.folds {
        let csv = loss_csv(fold.fold, &fold.history).map_err(output_error)?;
        let name = format!("loss_{}_{}_{}.csv", cell.kind, cell.k, fold.fold);
        write_atomic(&cell.dir.join(name), csv.as_bytes()).map_err(output_error)?;
    }
    Ok(())
}

fn run_cell(
    config: &ExperimentConfig,
    matrix: &FeatureMatrix,
    cell: &Cell,
    fold_seed: u64,
) -> Result<EvalReport, StageError> {
    let spec = config.spec(cell.kind, cell.k, cell.seed);
    spec.validate().map_err(|e| StageError::core("config", e))?;
    let n_samples = matrix.n_rows().saturating_sub(config.lookback);
    let plan = plan_folds(n_samples, cell.protocol, config.n_splits, fold_seed)
        .map_err(|e| StageError::core("folds", e))?;
    let report = if config.record_timing {
        cross_validate(&spec, matrix, &config.train, &plan, &WallClock(Instant::now()))
    } else {
        cross_validate(&spec, matrix, &config.train, &plan, &NoClock)
    }
    .map_err(|e| StageError::core("train", e))?;
    write_cell(cell, &spec, &report)?;
    Ok(report)
}

/// Runs the whole grid with up to `jobs` cells in flight.
///
/// Outputs of finished cells are kept even when others fail; the manifest
/// then carries status `failed` and the first failure is returned.
pub fn run_experiment(config: &ExperimentConfig, jobs: usize) -> Result<RunSummary, StageError> {
    config
        .validate()
        .map_err(|e| StageError::new("config", FailureKind::Config, e))?;
    let kinds = config
        .model_kinds()
        .map_err(|e| StageError::new("config", FailureKind::Config, e))?;
    let matrix = prepare(config)?;
    let fold_seed = derive_seed(config.seed, "folds");
    let mut cells = Vec::new();
    for &protocol in &config.protocols {
        let dir = protocol_dir(config, protocol);
        fs::create_dir_all(&dir).map_err(|e| output_error(format!("{}: {e}", dir.display())))?;
        for &kind in &kinds {
            for &k in &config.features {
                cells.push(Cell {
                    protocol,
                    kind,
                    k,
                    seed: derive_seed(config.seed, &cell_component(protocol, kind, k)),
                    dir: dir.clone(),
                });
            }
        }
    }

    let results: Mutex<Vec<Option<Result<EvalReport, StageError>>>> = Mutex::new(vec![None; cells.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, cells.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(cell) = cells.get(i) else { break };
                let r = run_cell(config, &matrix, cell, fold_seed);
                results.lock().expect("results lock")[i] = Some(r);
            });
        }
    });
    let results: Vec<Result<EvalReport, StageError>> = results
        .into_inner()
        .expect("results lock")
        .into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect();

    let mut records = Vec::new();
    let mut reports = Vec::new();
    let mut first_failure = None;
    for (cell, result) in cells.iter().zip(results) {
        let (status, error) = match result {
            Ok(report) => {
                reports.push(report);
                ("ok", None)
            }
            Err(e) => {
                let msg = e.to_string();
                first_failure.get_or_insert(e);
                ("failed", Some(msg))
            }
        };
        records.push(CellRecord {
            protocol: cell.protocol,
            model: cell.kind,
            k: cell.k,
            seed: cell.seed,
            status: status.into(),
            error,
        });
    }

    let mut comparison = Vec::new();
    for &protocol in &config.protocols {
        let subset: Vec<EvalReport> = reports.iter().filter(|r| r.protocol == protocol).cloned().collect();
        let rows = compare_models(&subset);
        let path = protocol_dir(config, protocol).join(COMPARISON_FILE);
        write_atomic(&path, comparison_csv(&rows).as_bytes()).map_err(output_error)?;
        comparison.push((protocol, rows));
    }

    let manifest = Manifest {
        config_sha256: config.hash(),
        seed: config.seed,
        data_seed: derive_seed(config.seed, "data"),
        fold_seed,
        status: if first_failure.is_some() { "failed" } else { "ok" }.into(),
        cells: records,
        config: config.clone(),
    };
    let json = serde_json::to_vec_pretty(&manifest).map_err(output_error)?;
    write_atomic(&config.output_dir.join(MANIFEST_FILE), &json).map_err(output_error)?;

    match first_failure {
        Some(e) => Err(e),
        None => Ok(RunSummary {
            reports,
            comparison,
            manifest,
        }),
    }
}

/// A model trained on the chronological 80% head, with the preprocessing
/// needed to score new windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub trained: TrainedModel,
    pub selected_features: Vec<String>,
    pub scaler: ScalerParams,
    pub train_samples: usize,
    pub history: Vec<EpochLoss>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutEvaluation {
    pub model: ModelKind,
    pub k_features: usize,
    pub test_samples: usize,
    pub rmse: f64,
    pub error_stats: ErrorStats,
}

fn holdout_split(config: &ExperimentConfig, matrix: &FeatureMatrix) -> Result<(Vec<usize>, Vec<usize>), StageError> {
    let n_samples = matrix.n_rows().saturating_sub(config.lookback);
    let plan = holdout(n_samples, HOLDOUT_TRAIN_FRACTION).map_err(|e| StageError::core("folds", e))?;
    let fold = &plan.folds[0];
    let first_test = fold.test[0];
    let train = fold.train.iter().copied().filter(|&i| i + config.lookback < first_test).collect();
    Ok((train, fold.test.clone()))
}

/// Fits one model on the holdout training part of the configured data.
pub fn train_holdout(config: &ExperimentConfig, kind: ModelKind, k: usize) -> Result<ModelArtifact, StageError> {
    let matrix = prepare(config)?;
    let (train, _) = holdout_split(config, &matrix)?;
    let mut rows: Vec<usize> = train.iter().flat_map(|&i| i..=i + config.lookback).collect();
    rows.sort_unstable();
    rows.dedup();
    let pre = |e| StageError::core("preprocess", e);
    let selected = select_k_best_rows(&matrix, k, &rows).map_err(pre)?;
    let scaler = fit_scaler_rows(&matrix, &rows).map_err(pre)?;
    let data = window(&matrix, &scaler, &selected, config.lookback).map_err(pre)?.subset(&train);
    let spec = config.spec(kind, k, derive_seed(config.seed, &cell_component(Protocol::Holdout, kind, k)));
    let fitted = fit(&spec, &data, &config.train).map_err(|e| StageError::core("train", e))?;
    Ok(ModelArtifact {
        trained: fitted.model,
        selected_features: selected,
        scaler,
        train_samples: train.len(),
        history: fitted.history,
    })
}

/// Scores a saved model on the holdout test part of the configured data.
pub fn evaluate_holdout(config: &ExperimentConfig, artifact: &ModelArtifact) -> Result<HoldoutEvaluation, StageError> {
    let matrix = prepare(config)?;
    let (_, test) = holdout_split(config, &matrix)?;
    let data = window(&matrix, &artifact.scaler, &artifact.selected_features, artifact.trained.spec.lookback)
        .map_err(|e| StageError::core("preprocess", e))?
        .subset(&test);
    let eval = |e| StageError::core("evaluate", e);
    let model = artifact.trained.regressor().map_err(eval)?;
    let predictions = predict(&model, &data).map_err(eval)?;
    Ok(HoldoutEvaluation {
        model: artifact.trained.spec.kind,
        k_features: artifact.trained.spec.k_features,
        test_samples: data.len(),
        rmse: rmse(&predictions, &data.targets).map_err(eval)?,
        error_stats: error_stats(&predictions, &data.targets, DEFAULT_BINS).map_err(eval)?,
    })
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), StageError> {
    let json = serde_json::to_vec_pretty(value).map_err(output_error)?;
    write_atomic(path, &json).map_err(output_error)
}
