use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{fit, predict, EpochLoss, Fold, FoldPlan, Protocol, TrainConfig, TrainingMetadata};
use crate::eval::rmse;
use crate::models::{ModelKind, RegressorSpec};
use crate::preprocess::{fit_scaler_rows, select_k_best_rows, window, FeatureMatrix};
use crate::{Error, Result};

/// Monotonic seconds source for training-time measurements.
pub trait Clock {
    fn seconds(&self) -> f64;
}

/// Reports zero elapsed time, keeping reports byte-reproducible.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn seconds(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_samples: usize,
    pub test_samples: usize,
    pub selected_features: Vec<String>,
    pub rmse: f64,
    pub train_seconds: f64,
    pub predictions: Vec<f64>,
    pub targets: Vec<f64>,
    /// Feature-matrix row of each test target.
    pub target_rows: Vec<usize>,
    pub history: Vec<EpochLoss>,
    pub metadata: TrainingMetadata,
}

impl FoldResult {
    pub fn residuals(&self) -> Vec<f64> {
        self.predictions.iter().zip(&self.targets).map(|(p, t)| p - t).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: ModelKind,
    pub k_features: usize,
    pub protocol: Protocol,
    pub folds: Vec<FoldResult>,
    /// Arithmetic mean of the per-fold RMSEs.
    pub avg_rmse: f64,
    pub total_train_seconds: f64,
}

impl EvalReport {
    /// Test residuals of every fold, in fold order.
    pub fn residuals(&self) -> Vec<f64> {
        self.folds.iter().flat_map(FoldResult::residuals).collect()
    }
}

/// Trains and scores one fold.
///
/// Fold indices address lookback windows: sample `i` reads matrix rows
/// `i..i + lookback` and targets row `i + lookback`. For chronological
/// protocols, training samples whose target row reaches into the first test
/// window are dropped. Feature selection and scaling are fitted on the rows
/// touched by the remaining training samples only.
pub fn evaluate_fold(
    spec: &RegressorSpec,
    matrix: &FeatureMatrix,
    config: &TrainConfig,
    protocol: Protocol,
    fold: &Fold,
    index: usize,
    clock: &dyn Clock,
) -> Result<FoldResult> {
    let lookback = spec.lookback;
    let n_samples = matrix.n_rows().saturating_sub(lookback);
    if fold.train.iter().chain(&fold.test).any(|&i| i >= n_samples) || fold.test.is_empty() {
        return Err(Error::Shape(alloc::format!(
            "fold {index} does not fit {n_samples} windows"
        )));
    }
    let train: Vec<usize> = if protocol.is_chronological() {
        let first_test = fold.test.iter().copied().min().unwrap_or(0);
        fold.train.iter().copied().filter(|&i| i + lookback < first_test).collect()
    } else {
        fold.train.clone()
    };
    let mut rows: Vec<usize> = train.iter().flat_map(|&i| i..=i + lookback).collect();
    rows.sort_unstable();
    rows.dedup();
    let selected = select_k_best_rows(matrix, spec.k_features, &rows)?;
    let scaler = fit_scaler_rows(matrix, &rows)?;
    let data = window(matrix, &scaler, &selected, lookback)?;
    let train_data = data.subset(&train);
    let test_data = data.subset(&fold.test);

    let start = clock.seconds();
    let fitted = fit(spec, &train_data, config)?;
    let train_seconds = clock.seconds() - start;

    let model = fitted.model.regressor()?;
    let predictions = predict(&model, &test_data)?;
    Ok(FoldResult {
        fold: index,
        train_samples: train.len(),
        test_samples: test_data.len(),
        selected_features: selected,
        rmse: rmse(&predictions, &test_data.targets)?,
        train_seconds,
        predictions,
        targets: test_data.targets,
        target_rows: test_data.target_rows,
        history: fitted.history,
        metadata: fitted.model.metadata,
    })
}

/// Runs every fold of `plan` in order and averages the RMSEs.
pub fn cross_validate(
    spec: &RegressorSpec,
    matrix: &FeatureMatrix,
    config: &TrainConfig,
    plan: &FoldPlan,
    clock: &dyn Clock,
) -> Result<EvalReport> {
    let folds = plan
        .folds
        .iter()
        .enumerate()
        .map(|(j, fold)| evaluate_fold(spec, matrix, config, plan.protocol, fold, j, clock))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_folds(spec, plan.protocol, folds))
}

impl EvalReport {
    /// Assembles a report from fold results, sorting them by fold index.
    pub fn from_folds(spec: &RegressorSpec, protocol: Protocol, mut folds: Vec<FoldResult>) -> Self {
        folds.sort_by_key(|f| f.fold);
        let n = folds.len().max(1) as f64;
        Self {
            model: spec.kind,
            k_features: spec.k_features,
            protocol,
            avg_rmse: folds.iter().map(|f| f.rmse).sum::<f64>() / n,
            total_train_seconds: folds.iter().map(|f| f.train_seconds).sum(),
            folds,
        }
    }
}
