//! Joint ADAM training with MSE loss, per-epoch learning-rate decay and
//! early stopping on a chronological validation tail, plus the fold
//! protocols used for evaluation.
//!
//! Mini-batches are contiguous slices in sample order and are never
//! shuffled. One epoch is one pass over the training part.

mod adam;
mod cv;
mod folds;

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use adam::{adam_step, AdamState, BETA1, BETA2, EPSILON};
pub use cv::{cross_validate, evaluate_fold, Clock, EvalReport, FoldResult, NoClock};
pub use folds::{holdout, plan_folds, Fold, FoldPlan, Protocol, DEFAULT_SPLITS, HOLDOUT_TRAIN_FRACTION};

use crate::models::{ParameterBundle, Regressor, RegressorSpec};
use crate::preprocess::WindowedDataset;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub batch_size: usize,
    /// Upper bound on epochs.
    pub max_epochs: usize,
    pub learning_rate: f64,
    /// Learning rate multiplier applied after every epoch.
    pub decay: f64,
    pub patience: usize,
    pub min_delta: f64,
    /// Share of the training samples held out, from the chronological tail.
    pub validation_fraction: f64,
    /// Seed for `KFold` shuffling.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 32,
            max_epochs: 500,
            learning_rate: 0.01,
            decay: 0.99,
            patience: 20,
            min_delta: 1e-5,
            validation_fraction: 0.1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.batch_size > 0
            && self.max_epochs > 0
            && self.learning_rate > 0.0
            && self.decay > 0.0
            && self.decay <= 1.0
            && self.patience > 0
            && self.min_delta >= 0.0
            && self.validation_fraction > 0.0
            && self.validation_fraction < 0.5;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid training config {self:?}")))
        }
    }

    /// Learning rate used during `epoch` (1-based).
    pub fn learning_rate_at(&self, epoch: usize) -> f64 {
        self.learning_rate * libm::pow(self.decay, epoch.saturating_sub(1) as f64)
    }

    /// Validation samples carved from `n` training samples.
    pub fn validation_len(&self, n: usize) -> usize {
        let v = libm::round(self.validation_fraction * n as f64) as usize;
        v.max(1)
    }
}

/// Mean squared error.
pub fn mse(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    if predictions.len() != targets.len() || predictions.is_empty() {
        return Err(Error::Shape(format!(
            "mse over {} predictions and {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    let sum: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(sum / predictions.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
    pub learning_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub seed: u64,
    pub epochs: usize,
    pub best_epoch: usize,
    pub best_val_mse: f64,
    pub final_train_mse: f64,
    pub stopped_early: bool,
}

/// Best-validation parameter snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: RegressorSpec,
    pub parameters: ParameterBundle,
    pub metadata: TrainingMetadata,
}

impl TrainedModel {
    pub fn regressor(&self) -> Result<Regressor> {
        Regressor::with_parameters(self.spec.clone(), &self.parameters)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: TrainedModel,
    pub history: Vec<EpochLoss>,
}

/// Predictions for every sample of `data`.
pub fn predict(model: &Regressor, data: &WindowedDataset) -> Result<Vec<f64>> {
    (0..data.len()).map(|i| model.predict(data.sample(i))).collect()
}

fn dataset_mse(model: &Regressor, data: &WindowedDataset, range: core::ops::Range<usize>) -> Result<f64> {
    let mut sum = 0.0;
    for i in range.clone() {
        let r = model.predict(data.sample(i))? - data.targets[i];
        sum += r * r;
    }
    Ok(sum / range.len() as f64)
}

fn check_finite(what: &str, epoch: usize, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::Numeric(format!("{what} diverged at epoch {epoch}")))
    }
}

/// Trains a fresh model built from `spec` on `data`.
///
/// The last `validation_len` samples drive early stopping; the returned
/// parameters are those of the epoch with the lowest validation MSE.
pub fn fit(spec: &RegressorSpec, data: &WindowedDataset, config: &TrainConfig) -> Result<FitResult> {
    config.validate()?;
    if data.len() <= config.batch_size {
        return Err(Error::InsufficientData {
            context: "training samples (must exceed batch size)",
            required: config.batch_size + 1,
            actual: data.len(),
        });
    }
    if data.n_features() != spec.k_features || data.lookback != spec.lookback {
        return Err(Error::Shape(format!(
            "dataset is {}x{} but the spec expects {}x{}",
            data.lookback,
            data.n_features(),
            spec.lookback,
            spec.k_features
        )));
    }
    let n_val = config.validation_len(data.len());
    let n_train = data.len() - n_val;
    let mut model = Regressor::new(spec.clone())?;
    let mut params = model.parameters();
    let mut adam = AdamState::new(params.total());

    let mut history = Vec::new();
    let mut best_params = params.clone();
    let mut best_val = f64::INFINITY;
    let mut best_epoch = 0;
    let mut reference = f64::INFINITY;
    let mut stale = 0;
    let mut stopped_early = false;

    for epoch in 1..=config.max_epochs {
        let lr = config.learning_rate_at(epoch);
        let mut start = 0;
        while start < n_train {
            let end = (start + config.batch_size).min(n_train);
            let scale = 2.0 / (end - start) as f64;
            let mut grads = params.zeros_like();
            for i in start..end {
                let (y, tape) = model.forward(data.sample(i))?;
                let g = model.backward(&tape, scale * (y - data.targets[i]))?;
                grads.add_scaled(&g, 1.0)?;
            }
            adam_step(&mut adam, &mut params, &grads, lr)?;
            model.set_parameters(&params)?;
            start = end;
        }
        let train_mse = dataset_mse(&model, data, 0..n_train)?;
        let val_mse = dataset_mse(&model, data, n_train..data.len())?;
        check_finite("training loss", epoch, train_mse)?;
        check_finite("validation loss", epoch, val_mse)?;
        history.push(EpochLoss {
            epoch,
            train_mse,
            val_mse,
            learning_rate: lr,
        });
        if val_mse < best_val {
            best_val = val_mse;
            best_epoch = epoch;
            best_params = params.clone();
        }
        if val_mse < reference - config.min_delta {
            reference = val_mse;
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                stopped_early = true;
                break;
            }
        }
    }

    model.set_parameters(&best_params)?;
    let final_train_mse = dataset_mse(&model, data, 0..n_train)?;
    Ok(FitResult {
        model: TrainedModel {
            spec: spec.clone(),
            parameters: best_params,
            metadata: TrainingMetadata {
                seed: spec.seed,
                epochs: history.len(),
                best_epoch,
                best_val_mse: best_val,
                final_train_mse,
                stopped_early,
            },
        },
        history,
    })
}
