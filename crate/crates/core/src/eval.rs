//! Error metrics and model comparison tables.
//!
//! All values are in scaled target units unless unscaled explicitly.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::math;
use crate::models::ModelKind;
use crate::train::{mse, EvalReport};
use crate::{Error, Result};

pub const DEFAULT_BINS: usize = 30;
/// Residuals further than this many standard deviations from the mean are outliers.
pub const OUTLIER_SIGMAS: f64 = 3.0;

pub fn rmse(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    mse(predictions, targets).map(math::sqrt)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub min: f64,
    pub max: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// `counts.len() + 1` bin edges.
    pub fn edges(&self) -> Vec<f64> {
        let bins = self.counts.len();
        let width = (self.max - self.min) / bins as f64;
        (0..=bins).map(|i| self.min + width * i as f64).collect()
    }
}

/// Method-of-moments Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub mu: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    /// `prediction - target`.
    pub residuals: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation.
    pub std_dev: f64,
    pub gaussian: GaussianFit,
    /// 25th, 50th and 75th percentiles with linear interpolation.
    pub quartiles: [f64; 3],
    pub outliers: usize,
    pub histogram: Histogram,
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn histogram(values: &[f64], bins: usize) -> Histogram {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut counts = vec![0; bins];
    if max > min {
        let width = (max - min) / bins as f64;
        for &v in values {
            let b = ((v - min) / width) as usize;
            counts[b.min(bins - 1)] += 1;
        }
    } else {
        counts[0] = values.len();
    }
    Histogram { min, max, counts }
}

/// Residual statistics and a `bins`-bin histogram over `[min, max]`.
pub fn error_stats(predictions: &[f64], targets: &[f64], bins: usize) -> Result<ErrorStats> {
    if predictions.len() != targets.len() {
        return Err(Error::Shape(format!(
            "{} predictions but {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    if predictions.len() < 2 {
        return Err(Error::InsufficientData {
            context: "error statistics",
            required: 2,
            actual: predictions.len(),
        });
    }
    if bins == 0 {
        return Err(Error::InvalidParameter("histogram needs at least one bin".into()));
    }
    let residuals: Vec<f64> = predictions.iter().zip(targets).map(|(p, t)| p - t).collect();
    let n = residuals.len() as f64;
    let mean = residuals.iter().sum::<f64>() / n;
    let var = residuals.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
    let std_dev = math::sqrt(var);
    let mut sorted = residuals.clone();
    sorted.sort_by(f64::total_cmp);
    let quartiles = [
        percentile(&sorted, 0.25),
        percentile(&sorted, 0.5),
        percentile(&sorted, 0.75),
    ];
    let outliers = residuals
        .iter()
        .filter(|r| math::abs(*r - mean) > OUTLIER_SIGMAS * std_dev)
        .count();
    Ok(ErrorStats {
        histogram: histogram(&residuals, bins),
        residuals,
        mean,
        std_dev,
        gaussian: GaussianFit {
            mu: mean,
            sigma: std_dev,
        },
        quartiles,
        outliers,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: ModelKind,
    pub features: usize,
    pub avg_rmse: f64,
    pub train_seconds: f64,
}

/// One row per report, ascending by average RMSE, ties by model name.
pub fn compare_models(reports: &[EvalReport]) -> Vec<ComparisonRow> {
    let mut rows: Vec<ComparisonRow> = reports
        .iter()
        .map(|r| ComparisonRow {
            model: r.model,
            features: r.k_features,
            avg_rmse: r.avg_rmse,
            train_seconds: r.total_train_seconds,
        })
        .collect();
    rows.sort_by(|a, b| {
        a.avg_rmse
            .total_cmp(&b.avg_rmse)
            .then_with(|| a.model.name().cmp(b.model.name()))
            .then_with(|| a.features.cmp(&b.features))
    });
    rows
}

/// CSV with header `model,features,avg_rmse,train_seconds`.
pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("model,features,avg_rmse,train_seconds\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.model, r.features, r.avg_rmse, r.train_seconds);
    }
    out
}
