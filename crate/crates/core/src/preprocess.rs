//! Feature assembly, selection, scaling and windowing.
//!
//! Bars become rows of a [`FeatureMatrix`]; a [`ScalerParams`] fitted on
//! training rows maps them into `[0, 1]`; [`window`] slices the scaled rows
//! into `(lookback x k)` inputs whose target is the next bar's scaled close.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use crate::indicators::{self, OhlcSeries};
use crate::math;
use crate::{Error, Result};

pub const RSI_PERIOD: usize = 14;
pub const MACD_FAST: usize = 12;
pub const MACD_SLOW: usize = 26;
pub const MACD_SIGNAL: usize = 9;
pub const ADX_PERIOD: usize = 14;

/// Column order produced by [`build_features`].
pub const FEATURE_COLUMNS: [&str; 9] = [
    "open",
    "high",
    "low",
    "close",
    "rsi14",
    "macd_line",
    "macd_signal",
    "macd_hist",
    "adx14",
];

/// Value assigned to every entry of a constant column after scaling.
pub const CONSTANT_COLUMN_VALUE: f64 = 0.5;

/// Rectangular per-bar features with the raw close as target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub column_names: Vec<String>,
    /// Row-major, `rows.len() == target.len()`.
    pub rows: Vec<Vec<f64>>,
    pub target: Vec<f64>,
    /// Index of each row in the source series.
    pub source_index: Vec<usize>,
}

impl FeatureMatrix {
    pub fn new(column_names: Vec<String>, rows: Vec<Vec<f64>>, target: Vec<f64>) -> Result<Self> {
        if rows.len() != target.len() {
            return Err(Error::Shape(format!(
                "{} rows but {} targets",
                rows.len(),
                target.len()
            )));
        }
        if let Some((i, _)) = rows
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != column_names.len())
        {
            return Err(Error::Shape(format!(
                "row {i} has {} values, expected {}",
                rows[i].len(),
                column_names.len()
            )));
        }
        let source_index = (0..rows.len()).collect();
        Ok(Self {
            column_names,
            rows,
            target,
            source_index,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_columns(&self) -> usize {
        self.column_names.len()
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(move |r| r[j])
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }
}

/// Builds the nine-column feature matrix, dropping leading warmup rows.
pub fn build_features(series: &OhlcSeries) -> Result<FeatureMatrix> {
    let rsi = indicators::rsi(series, RSI_PERIOD)?;
    let macd = indicators::macd(series, MACD_FAST, MACD_SLOW, MACD_SIGNAL)?;
    let adx = indicators::adx(series, ADX_PERIOD)?;
    let columns = [
        &rsi,
        &macd.macd_line,
        &macd.signal_line,
        &macd.histogram,
        &adx,
    ];
    let start = columns.iter().map(|c| c.warmup).max().unwrap_or(0);
    if start >= series.len() {
        return Err(Error::InsufficientData {
            context: "feature matrix",
            required: start + 1,
            actual: series.len(),
        });
    }
    let mut rows = Vec::with_capacity(series.len() - start);
    for i in start..series.len() {
        let mut row = Vec::with_capacity(FEATURE_COLUMNS.len());
        row.extend_from_slice(&[
            series.open()[i],
            series.high()[i],
            series.low()[i],
            series.close()[i],
        ]);
        for c in &columns {
            row.push(c.values[i].ok_or_else(|| {
                Error::Numeric(format!("{} undefined at bar {i}", c.name))
            })?);
        }
        rows.push(row);
    }
    Ok(FeatureMatrix {
        column_names: FEATURE_COLUMNS.iter().map(|c| c.to_string()).collect(),
        rows,
        target: series.close()[start..].to_vec(),
        source_index: (start..series.len()).collect(),
    })
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some(sxy / math::sqrt(sxx * syy))
    }
}

/// Univariate regression F-statistic `r^2 (n - 2) / (1 - r^2)` of each column
/// against the target over `rows`. Constant columns score 0; perfect
/// correlation scores `+inf`.
pub fn f_scores(matrix: &FeatureMatrix, rows: &[usize]) -> Result<Vec<f64>> {
    if rows.len() < 3 {
        return Err(Error::InsufficientData {
            context: "feature scoring",
            required: 3,
            actual: rows.len(),
        });
    }
    let y: Vec<f64> = rows.iter().map(|&i| matrix.target[i]).collect();
    let dof = (rows.len() - 2) as f64;
    Ok((0..matrix.n_columns())
        .map(|j| {
            let x: Vec<f64> = rows.iter().map(|&i| matrix.rows[i][j]).collect();
            match pearson(&x, &y) {
                None => 0.0,
                Some(r) => {
                    let r2 = (r * r).min(1.0);
                    if r2 >= 1.0 {
                        f64::INFINITY
                    } else {
                        r2 * dof / (1.0 - r2)
                    }
                }
            }
        })
        .collect())
}

/// Names of the `k` best-scoring columns, highest score first. Ties keep
/// column order.
pub fn select_k_best(matrix: &FeatureMatrix, k: usize, rows: Range<usize>) -> Result<Vec<String>> {
    let rows: Vec<usize> = rows.collect();
    select_k_best_rows(matrix, k, &rows)
}

/// [`select_k_best`] over an arbitrary row subset.
pub fn select_k_best_rows(matrix: &FeatureMatrix, k: usize, rows: &[usize]) -> Result<Vec<String>> {
    if k == 0 || k > matrix.n_columns() {
        return Err(Error::InvalidParameter(format!(
            "k = {k} must lie in 1..={}",
            matrix.n_columns()
        )));
    }
    check_rows(matrix, rows)?;
    let scores = f_scores(matrix, rows)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    Ok(order[..k]
        .iter()
        .map(|&j| matrix.column_names[j].clone())
        .collect())
}

fn check_rows(matrix: &FeatureMatrix, rows: &[usize]) -> Result<()> {
    match rows.iter().find(|&&i| i >= matrix.n_rows()) {
        Some(&i) => Err(Error::Shape(format!(
            "row {i} out of range for {} rows",
            matrix.n_rows()
        ))),
        None => Ok(()),
    }
}

/// Per-column min/max fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub column_names: Vec<String>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub target_min: f64,
    pub target_max: f64,
}

impl ScalerParams {
    pub fn is_constant(&self, j: usize) -> bool {
        self.max[j] == self.min[j]
    }

    /// Scales column `j`, clamping into `[0, 1]`.
    pub fn scale(&self, j: usize, x: f64) -> f64 {
        if self.is_constant(j) {
            CONSTANT_COLUMN_VALUE
        } else {
            ((x - self.min[j]) / (self.max[j] - self.min[j])).clamp(0.0, 1.0)
        }
    }

    /// Inverse of [`scale`](Self::scale) for unclamped inputs.
    pub fn unscale(&self, j: usize, s: f64) -> f64 {
        if self.is_constant(j) {
            self.min[j]
        } else {
            self.min[j] + s * (self.max[j] - self.min[j])
        }
    }

    /// Scales a target value. Not clamped: out-of-range test targets keep
    /// their true distance.
    pub fn scale_target(&self, y: f64) -> f64 {
        let span = self.target_max - self.target_min;
        if span == 0.0 {
            CONSTANT_COLUMN_VALUE
        } else {
            (y - self.target_min) / span
        }
    }

    pub fn unscale_target(&self, s: f64) -> f64 {
        let span = self.target_max - self.target_min;
        if span == 0.0 {
            self.target_min
        } else {
            self.target_min + s * span
        }
    }
}

/// Fits min/max over `train_rows`.
pub fn fit_scaler(matrix: &FeatureMatrix, train_rows: Range<usize>) -> Result<ScalerParams> {
    let rows: Vec<usize> = train_rows.collect();
    fit_scaler_rows(matrix, &rows)
}

/// [`fit_scaler`] over an arbitrary row subset.
pub fn fit_scaler_rows(matrix: &FeatureMatrix, rows: &[usize]) -> Result<ScalerParams> {
    if rows.is_empty() {
        return Err(Error::InsufficientData {
            context: "scaler fit",
            required: 1,
            actual: 0,
        });
    }
    check_rows(matrix, rows)?;
    let m = matrix.n_columns();
    let mut min = alloc::vec![f64::INFINITY; m];
    let mut max = alloc::vec![f64::NEG_INFINITY; m];
    let (mut tmin, mut tmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for &i in rows {
        for (j, &x) in matrix.rows[i].iter().enumerate() {
            min[j] = min[j].min(x);
            max[j] = max[j].max(x);
        }
        tmin = tmin.min(matrix.target[i]);
        tmax = tmax.max(matrix.target[i]);
    }
    Ok(ScalerParams {
        column_names: matrix.column_names.clone(),
        min,
        max,
        target_min: tmin,
        target_max: tmax,
    })
}

/// Scaled lookback windows with one-step-ahead targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowedDataset {
    /// Flat `(samples x lookback x k)` buffer.
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
    pub lookback: usize,
    pub selected_features: Vec<String>,
    /// Matrix row of each sample's target; its window covers the
    /// `lookback` rows immediately before.
    pub target_rows: Vec<usize>,
}

impl WindowedDataset {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.selected_features.len()
    }

    /// `lookback * k` values of sample `i`, timestep-major.
    pub fn sample(&self, i: usize) -> &[f64] {
        let w = self.lookback * self.n_features();
        &self.inputs[i * w..(i + 1) * w]
    }

    /// Matrix rows read by sample `i`'s window.
    pub fn input_rows(&self, i: usize) -> Range<usize> {
        self.target_rows[i] - self.lookback..self.target_rows[i]
    }

    /// Samples at the given indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut inputs = Vec::with_capacity(indices.len() * self.lookback * self.n_features());
        for &i in indices {
            inputs.extend_from_slice(self.sample(i));
        }
        Self {
            inputs,
            targets: indices.iter().map(|&i| self.targets[i]).collect(),
            lookback: self.lookback,
            selected_features: self.selected_features.clone(),
            target_rows: indices.iter().map(|&i| self.target_rows[i]).collect(),
        }
    }

    /// Builds a dataset directly from windows, e.g. for synthetic tests.
    pub fn from_windows(
        windows: &[Vec<f64>],
        targets: Vec<f64>,
        lookback: usize,
        selected_features: Vec<String>,
    ) -> Result<Self> {
        let w = lookback * selected_features.len();
        if windows.len() != targets.len() || windows.iter().any(|x| x.len() != w) {
            return Err(Error::Shape(format!(
                "expected {} windows of {w} values",
                targets.len()
            )));
        }
        Ok(Self {
            inputs: windows.concat(),
            target_rows: (lookback..lookback + targets.len()).collect(),
            targets,
            lookback,
            selected_features,
        })
    }
}

/// Windows the selected, scaled columns into `rows - lookback` samples.
pub fn window(
    matrix: &FeatureMatrix,
    scaler: &ScalerParams,
    selected: &[String],
    lookback: usize,
) -> Result<WindowedDataset> {
    if lookback == 0 {
        return Err(Error::InvalidParameter("lookback must be positive".to_string()));
    }
    if matrix.n_rows() <= lookback {
        return Err(Error::InsufficientData {
            context: "windowing",
            required: lookback + 1,
            actual: matrix.n_rows(),
        });
    }
    if scaler.column_names != matrix.column_names {
        return Err(Error::Shape(String::from(
            "scaler was fitted on different columns",
        )));
    }
    let cols = selected
        .iter()
        .map(|name| {
            matrix
                .column_index(name)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown feature column {name}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let scaled: Vec<Vec<f64>> = matrix
        .rows
        .iter()
        .map(|r| cols.iter().map(|&j| scaler.scale(j, r[j])).collect())
        .collect();
    let n = matrix.n_rows() - lookback;
    let mut inputs = Vec::with_capacity(n * lookback * cols.len());
    for t in lookback..matrix.n_rows() {
        for row in &scaled[t - lookback..t] {
            inputs.extend_from_slice(row);
        }
    }
    Ok(WindowedDataset {
        inputs,
        targets: matrix.target[lookback..]
            .iter()
            .map(|&y| scaler.scale_target(y))
            .collect(),
        lookback,
        selected_features: selected.to_vec(),
        target_rows: (lookback..matrix.n_rows()).collect(),
    })
}
