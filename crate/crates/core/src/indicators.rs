//! Technical indicators over daily OHLC bars.
//!
//! RSI and ADX use Wilder smoothing (`alpha = 1 / period`), MACD uses the
//! standard EMA (`alpha = 2 / (period + 1)`). Every smoother is seeded with
//! the simple average of its first `period` inputs. Bars inside the warmup
//! region are `None`, never zero.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math;
use crate::{Error, Result};

/// Time-ordered open/high/low/close bars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OhlcSeries {
    timestamps: Vec<i64>,
    open: Vec<f64>,
    high: Vec<f64>,
    low: Vec<f64>,
    close: Vec<f64>,
}

impl OhlcSeries {
    /// Validates and builds a series. `timestamps` are day indices.
    pub fn new(
        timestamps: Vec<i64>,
        open: Vec<f64>,
        high: Vec<f64>,
        low: Vec<f64>,
        close: Vec<f64>,
    ) -> Result<Self> {
        let n = timestamps.len();
        if n == 0 {
            return Err(Error::InsufficientData {
                context: "OHLC series",
                required: 1,
                actual: 0,
            });
        }
        if open.len() != n || high.len() != n || low.len() != n || close.len() != n {
            return Err(Error::Shape(String::from(
                "open/high/low/close/timestamps must have equal length",
            )));
        }
        for i in 0..n {
            if i > 0 && timestamps[i] <= timestamps[i - 1] {
                return Err(Error::InvalidSeries(format!(
                    "timestamps not strictly increasing at bar {i}"
                )));
            }
            let (o, h, l, c) = (open[i], high[i], low[i], close[i]);
            if !(o.is_finite() && h.is_finite() && l.is_finite() && c.is_finite()) {
                return Err(Error::InvalidSeries(format!("non-finite price at bar {i}")));
            }
            if h < o.max(c) || l > o.min(c) {
                return Err(Error::InvalidSeries(format!(
                    "bar {i} violates low <= open,close <= high"
                )));
            }
        }
        Ok(Self {
            timestamps,
            open,
            high,
            low,
            close,
        })
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn timestamps(&self) -> &[i64] {
        &self.timestamps
    }

    pub fn open(&self) -> &[f64] {
        &self.open
    }

    pub fn high(&self) -> &[f64] {
        &self.high
    }

    pub fn low(&self) -> &[f64] {
        &self.low
    }

    pub fn close(&self) -> &[f64] {
        &self.close
    }

    /// Bars `start..`, keeping the original timestamps.
    pub fn tail(&self, start: usize) -> Result<Self> {
        if start >= self.len() {
            return Err(Error::InsufficientData {
                context: "series tail",
                required: start + 1,
                actual: self.len(),
            });
        }
        Ok(Self {
            timestamps: self.timestamps[start..].to_vec(),
            open: self.open[start..].to_vec(),
            high: self.high[start..].to_vec(),
            low: self.low[start..].to_vec(),
            close: self.close[start..].to_vec(),
        })
    }

    /// Multiplies every price by `factor` (> 0).
    pub fn scaled(&self, factor: f64) -> Self {
        let s = |v: &[f64]| v.iter().map(|x| x * factor).collect();
        Self {
            timestamps: self.timestamps.clone(),
            open: s(&self.open),
            high: s(&self.high),
            low: s(&self.low),
            close: s(&self.close),
        }
    }
}

/// One indicator value per bar; the first `warmup` entries are undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorColumn {
    pub name: String,
    pub values: Vec<Option<f64>>,
    pub warmup: usize,
}

impl IndicatorColumn {
    fn from_defined(name: String, len: usize, warmup: usize, defined: Vec<f64>) -> Self {
        debug_assert_eq!(defined.len() + warmup, len);
        let mut values = vec![None; warmup];
        values.extend(defined.into_iter().map(Some));
        Self {
            name,
            values,
            warmup,
        }
    }

    /// Defined values only (after warmup).
    pub fn defined(&self) -> impl Iterator<Item = f64> + '_ {
        self.values[self.warmup..].iter().map(|v| v.unwrap_or(f64::NAN))
    }
}

fn require_len(context: &'static str, required: usize, actual: usize) -> Result<()> {
    if actual < required {
        Err(Error::InsufficientData {
            context,
            required,
            actual,
        })
    } else {
        Ok(())
    }
}

fn require_period(name: &str, period: usize) -> Result<()> {
    if period == 0 {
        Err(Error::InvalidParameter(format!("{name} period must be positive")))
    } else {
        Ok(())
    }
}

/// Wilder running average seeded with the SMA of the first `period` inputs.
/// Output `j` corresponds to input `period - 1 + j`.
fn wilder(inputs: &[f64], period: usize) -> Vec<f64> {
    let p = period as f64;
    let mut avg = inputs[..period].iter().sum::<f64>() / p;
    let mut out = Vec::with_capacity(inputs.len() + 1 - period);
    out.push(avg);
    for &x in &inputs[period..] {
        avg = (avg * (p - 1.0) + x) / p;
        out.push(avg);
    }
    out
}

/// Standard EMA seeded with an SMA. Output `j` corresponds to input `period - 1 + j`.
fn ema(inputs: &[f64], period: usize) -> Vec<f64> {
    let alpha = 2.0 / (period as f64 + 1.0);
    let mut value = inputs[..period].iter().sum::<f64>() / period as f64;
    let mut out = Vec::with_capacity(inputs.len() + 1 - period);
    out.push(value);
    for &x in &inputs[period..] {
        value = alpha * x + (1.0 - alpha) * value;
        out.push(value);
    }
    out
}

fn rsi_value(avg_gain: f64, avg_loss: f64) -> f64 {
    if avg_loss == 0.0 {
        100.0
    } else if avg_gain == 0.0 {
        0.0
    } else {
        100.0 - 100.0 / (1.0 + avg_gain / avg_loss)
    }
}

/// Relative strength index with Wilder smoothing. Warmup is `period` bars.
pub fn rsi(series: &OhlcSeries, period: usize) -> Result<IndicatorColumn> {
    require_period("RSI", period)?;
    require_len("RSI", period + 1, series.len())?;
    let close = series.close();
    let (gains, losses): (Vec<f64>, Vec<f64>) = close
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            (d.max(0.0), (-d).max(0.0))
        })
        .unzip();
    let avg_gain = wilder(&gains, period);
    let avg_loss = wilder(&losses, period);
    let values = avg_gain
        .iter()
        .zip(&avg_loss)
        .map(|(&g, &l)| rsi_value(g, l))
        .collect();
    Ok(IndicatorColumn::from_defined(
        format!("rsi{period}"),
        series.len(),
        period,
        values,
    ))
}

/// MACD line, signal line and histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Macd {
    pub macd_line: IndicatorColumn,
    pub signal_line: IndicatorColumn,
    pub histogram: IndicatorColumn,
}

/// Moving average convergence/divergence on closes.
///
/// The MACD line is defined from bar `slow - 1`; signal and histogram from
/// bar `slow + signal - 2`.
pub fn macd(series: &OhlcSeries, fast: usize, slow: usize, signal: usize) -> Result<Macd> {
    require_period("MACD fast", fast)?;
    require_period("MACD slow", slow)?;
    require_period("MACD signal", signal)?;
    if fast >= slow {
        return Err(Error::InvalidParameter(format!(
            "MACD fast period {fast} must be shorter than slow period {slow}"
        )));
    }
    require_len("MACD", slow + signal + 1, series.len())?;
    let close = series.close();
    let n = close.len();
    let fast_ema = ema(close, fast);
    let slow_ema = ema(close, slow);
    let offset = slow - fast;
    let line: Vec<f64> = slow_ema
        .iter()
        .enumerate()
        .map(|(j, s)| fast_ema[j + offset] - s)
        .collect();
    let sig = ema(&line, signal);
    let hist: Vec<f64> = sig
        .iter()
        .enumerate()
        .map(|(j, s)| line[j + signal - 1] - s)
        .collect();
    let line_warmup = slow - 1;
    let sig_warmup = slow + signal - 2;
    Ok(Macd {
        macd_line: IndicatorColumn::from_defined("macd_line".to_string(), n, line_warmup, line),
        signal_line: IndicatorColumn::from_defined("macd_signal".to_string(), n, sig_warmup, sig),
        histogram: IndicatorColumn::from_defined("macd_hist".to_string(), n, sig_warmup, hist),
    })
}

/// Average directional index with Wilder smoothing. Warmup is `2 * period - 1`.
pub fn adx(series: &OhlcSeries, period: usize) -> Result<IndicatorColumn> {
    require_period("ADX", period)?;
    require_len("ADX", 2 * period + 1, series.len())?;
    let (high, low, close) = (series.high(), series.low(), series.close());
    let n = series.len();
    let mut plus_dm = Vec::with_capacity(n - 1);
    let mut minus_dm = Vec::with_capacity(n - 1);
    let mut true_range = Vec::with_capacity(n - 1);
    for i in 1..n {
        let up = high[i] - high[i - 1];
        let down = low[i - 1] - low[i];
        plus_dm.push(if up > down && up > 0.0 { up } else { 0.0 });
        minus_dm.push(if down > up && down > 0.0 { down } else { 0.0 });
        let tr = (high[i] - low[i])
            .max(math::abs(high[i] - close[i - 1]))
            .max(math::abs(low[i] - close[i - 1]));
        true_range.push(tr);
    }
    let s_plus = wilder(&plus_dm, period);
    let s_minus = wilder(&minus_dm, period);
    let s_tr = wilder(&true_range, period);
    // DX index j corresponds to bar period + j.
    let dx: Vec<f64> = (0..s_tr.len())
        .map(|j| {
            let (pdi, mdi) = if s_tr[j] == 0.0 {
                (0.0, 0.0)
            } else {
                (100.0 * s_plus[j] / s_tr[j], 100.0 * s_minus[j] / s_tr[j])
            };
            let sum = pdi + mdi;
            if sum == 0.0 {
                0.0
            } else {
                100.0 * math::abs(pdi - mdi) / sum
            }
        })
        .collect();
    let values = wilder(&dx, period);
    Ok(IndicatorColumn::from_defined(
        format!("adx{period}"),
        n,
        2 * period - 1,
        values,
    ))
}
