//! Seeded synthetic OHLC bars.
//!
//! Closes follow a driftless geometric random walk with about 1% daily
//! volatility starting at 100. Each bar opens at the previous close and its
//! high and low extend beyond the body by independent positive spreads.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::indicators::OhlcSeries;
use crate::math;
use crate::{Error, Result};

pub const MIN_BARS: usize = 60;
pub const START_PRICE: f64 = 100.0;
pub const DAILY_VOLATILITY: f64 = 0.01;
/// Upper bound of a bar's wick as a fraction of its close.
pub const MAX_SPREAD: f64 = 0.005;
/// Multiplier applied to every price from the shift bar on.
pub const SHIFT_FACTOR: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Walk,
    /// Level drop of 50% at bar `floor(2n / 3)`.
    TrendShift,
}

/// First bar affected by the `TrendShift` drop.
pub fn shift_bar(n_bars: usize) -> usize {
    2 * n_bars / 3
}

pub fn synth_data(n_bars: usize, seed: u64, regime: Regime) -> Result<OhlcSeries> {
    if n_bars < MIN_BARS {
        return Err(Error::InvalidParameter(format!(
            "synthetic series needs at least {MIN_BARS} bars, got {n_bars}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift = match regime {
        Regime::Walk => usize::MAX,
        Regime::TrendShift => shift_bar(n_bars),
    };
    let mut close = Vec::with_capacity(n_bars);
    let mut level = START_PRICE;
    for t in 0..n_bars {
        let z: f64 = rng.sample(StandardNormal);
        level *= math::exp(DAILY_VOLATILITY * z);
        close.push(if t >= shift { level * SHIFT_FACTOR } else { level });
    }
    let mut open = Vec::with_capacity(n_bars);
    let mut high = Vec::with_capacity(n_bars);
    let mut low = Vec::with_capacity(n_bars);
    for t in 0..n_bars {
        let o = if t == 0 { START_PRICE } else { close[t - 1] };
        let c = close[t];
        let up: f64 = rng.random_range(0.0..MAX_SPREAD);
        let down: f64 = rng.random_range(0.0..MAX_SPREAD);
        open.push(o);
        high.push(o.max(c) + up * c + f64::EPSILON * c);
        low.push(o.min(c) - down * c);
    }
    OhlcSeries::new((0..n_bars as i64).collect(), open, high, low, close)
}
