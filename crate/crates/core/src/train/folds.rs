use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Train share of the single chronological holdout split.
pub const HOLDOUT_TRAIN_FRACTION: f64 = 0.8;
pub const DEFAULT_SPLITS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Protocol {
    TimeSeriesSplit,
    KFold,
    /// One chronological 80/20 split.
    Holdout,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::TimeSeriesSplit => "TimeSeriesSplit",
            Protocol::KFold => "KFold",
            Protocol::Holdout => "Holdout",
        }
    }

    /// Training samples always precede test samples.
    pub fn is_chronological(self) -> bool {
        !matches!(self, Protocol::KFold)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    /// Sorted ascending.
    pub train: Vec<usize>,
    /// Sorted ascending.
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub protocol: Protocol,
    pub n_samples: usize,
    pub folds: Vec<Fold>,
}

fn range_vec(r: Range<usize>) -> Vec<usize> {
    r.collect()
}

/// Train/test index sets over `n_samples` windows.
///
/// `TimeSeriesSplit` uses blocks of `n / (n_splits + 1)`: fold `j` trains on
/// `[0, base * (j + 1))` and tests on the following block. `KFold` shuffles
/// with `seed` and cuts near-equal blocks, larger ones first. `Holdout`
/// ignores `n_splits`.
pub fn plan_folds(n_samples: usize, protocol: Protocol, n_splits: usize, seed: u64) -> Result<FoldPlan> {
    if protocol == Protocol::Holdout {
        return holdout(n_samples, HOLDOUT_TRAIN_FRACTION);
    }
    if n_splits < 2 {
        return Err(Error::InvalidParameter(format!(
            "{protocol} needs at least 2 splits, got {n_splits}"
        )));
    }
    if n_samples < 2 * n_splits {
        return Err(Error::InsufficientData {
            context: "fold planning",
            required: 2 * n_splits,
            actual: n_samples,
        });
    }
    let folds = match protocol {
        Protocol::TimeSeriesSplit => {
            let base = n_samples / (n_splits + 1);
            (0..n_splits)
                .map(|j| Fold {
                    train: range_vec(0..base * (j + 1)),
                    test: range_vec(base * (j + 1)..base * (j + 2)),
                })
                .collect()
        }
        _ => {
            let mut order = range_vec(0..n_samples);
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let (size, extra) = (n_samples / n_splits, n_samples % n_splits);
            let mut start = 0;
            (0..n_splits)
                .map(|j| {
                    let len = size + usize::from(j < extra);
                    let mut test = order[start..start + len].to_vec();
                    start += len;
                    test.sort_unstable();
                    let train = (0..n_samples).filter(|i| test.binary_search(i).is_err()).collect();
                    Fold { train, test }
                })
                .collect()
        }
    };
    Ok(FoldPlan {
        protocol,
        n_samples,
        folds,
    })
}

/// Single chronological split with `floor(train_fraction * n)` train samples.
pub fn holdout(n_samples: usize, train_fraction: f64) -> Result<FoldPlan> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction {train_fraction} outside (0, 1)"
        )));
    }
    let cut = (train_fraction * n_samples as f64) as usize;
    if cut == 0 || cut == n_samples {
        return Err(Error::InsufficientData {
            context: "holdout split",
            required: 2,
            actual: n_samples,
        });
    }
    Ok(FoldPlan {
        protocol: Protocol::Holdout,
        n_samples,
        folds: alloc::vec![Fold {
            train: range_vec(0..cut),
            test: range_vec(cut..n_samples),
        }],
    })
}
