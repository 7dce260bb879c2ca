//! Dense and recurrent layers with exact reverse-mode gradients.
//!
//! Every layer keeps its trainable scalars in one flat `params` vector so
//! the models can hand them to the optimizer without reshaping. Forward
//! calls return a tape; `backward` rejects tapes recorded against different
//! parameters.

mod dense;
mod recurrent;

use alloc::format;
use rand::Rng;

pub use dense::{Activation, DenseGradients, DenseLayer, DenseTape};
pub use recurrent::{
    bilstm_forward, gru_forward, lstm_forward, rnn_forward, BiGradients, BiLstm, BiTape,
    CellGradients, CellKind, RecurrentCell, Tape,
};

use crate::{Error, Result};

pub(crate) fn init_uniform(values: &mut [f64], bound: f64, rng: &mut impl Rng) {
    for v in values {
        *v = rng.random_range(-bound..=bound);
    }
}

/// FNV-1a over the parameter bit patterns.
pub(crate) fn fingerprint(values: &[f64]) -> u64 {
    values.iter().fold(0xcbf2_9ce4_8422_2325, |h, v| {
        (h ^ v.to_bits()).wrapping_mul(0x0100_0000_01b3)
    })
}

pub(crate) fn check_len(what: &str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::Shape(format!("{what}: expected {expected} values, got {actual}")));
    }
    Ok(())
}
