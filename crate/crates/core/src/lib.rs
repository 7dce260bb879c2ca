//! Core of a hybrid quantum-classical stock forecasting toolkit.
//!
//! Everything in this crate is pure computation over owned buffers and runs
//! under `no_std` with `alloc`:
//!
//! * [`indicators`]: RSI, MACD and ADX over OHLC bars.
//! * [`preprocess`]: feature matrix assembly, univariate F-test selection,
//!   min-max scaling and lookback windowing.
//! * [`quantum`]: exact statevector simulation of the angle-encoding circuit
//!   and the rotation/CNOT/CZ ansatz, with parameter-shift gradients.
//! * [`classical`]: dense, RNN, LSTM, BiLSTM and GRU layers with exact
//!   reverse-mode gradients.
//! * [`models`]: the three quantum model topologies plus classical baselines
//!   behind a single regressor interface.
//! * [`train`]: ADAM, early stopping, fold planning and cross-validation.
//! * [`eval`]: RMSE, residual statistics and model comparison tables.
//! * [`synth`]: seeded synthetic OHLC generator.
//!
//! File formats, CSV ingestion and the command line live in the `hqnn` crate.
#![no_std]

extern crate alloc;

pub mod classical;
mod error;
pub mod eval;
pub mod indicators;
pub(crate) mod math;
pub mod models;
pub mod preprocess;
pub mod quantum;
pub mod synth;
pub mod train;

pub use error::{Error, Result};
