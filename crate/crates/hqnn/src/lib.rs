//! Files, configuration and orchestration around [`hqnn_core`].
//!
//! * [`io`]: OHLC CSV ingestion and CSV emitters.
//! * [`config`]: the JSON experiment document and seed derivation.
//! * [`experiment`]: the model x feature-count grid, holdout training and
//!   evaluation of saved models.
//!
//! Errors carry the pipeline stage that failed and map onto the process exit
//! codes 1 (configuration), 2 (data) and 3 (numeric failure).

pub mod config;
pub mod experiment;
pub mod io;

use std::fmt;

pub use hqnn_core;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    Config,
    Data,
    Numeric,
}

impl FailureKind {
    pub fn exit_code(self) -> u8 {
        match self {
            FailureKind::Config => 1,
            FailureKind::Data => 2,
            FailureKind::Numeric => 3,
        }
    }

    /// Classification of a core error.
    pub fn of(err: &hqnn_core::Error) -> Self {
        use hqnn_core::Error as E;
        match err {
            E::Numeric(_) | E::Tape(_) => FailureKind::Numeric,
            E::InsufficientData { .. } | E::InvalidSeries(_) | E::Domain(_) => FailureKind::Data,
            E::InvalidParameter(_)
            | E::Capacity(_)
            | E::QubitIndex { .. }
            | E::Arity { .. }
            | E::Shape(_) => FailureKind::Config,
        }
    }
}

/// A failure tagged with the stage that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageError {
    pub stage: &'static str,
    pub kind: FailureKind,
    pub message: String,
}

impl StageError {
    pub fn new(stage: &'static str, kind: FailureKind, message: impl fmt::Display) -> Self {
        Self {
            stage,
            kind,
            message: message.to_string(),
        }
    }

    pub fn core(stage: &'static str, err: hqnn_core::Error) -> Self {
        Self::new(stage, FailureKind::of(&err), err)
    }

    pub fn exit_code(&self) -> u8 {
        self.kind.exit_code()
    }
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.stage, self.message)
    }
}

impl std::error::Error for StageError {}
