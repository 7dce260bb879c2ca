use alloc::string::String;

/// Errors raised anywhere in the core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("insufficient data: {context} needs at least {required}, got {actual}")]
    InsufficientData {
        context: &'static str,
        required: usize,
        actual: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid series: {0}")]
    InvalidSeries(String),
    #[error("register of {0} qubits exceeds supported range 1..=12")]
    Capacity(usize),
    #[error("qubit index {index} out of range for {n_qubits}-qubit register")]
    QubitIndex { index: usize, n_qubits: usize },
    #[error("feature value {0} outside [0, 1]")]
    Domain(f64),
    #[error("arity mismatch: {what} expects {expected} values, got {actual}")]
    Arity {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("tape does not match this layer or model: {0}")]
    Tape(String),
    #[error("non-finite value in {0}")]
    Numeric(String),
}

pub type Result<T> = core::result::Result<T, Error>;
