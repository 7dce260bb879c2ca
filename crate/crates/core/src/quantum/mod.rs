//! Exact statevector simulation of angle-encoded variational circuits.
//!
//! A [`CircuitProgram`] is a gate list whose rotation angles reference
//! encoding or variational slots; values are bound at [`run`] time.
//! Gradients use the two-term parameter-shift rule, which is exact for the
//! `RY`/`RZ` generators used here.

mod circuit;
pub mod hamiltonian;
mod state;

pub use circuit::{
    build_ansatz, encode, encoding_angles, encoding_feature_grad, expectation,
    parameter_shift_grad, run, Angle, CircuitProgram, EncodedInput, Gate, Observable,
    ShiftGradients, ENCODING_EPSILON,
};
pub(crate) use circuit::shift_grad;
pub use state::{apply_gate, zero_state, BoundGate, StateVector, MAX_QUBITS};
