//! Generator Hamiltonians behind the circuit's gates, as dense two-qubit
//! matrices in the big-endian basis `|q0 q1>`.
//!
//! The simulator applies gates directly; these matrices document the
//! generators and let tests check the correspondence:
//!
//! * `exp(-i H_single)` with `H_single = theta/2 Y + phi/2 Z` is `RY(theta)`
//!   when `phi = 0` and `RZ(phi)` when `theta = 0`. The two terms do not
//!   commute, so the gate pair is the product of the two exponentials.
//! * `exp(-i pi H_cz)` with `H_cz = (1 - Z_i)(1 - Z_j) / 4` is exactly CZ.
//! * `exp(-i pi/2 H_cnot)` with `H_cnot = (1 - Z_i) X_j / 2` is CNOT followed
//!   by a `-i` phase on the control's `|1>` branch (an `S^dagger` on the
//!   control), not CNOT up to a global phase.

use num_complex::Complex64;

pub type Matrix2 = [[Complex64; 2]; 2];
pub type Matrix4 = [[Complex64; 4]; 4];

const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const ZERO: Complex64 = c(0.0, 0.0);

/// `theta/2 Y + phi/2 Z` on a single qubit.
pub fn single_qubit(theta: f64, phi: f64) -> Matrix2 {
    [
        [c(phi / 2.0, 0.0), c(0.0, -theta / 2.0)],
        [c(0.0, theta / 2.0), c(-phi / 2.0, 0.0)],
    ]
}

/// `(1 - Z_0) X_1 / 2`: `X` on qubit 1 restricted to qubit 0 in `|1>`.
pub fn cnot_term() -> Matrix4 {
    let mut m = [[ZERO; 4]; 4];
    m[2][3] = c(1.0, 0.0);
    m[3][2] = c(1.0, 0.0);
    m
}

/// `(1 - Z_0)(1 - Z_1) / 4`: projector onto `|11>`.
pub fn cz_term() -> Matrix4 {
    let mut m = [[ZERO; 4]; 4];
    m[3][3] = c(1.0, 0.0);
    m
}
