use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::circuit::Gate;
use crate::math;
use crate::{Error, Result};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 12;

/// Amplitudes of an `n`-qubit register.
///
/// Qubit 0 is the most significant bit of the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

/// A gate with its rotation angle resolved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundGate {
    Ry { qubit: usize, angle: f64 },
    Rz { qubit: usize, angle: f64 },
    Cnot { control: usize, target: usize },
    Cz { control: usize, target: usize },
}

/// `|0...0>` on `n` qubits.
pub fn zero_state(n: usize) -> Result<StateVector> {
    StateVector::zero(n)
}

impl StateVector {
    pub fn zero(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Capacity(n));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits: n,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Squared norm; 1 for every reachable state.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Measurement distribution `P(x) = |<x|psi>|^2` over basis states.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn mask(&self, qubit: usize) -> Result<usize> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitIndex {
                index: qubit,
                n_qubits: self.n_qubits,
            });
        }
        Ok(1 << (self.n_qubits - 1 - qubit))
    }

    fn check_pair(&self, control: usize, target: usize) -> Result<(usize, usize)> {
        let c = self.mask(control)?;
        let t = self.mask(target)?;
        if control == target {
            return Err(Error::InvalidParameter(alloc::format!(
                "control and target are both qubit {control}"
            )));
        }
        Ok((c, t))
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &BoundGate) -> Result<()> {
        match *gate {
            BoundGate::Ry { qubit, angle } => {
                let m = self.mask(qubit)?;
                let (c, s) = (math::cos(angle / 2.0), math::sin(angle / 2.0));
                for i in 0..self.amplitudes.len() {
                    if i & m == 0 {
                        let a0 = self.amplitudes[i];
                        let a1 = self.amplitudes[i | m];
                        self.amplitudes[i] = a0 * c - a1 * s;
                        self.amplitudes[i | m] = a0 * s + a1 * c;
                    }
                }
            }
            BoundGate::Rz { qubit, angle } => {
                let m = self.mask(qubit)?;
                let (c, s) = (math::cos(angle / 2.0), math::sin(angle / 2.0));
                let phase0 = Complex64::new(c, -s);
                let phase1 = Complex64::new(c, s);
                for (i, a) in self.amplitudes.iter_mut().enumerate() {
                    *a *= if i & m == 0 { phase0 } else { phase1 };
                }
            }
            BoundGate::Cnot { control, target } => {
                let (c, t) = self.check_pair(control, target)?;
                for i in 0..self.amplitudes.len() {
                    if i & c != 0 && i & t == 0 {
                        self.amplitudes.swap(i, i | t);
                    }
                }
            }
            BoundGate::Cz { control, target } => {
                let (c, t) = self.check_pair(control, target)?;
                for (i, a) in self.amplitudes.iter_mut().enumerate() {
                    if i & c != 0 && i & t != 0 {
                        *a = -*a;
                    }
                }
            }
        }
        Ok(())
    }

    /// `<Z_q>` for each listed qubit.
    pub fn expectation_z(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        qubits
            .iter()
            .map(|&q| {
                let m = self.mask(q)?;
                Ok(self
                    .amplitudes
                    .iter()
                    .enumerate()
                    .map(|(i, a)| if i & m == 0 { a.norm_sqr() } else { -a.norm_sqr() })
                    .sum())
            })
            .collect()
    }
}

/// Functional form of [`StateVector::apply`].
pub fn apply_gate(mut state: StateVector, gate: &Gate, encoding: &[f64], variational: &[f64]) -> Result<StateVector> {
    state.apply(&gate.bind(encoding, variational)?)?;
    Ok(state)
}
