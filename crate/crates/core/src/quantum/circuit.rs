use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::state::{BoundGate, StateVector, MAX_QUBITS};
use crate::math;
use crate::{Error, Result};

/// Lower/upper clamp applied to encoded features before `asin`/`acos`.
pub const ENCODING_EPSILON: f64 = 1e-6;

/// Where a rotation gate takes its angle from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "slot", content = "value", rename_all = "snake_case")]
pub enum Angle {
    Fixed(f64),
    Encoding(usize),
    Variational(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "UPPERCASE")]
pub enum Gate {
    Ry { qubit: usize, angle: Angle },
    Rz { qubit: usize, angle: Angle },
    Cnot { control: usize, target: usize },
    Cz { control: usize, target: usize },
}

impl Gate {
    pub fn angle(&self) -> Option<Angle> {
        match *self {
            Gate::Ry { angle, .. } | Gate::Rz { angle, .. } => Some(angle),
            _ => None,
        }
    }

    fn with_value(&self, value: f64) -> BoundGate {
        match *self {
            Gate::Ry { qubit, .. } => BoundGate::Ry { qubit, angle: value },
            Gate::Rz { qubit, .. } => BoundGate::Rz { qubit, angle: value },
            Gate::Cnot { control, target } => BoundGate::Cnot { control, target },
            Gate::Cz { control, target } => BoundGate::Cz { control, target },
        }
    }

    /// Resolves the angle slot against the supplied value vectors.
    pub fn bind(&self, encoding: &[f64], variational: &[f64]) -> Result<BoundGate> {
        let value = match self.angle() {
            None => 0.0,
            Some(Angle::Fixed(v)) => v,
            Some(Angle::Encoding(i)) => *encoding.get(i).ok_or(Error::Arity {
                what: "encoding slots",
                expected: i + 1,
                actual: encoding.len(),
            })?,
            Some(Angle::Variational(i)) => *variational.get(i).ok_or(Error::Arity {
                what: "variational slots",
                expected: i + 1,
                actual: variational.len(),
            })?,
        };
        Ok(self.with_value(value))
    }
}

/// Ordered gate list with encoding and variational parameter slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitProgram {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    pub encoding_slots: usize,
    pub variational_slots: usize,
}

impl CircuitProgram {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Capacity(n_qubits));
        }
        Ok(Self {
            n_qubits,
            gates: Vec::new(),
            encoding_slots: 0,
            variational_slots: 0,
        })
    }

    /// Appends `RY(enc) RZ(enc)` on every qubit. Slots `2i` and `2i + 1` of
    /// the block belong to qubit `i`.
    pub fn push_encoding_block(&mut self) {
        for q in 0..self.n_qubits {
            let base = self.encoding_slots;
            self.gates.push(Gate::Ry {
                qubit: q,
                angle: Angle::Encoding(base),
            });
            self.gates.push(Gate::Rz {
                qubit: q,
                angle: Angle::Encoding(base + 1),
            });
            self.encoding_slots += 2;
        }
    }

    /// Appends one ansatz layer: `RY RZ` on each qubit, then a CNOT ring and a
    /// CZ ring over `(i, i + 1 mod n)`. A two-qubit ring collapses to one edge.
    pub fn push_ansatz_layer(&mut self) {
        for q in 0..self.n_qubits {
            let base = self.variational_slots;
            self.gates.push(Gate::Ry {
                qubit: q,
                angle: Angle::Variational(base),
            });
            self.gates.push(Gate::Rz {
                qubit: q,
                angle: Angle::Variational(base + 1),
            });
            self.variational_slots += 2;
        }
        let edges = ring_edges(self.n_qubits);
        for &(control, target) in &edges {
            self.gates.push(Gate::Cnot { control, target });
        }
        for &(control, target) in &edges {
            self.gates.push(Gate::Cz { control, target });
        }
    }

    /// Checks qubit bounds and that each slot index is used exactly once.
    pub fn validate(&self) -> Result<()> {
        let mut enc = vec![0usize; self.encoding_slots];
        let mut var = vec![0usize; self.variational_slots];
        let n = self.n_qubits;
        let bad = |index| Err(Error::QubitIndex { index, n_qubits: n });
        for g in &self.gates {
            match *g {
                Gate::Ry { qubit, angle } | Gate::Rz { qubit, angle } => {
                    if qubit >= n {
                        return bad(qubit);
                    }
                    let (counts, i) = match angle {
                        Angle::Encoding(i) => (&mut enc, i),
                        Angle::Variational(i) => (&mut var, i),
                        Angle::Fixed(_) => continue,
                    };
                    *counts
                        .get_mut(i)
                        .ok_or_else(|| Error::InvalidParameter(format!("slot {i} beyond declared count")))? += 1;
                }
                Gate::Cnot { control, target } | Gate::Cz { control, target } => {
                    if control >= n {
                        return bad(control);
                    }
                    if target >= n {
                        return bad(target);
                    }
                    if control == target {
                        return Err(Error::InvalidParameter(format!(
                            "entangler with control == target == {control}"
                        )));
                    }
                }
            }
        }
        if enc.iter().chain(&var).any(|&c| c != 1) {
            return Err(Error::InvalidParameter(
                "every parameter slot must be referenced exactly once".into(),
            ));
        }
        Ok(())
    }

    pub fn count_gates(&self, pred: impl Fn(&Gate) -> bool) -> usize {
        self.gates.iter().filter(|g| pred(g)).count()
    }

    fn check_arity(&self, encoding: &[f64], variational: &[f64]) -> Result<()> {
        if encoding.len() != self.encoding_slots {
            return Err(Error::Arity {
                what: "encoding slots",
                expected: self.encoding_slots,
                actual: encoding.len(),
            });
        }
        if variational.len() != self.variational_slots {
            return Err(Error::Arity {
                what: "variational slots",
                expected: self.variational_slots,
                actual: variational.len(),
            });
        }
        Ok(())
    }

    fn bind_all(&self, encoding: &[f64], variational: &[f64]) -> Result<Vec<BoundGate>> {
        self.check_arity(encoding, variational)?;
        self.gates.iter().map(|g| g.bind(encoding, variational)).collect()
    }

    /// Final state after applying every gate to `|0...0>`.
    pub fn simulate(&self, encoding: &[f64], variational: &[f64]) -> Result<StateVector> {
        let mut state = StateVector::zero(self.n_qubits)?;
        for g in self.bind_all(encoding, variational)? {
            state.apply(&g)?;
        }
        Ok(state)
    }
}

fn ring_edges(n: usize) -> Vec<(usize, usize)> {
    match n {
        0 | 1 => Vec::new(),
        2 => vec![(0, 1)],
        _ => (0..n).map(|i| (i, (i + 1) % n)).collect(),
    }
}

/// `layers` ansatz layers with no encoding slots.
pub fn build_ansatz(n_qubits: usize, layers: usize) -> Result<CircuitProgram> {
    let mut c = CircuitProgram::new(n_qubits)?;
    for _ in 0..layers {
        c.push_ansatz_layer();
    }
    Ok(c)
}

/// Single-qubit Pauli-Z terms to measure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observable {
    pub z_qubits: Vec<usize>,
}

impl Observable {
    /// `Z_0 ... Z_{n-1}`.
    pub fn all_z(n: usize) -> Self {
        Self {
            z_qubits: (0..n).collect(),
        }
    }
}

/// Per-term expectation values.
pub fn expectation(state: &StateVector, obs: &Observable) -> Result<Vec<f64>> {
    state.expectation_z(&obs.z_qubits)
}

/// Exact expectation vector of `obs` on the circuit's output state.
pub fn run(
    circuit: &CircuitProgram,
    encoding: &[f64],
    variational: &[f64],
    obs: &Observable,
) -> Result<Vec<f64>> {
    expectation(&circuit.simulate(encoding, variational)?, obs)
}

fn clamp_feature(x: f64) -> f64 {
    x.clamp(ENCODING_EPSILON, 1.0 - ENCODING_EPSILON)
}

fn check_features(features: &[f64]) -> Result<()> {
    match features.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        Some(&x) => Err(Error::Domain(x)),
        None => Ok(()),
    }
}

/// Encoding angles `(asin x_i, acos x_i)` per qubit on clamped features.
pub fn encoding_angles(features: &[f64]) -> Result<Vec<f64>> {
    check_features(features)?;
    Ok(features
        .iter()
        .flat_map(|&x| {
            let x = clamp_feature(x);
            [math::asin(x), math::acos(x)]
        })
        .collect())
}

/// Angle-encoding gates for one feature vector together with their angles.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedInput {
    pub gates: Vec<Gate>,
    pub angles: Vec<f64>,
}

/// `RY(asin x_i) RZ(acos x_i)` on qubit `i`, tagged as encoding slots.
pub fn encode(features: &[f64]) -> Result<EncodedInput> {
    let angles = encoding_angles(features)?;
    let mut c = CircuitProgram::new(features.len())?;
    c.push_encoding_block();
    Ok(EncodedInput {
        gates: c.gates,
        angles,
    })
}

/// Chains gradients w.r.t. encoding angles back to the raw features.
///
/// `angle_grads` holds `(d/d theta_i, d/d phi_i)` pairs. Features pinned by
/// the clamp receive zero gradient.
pub fn encoding_feature_grad(features: &[f64], angle_grads: &[f64]) -> Result<Vec<f64>> {
    if angle_grads.len() != 2 * features.len() {
        return Err(Error::Arity {
            what: "encoding angle gradients",
            expected: 2 * features.len(),
            actual: angle_grads.len(),
        });
    }
    Ok(features
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if x <= ENCODING_EPSILON || x >= 1.0 - ENCODING_EPSILON {
                return 0.0;
            }
            let d = 1.0 / math::sqrt(1.0 - x * x);
            angle_grads[2 * i] * d - angle_grads[2 * i + 1] * d
        })
        .collect())
}

/// Parameter-shift gradients contracted with an upstream cotangent.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftGradients {
    pub variational: Vec<f64>,
    /// Per encoding angle slot, not per feature.
    pub encoding: Vec<f64>,
}

/// Exact gradients of `upstream . <obs>` w.r.t. every rotation slot via
/// `(f(a + pi/2) - f(a - pi/2)) / 2`.
pub fn parameter_shift_grad(
    circuit: &CircuitProgram,
    encoding: &[f64],
    variational: &[f64],
    obs: &Observable,
    upstream: &[f64],
) -> Result<ShiftGradients> {
    shift_grad(circuit, encoding, variational, obs, upstream, true)
}

/// As [`parameter_shift_grad`], optionally skipping the encoding slots.
pub(crate) fn shift_grad(
    circuit: &CircuitProgram,
    encoding: &[f64],
    variational: &[f64],
    obs: &Observable,
    upstream: &[f64],
    with_encoding: bool,
) -> Result<ShiftGradients> {
    if upstream.len() != obs.z_qubits.len() {
        return Err(Error::Arity {
            what: "upstream cotangent",
            expected: obs.z_qubits.len(),
            actual: upstream.len(),
        });
    }
    let bound = circuit.bind_all(encoding, variational)?;
    let mut grads = ShiftGradients {
        variational: vec![0.0; circuit.variational_slots],
        encoding: vec![0.0; if with_encoding { circuit.encoding_slots } else { 0 }],
    };
    if upstream.iter().all(|&u| u == 0.0) {
        return Ok(grads);
    }
    // prefix[k] is the state before gate k
    let mut prefix = Vec::with_capacity(bound.len());
    let mut state = StateVector::zero(circuit.n_qubits)?;
    for g in &bound {
        prefix.push(state.clone());
        state.apply(g)?;
    }
    let contract = |mut s: StateVector, k: usize, shifted: BoundGate| -> Result<f64> {
        s.apply(&shifted)?;
        for g in &bound[k + 1..] {
            s.apply(g)?;
        }
        let z = expectation(&s, obs)?;
        Ok(z.iter().zip(upstream).map(|(a, b)| a * b).sum())
    };
    for (k, gate) in circuit.gates.iter().enumerate() {
        let (slot, value) = match gate.angle() {
            Some(Angle::Variational(i)) => (&mut grads.variational[i], variational[i]),
            Some(Angle::Encoding(i)) if with_encoding => (&mut grads.encoding[i], encoding[i]),
            _ => continue,
        };
        let plus = contract(prefix[k].clone(), k, gate.with_value(value + FRAC_PI_2))?;
        let minus = contract(prefix[k].clone(), k, gate.with_value(value - FRAC_PI_2))?;
        *slot = (plus - minus) / 2.0;
    }
    Ok(grads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn ansatz_counts() {
        let c = build_ansatz(3, 2).unwrap();
        assert_eq!(c.variational_slots, 12);
        assert_eq!(c.count_gates(|g| matches!(g, Gate::Cnot { .. })), 6);
        assert_eq!(c.count_gates(|g| matches!(g, Gate::Cz { .. })), 6);
        c.validate().unwrap();

        let c = build_ansatz(1, 1).unwrap();
        assert_eq!(c.variational_slots, 2);
        assert_eq!(c.gates.len(), 2);

        let c = build_ansatz(2, 1).unwrap();
        assert_eq!(
            &c.gates[4..],
            &[Gate::Cnot { control: 0, target: 1 }, Gate::Cz { control: 0, target: 1 }]
        );
    }

    #[test]
    fn encode_angles() {
        let e = encode(&[0.0, 0.5]).unwrap();
        assert!(e.angles[0].abs() < 2e-6);
        assert!((e.angles[1] - PI / 2.0).abs() < 2e-6);
        assert!((e.angles[2] - PI / 6.0).abs() < 1e-15);
        assert!((e.angles[3] - PI / 3.0).abs() < 1e-15);
        assert_eq!(e.gates.len(), 4);
        assert!(matches!(e.gates[1], Gate::Rz { qubit: 0, angle: Angle::Encoding(1) }));
        assert_eq!(encode(&[1.2]), Err(Error::Domain(1.2)));
        assert!(encode(&[-0.1]).is_err());
    }

    #[test]
    fn run_arity_and_determinism() {
        let mut c = CircuitProgram::new(2).unwrap();
        c.push_encoding_block();
        c.push_ansatz_layer();
        let obs = Observable::all_z(2);
        let enc = encoding_angles(&[0.2, 0.9]).unwrap();
        let var = [0.1, -0.2, 0.3, 0.05];
        let a = run(&c, &enc, &var, &obs).unwrap();
        let b = run(&c, &enc, &var, &obs).unwrap();
        assert_eq!(a, b);
        assert!(matches!(run(&c, &enc, &var[..3], &obs), Err(Error::Arity { .. })));
        assert!(matches!(run(&c, &enc[..1], &var, &obs), Err(Error::Arity { .. })));
    }

    #[test]
    fn single_qubit_shift_rule() {
        let c = build_ansatz(1, 1).unwrap();
        let obs = Observable::all_z(1);
        for theta in [0.3, 1.0, 2.0] {
            let g = parameter_shift_grad(&c, &[], &[theta, 0.0], &obs, &[1.0]).unwrap();
            assert!((g.variational[0] + libm::sin(theta)).abs() < 1e-10);
            // RZ after RY on |0> does not move <Z>
            assert!(g.variational[1].abs() < 1e-12);
        }
    }

    #[test]
    fn zero_upstream_gives_zero() {
        let mut c = CircuitProgram::new(2).unwrap();
        c.push_encoding_block();
        c.push_ansatz_layer();
        let g = parameter_shift_grad(
            &c,
            &encoding_angles(&[0.3, 0.4]).unwrap(),
            &[0.5; 4],
            &Observable::all_z(2),
            &[0.0, 0.0],
        )
        .unwrap();
        assert!(g.variational.iter().chain(&g.encoding).all(|&v| v == 0.0));
    }

    #[test]
    fn feature_chain_rule_matches_difference() {
        // d/dx <Z> for RY(asin x) RZ(acos x) on one qubit: <Z> = cos(asin x) = sqrt(1 - x^2)
        let mut c = CircuitProgram::new(1).unwrap();
        c.push_encoding_block();
        let obs = Observable::all_z(1);
        for x in [0.1, 0.5, 0.8] {
            let enc = encoding_angles(&[x]).unwrap();
            let g = parameter_shift_grad(&c, &enc, &[], &obs, &[1.0]).unwrap();
            let dx = encoding_feature_grad(&[x], &g.encoding).unwrap()[0];
            let expected = -x / libm::sqrt(1.0 - x * x);
            assert!((dx - expected).abs() < 1e-10, "{dx} vs {expected}");
        }
        assert_eq!(encoding_feature_grad(&[0.0], &[1.0, 1.0]).unwrap()[0], 0.0);
    }

    #[test]
    fn validate_catches_duplicate_slots() {
        let mut c = build_ansatz(2, 1).unwrap();
        c.gates.push(Gate::Ry { qubit: 0, angle: Angle::Variational(0) });
        assert!(c.validate().is_err());
        let mut c = build_ansatz(2, 1).unwrap();
        c.gates.push(Gate::Cnot { control: 0, target: 4 });
        assert!(c.validate().is_err());
    }
}
