//! Model topologies behind one regressor interface.
//!
//! * `CustomQNN`: data re-uploading circuit. Each lookback timestep is
//!   angle-encoded and followed by one ansatz layer; `<Z_q>` on every qubit
//!   feeds a linear readout.
//! * `HybridQNN1`: LSTM, then a sigmoid squash to `n` values in `(0, 1)`,
//!   then encoding and a shallow ansatz, then a linear readout.
//! * `HybridQNN2`: an LSTM branch projected to `X_DL` and a circuit branch on
//!   the per-feature window mean producing `X_QNN`, fused as
//!   `tanh(W_q X_QNN + W_c X_DL)` before a linear readout.
//! * `LSTM`, `RNN`, `GRU`, `BiLSTM`: recurrent layer plus linear readout.
//!
//! Quantum gradients come from the parameter-shift rule, classical ones
//! from reverse mode; both meet in [`Regressor::backward`].

mod bundle;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use bundle::{NamedVector, ParameterBundle};

use crate::classical::{
    Activation, BiGradients, BiLstm, BiTape, CellKind, DenseLayer, DenseTape, RecurrentCell, Tape,
};
use crate::math;
use crate::quantum::{
    encoding_angles, encoding_feature_grad, run, shift_grad, CircuitProgram, Observable,
    MAX_QUBITS,
};
use crate::{Error, Result};

/// Half-width of the uniform init for variational angles.
pub const VARIATIONAL_INIT: f64 = 0.1;

pub const DEFAULT_HIDDEN: usize = 16;
pub const DEFAULT_FUSION: usize = 8;
pub const DEFAULT_LAYERS: usize = 2;
pub const DEFAULT_HYBRID1_LAYERS: usize = 1;
pub const DEFAULT_LOOKBACK: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "CustomQNN")]
    CustomQnn,
    #[serde(rename = "HybridQNN1")]
    HybridQnn1,
    #[serde(rename = "HybridQNN2")]
    HybridQnn2,
    #[serde(rename = "LSTM")]
    Lstm,
    #[serde(rename = "RNN")]
    Rnn,
    #[serde(rename = "BiLSTM")]
    BiLstm,
    #[serde(rename = "GRU")]
    Gru,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::CustomQnn,
        ModelKind::HybridQnn1,
        ModelKind::HybridQnn2,
        ModelKind::Lstm,
        ModelKind::Rnn,
        ModelKind::BiLstm,
        ModelKind::Gru,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::CustomQnn => "CustomQNN",
            ModelKind::HybridQnn1 => "HybridQNN1",
            ModelKind::HybridQnn2 => "HybridQNN2",
            ModelKind::Lstm => "LSTM",
            ModelKind::Rnn => "RNN",
            ModelKind::BiLstm => "BiLSTM",
            ModelKind::Gru => "GRU",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn is_quantum(self) -> bool {
        matches!(
            self,
            ModelKind::CustomQnn | ModelKind::HybridQnn1 | ModelKind::HybridQnn2
        )
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Architecture and sizing of one regressor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegressorSpec {
    pub kind: ModelKind,
    pub n_qubits: usize,
    /// Ansatz layers; for `CustomQNN` at least one per lookback timestep is used.
    pub layers: usize,
    pub hidden: usize,
    pub lookback: usize,
    pub k_features: usize,
    /// Width of the `HybridQNN2` fusion layer.
    pub fusion: usize,
    pub seed: u64,
}

impl RegressorSpec {
    /// Default sizes for `kind` on `k` features; quantum kinds use `k` qubits.
    pub fn new(kind: ModelKind, k_features: usize, seed: u64) -> Self {
        Self {
            kind,
            n_qubits: k_features,
            layers: if kind == ModelKind::HybridQnn1 {
                DEFAULT_HYBRID1_LAYERS
            } else {
                DEFAULT_LAYERS
            },
            hidden: DEFAULT_HIDDEN,
            lookback: DEFAULT_LOOKBACK,
            k_features,
            fusion: DEFAULT_FUSION,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.k_features == 0 || self.lookback == 0 || self.hidden == 0 || self.fusion == 0 {
            return bad(format!("{}: sizes must be positive", self.kind));
        }
        if self.kind.is_quantum() {
            if self.n_qubits != self.k_features {
                return bad(format!(
                    "{} requires n_qubits ({}) == k_features ({})",
                    self.kind, self.n_qubits, self.k_features
                ));
            }
            if self.n_qubits > MAX_QUBITS {
                return Err(Error::Capacity(self.n_qubits));
            }
            if self.layers == 0 {
                return bad(format!("{} needs at least one ansatz layer", self.kind));
            }
        }
        Ok(())
    }

    /// Ansatz layers actually built for `CustomQNN`.
    fn reupload_layers(&self) -> usize {
        self.layers.max(self.lookback)
    }

    /// The model's circuit, if it has one.
    pub fn circuit(&self) -> Result<Option<CircuitProgram>> {
        self.validate()?;
        let n = self.n_qubits;
        let circuit = match self.kind {
            ModelKind::CustomQnn => {
                let mut c = CircuitProgram::new(n)?;
                for t in 0..self.reupload_layers() {
                    if t < self.lookback {
                        c.push_encoding_block();
                    }
                    c.push_ansatz_layer();
                }
                c
            }
            ModelKind::HybridQnn1 | ModelKind::HybridQnn2 => {
                let mut c = CircuitProgram::new(n)?;
                c.push_encoding_block();
                for _ in 0..self.layers {
                    c.push_ansatz_layer();
                }
                c
            }
            _ => return Ok(None),
        };
        Ok(Some(circuit))
    }
}

/// Parameter count implied by the spec's shapes.
pub fn count_parameters(spec: &RegressorSpec) -> Result<usize> {
    spec.validate()?;
    let (n, k, h, f) = (spec.n_qubits, spec.k_features, spec.hidden, spec.fusion);
    let lstm = RecurrentCell::param_count(CellKind::Lstm, k, h);
    Ok(match spec.kind {
        ModelKind::CustomQnn => 2 * n * spec.reupload_layers() + DenseLayer::param_count(n, 1),
        ModelKind::HybridQnn1 => {
            lstm + DenseLayer::param_count(h, n)
                + 2 * n * spec.layers
                + DenseLayer::param_count(n, 1)
        }
        ModelKind::HybridQnn2 => {
            lstm + DenseLayer::param_count(h, f)
                + 2 * n * spec.layers
                + f * n
                + f * f
                + DenseLayer::param_count(f, 1)
        }
        ModelKind::Lstm => lstm + DenseLayer::param_count(h, 1),
        ModelKind::Rnn => RecurrentCell::param_count(CellKind::Rnn, k, h) + DenseLayer::param_count(h, 1),
        ModelKind::Gru => RecurrentCell::param_count(CellKind::Gru, k, h) + DenseLayer::param_count(h, 1),
        ModelKind::BiLstm => 2 * lstm + DenseLayer::param_count(2 * h, 1),
    })
}

#[derive(Debug, Clone, PartialEq)]
struct QuantumPart {
    circuit: CircuitProgram,
    observable: Observable,
    variational: Vec<f64>,
}

impl QuantumPart {
    fn new(circuit: CircuitProgram, rng: &mut impl Rng) -> Self {
        let variational = (0..circuit.variational_slots)
            .map(|_| rng.random_range(-VARIATIONAL_INIT..=VARIATIONAL_INIT))
            .collect();
        Self {
            observable: Observable::all_z(circuit.n_qubits),
            circuit,
            variational,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Body {
    CustomQnn {
        quantum: QuantumPart,
    },
    HybridQnn1 {
        lstm: RecurrentCell,
        squash: DenseLayer,
        quantum: QuantumPart,
    },
    HybridQnn2 {
        lstm: RecurrentCell,
        projection: DenseLayer,
        quantum: QuantumPart,
        /// `fusion x n_qubits`, row-major.
        w_quantum: Vec<f64>,
        /// `fusion x fusion`, row-major.
        w_classical: Vec<f64>,
    },
    Recurrent {
        cell: RecurrentCell,
    },
    Bidirectional {
        cells: BiLstm,
    },
}

#[derive(Debug, Clone, PartialEq)]
struct CircuitTape {
    encoding: Vec<f64>,
    variational: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
enum BodyTape {
    CustomQnn {
        circuit: CircuitTape,
    },
    HybridQnn1 {
        lstm: Tape,
        squash: DenseTape,
        features: Vec<f64>,
        circuit: CircuitTape,
    },
    HybridQnn2 {
        lstm: Tape,
        projection: DenseTape,
        circuit: CircuitTape,
        x_qnn: Vec<f64>,
        x_dl: Vec<f64>,
        fused: Vec<f64>,
    },
    Recurrent {
        cell: Tape,
    },
    Bidirectional {
        cells: BiTape,
    },
}

/// Forward intermediates of one [`Regressor::forward`] call.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelTape {
    kind: ModelKind,
    body: BodyTape,
    readout: DenseTape,
}

/// A model instance: spec plus current parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Regressor {
    spec: RegressorSpec,
    body: Body,
    readout: DenseLayer,
}

fn mat_vec(m: &[f64], cols: usize, v: &[f64]) -> Vec<f64> {
    m.chunks(cols)
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// `m^T v` for row-major `m` with `cols` columns.
fn mat_t_vec(m: &[f64], cols: usize, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; cols];
    for (row, &vi) in m.chunks(cols).zip(v) {
        for (o, a) in out.iter_mut().zip(row) {
            *o += a * vi;
        }
    }
    out
}

fn outer(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

fn uniform_vec(len: usize, bound: f64, rng: &mut impl Rng) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-bound..=bound)).collect()
}

impl Regressor {
    /// Seeded initialization from `spec.seed`.
    pub fn new(spec: RegressorSpec) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let (n, k, h, f) = (spec.n_qubits, spec.k_features, spec.hidden, spec.fusion);
        let circuit = spec.circuit()?;
        let (body, readout_inputs) = match spec.kind {
            ModelKind::CustomQnn => (
                Body::CustomQnn {
                    quantum: QuantumPart::new(circuit.expect("quantum kind"), &mut rng),
                },
                n,
            ),
            ModelKind::HybridQnn1 => {
                let lstm = RecurrentCell::init(CellKind::Lstm, k, h, &mut rng);
                let squash = DenseLayer::init(h, n, Activation::Sigmoid, &mut rng);
                let quantum = QuantumPart::new(circuit.expect("quantum kind"), &mut rng);
                (Body::HybridQnn1 { lstm, squash, quantum }, n)
            }
            ModelKind::HybridQnn2 => {
                let lstm = RecurrentCell::init(CellKind::Lstm, k, h, &mut rng);
                let projection = DenseLayer::init(h, f, Activation::Identity, &mut rng);
                let quantum = QuantumPart::new(circuit.expect("quantum kind"), &mut rng);
                let w_quantum = uniform_vec(f * n, 1.0 / math::sqrt(n as f64), &mut rng);
                let w_classical = uniform_vec(f * f, 1.0 / math::sqrt(f as f64), &mut rng);
                (
                    Body::HybridQnn2 {
                        lstm,
                        projection,
                        quantum,
                        w_quantum,
                        w_classical,
                    },
                    f,
                )
            }
            ModelKind::Lstm | ModelKind::Rnn | ModelKind::Gru => {
                let kind = match spec.kind {
                    ModelKind::Lstm => CellKind::Lstm,
                    ModelKind::Rnn => CellKind::Rnn,
                    _ => CellKind::Gru,
                };
                (
                    Body::Recurrent {
                        cell: RecurrentCell::init(kind, k, h, &mut rng),
                    },
                    h,
                )
            }
            ModelKind::BiLstm => {
                let fwd = RecurrentCell::init(CellKind::Lstm, k, h, &mut rng);
                let bwd = RecurrentCell::init(CellKind::Lstm, k, h, &mut rng);
                (
                    Body::Bidirectional {
                        cells: BiLstm::new(fwd, bwd)?,
                    },
                    2 * h,
                )
            }
        };
        let readout = DenseLayer::init(readout_inputs, 1, Activation::Identity, &mut rng);
        Ok(Self { spec, body, readout })
    }

    /// Builds a model and loads `params` into it.
    pub fn with_parameters(spec: RegressorSpec, params: &ParameterBundle) -> Result<Self> {
        let mut model = Self::new(spec)?;
        model.set_parameters(params)?;
        Ok(model)
    }

    pub fn spec(&self) -> &RegressorSpec {
        &self.spec
    }

    pub fn circuit(&self) -> Option<&CircuitProgram> {
        match &self.body {
            Body::CustomQnn { quantum }
            | Body::HybridQnn1 { quantum, .. }
            | Body::HybridQnn2 { quantum, .. } => Some(&quantum.circuit),
            _ => None,
        }
    }

    /// Snapshot of all trainable parameters.
    pub fn parameters(&self) -> ParameterBundle {
        let mut b = ParameterBundle::new();
        match &self.body {
            Body::CustomQnn { quantum } => b.push("variational", quantum.variational.clone()),
            Body::HybridQnn1 { lstm, squash, quantum } => {
                b.push("lstm", lstm.params.clone());
                b.push("squash", squash.params.clone());
                b.push("variational", quantum.variational.clone());
            }
            Body::HybridQnn2 {
                lstm,
                projection,
                quantum,
                w_quantum,
                w_classical,
            } => {
                b.push("lstm", lstm.params.clone());
                b.push("projection", projection.params.clone());
                b.push("variational", quantum.variational.clone());
                b.push("fusion_quantum", w_quantum.clone());
                b.push("fusion_classical", w_classical.clone());
            }
            Body::Recurrent { cell } => b.push("recurrent", cell.params.clone()),
            Body::Bidirectional { cells } => {
                b.push("recurrent_forward", cells.forward.params.clone());
                b.push("recurrent_backward", cells.backward.params.clone());
            }
        }
        b.push("readout", self.readout.params.clone());
        b
    }

    /// Loads a bundle with the layout produced by [`parameters`](Self::parameters).
    pub fn set_parameters(&mut self, params: &ParameterBundle) -> Result<()> {
        self.parameters().check_layout(params)?;
        match &mut self.body {
            Body::CustomQnn { quantum } => {
                quantum.variational = params.take("variational", quantum.variational.len())?;
            }
            Body::HybridQnn1 { lstm, squash, quantum } => {
                lstm.params = params.take("lstm", lstm.params.len())?;
                squash.params = params.take("squash", squash.params.len())?;
                quantum.variational = params.take("variational", quantum.variational.len())?;
            }
            Body::HybridQnn2 {
                lstm,
                projection,
                quantum,
                w_quantum,
                w_classical,
            } => {
                lstm.params = params.take("lstm", lstm.params.len())?;
                projection.params = params.take("projection", projection.params.len())?;
                quantum.variational = params.take("variational", quantum.variational.len())?;
                *w_quantum = params.take("fusion_quantum", w_quantum.len())?;
                *w_classical = params.take("fusion_classical", w_classical.len())?;
            }
            Body::Recurrent { cell } => cell.params = params.take("recurrent", cell.params.len())?,
            Body::Bidirectional { cells } => {
                cells.forward.params = params.take("recurrent_forward", cells.forward.params.len())?;
                cells.backward.params =
                    params.take("recurrent_backward", cells.backward.params.len())?;
            }
        }
        self.readout.params = params.take("readout", self.readout.params.len())?;
        Ok(())
    }

    fn check_window(&self, window: &[f64]) -> Result<()> {
        let expected = self.spec.lookback * self.spec.k_features;
        if window.len() != expected {
            return Err(Error::Shape(format!(
                "{} expects a {}x{} window ({expected} values), got {}",
                self.spec.kind,
                self.spec.lookback,
                self.spec.k_features,
                window.len()
            )));
        }
        Ok(())
    }

    /// Scalar prediction plus the tape needed for [`backward`](Self::backward).
    pub fn forward(&self, window: &[f64]) -> Result<(f64, ModelTape)> {
        self.check_window(window)?;
        let k = self.spec.k_features;
        let (features, body) = match &self.body {
            Body::CustomQnn { quantum } => {
                let mut encoding = Vec::with_capacity(quantum.circuit.encoding_slots);
                for step in window.chunks(k) {
                    encoding.extend(encoding_angles(step)?);
                }
                let z = run(&quantum.circuit, &encoding, &quantum.variational, &quantum.observable)?;
                let circuit = CircuitTape {
                    encoding,
                    variational: quantum.variational.clone(),
                };
                (z, BodyTape::CustomQnn { circuit })
            }
            Body::HybridQnn1 { lstm, squash, quantum } => {
                let (h, lstm_tape) = lstm.forward(window)?;
                let (s, squash_tape) = squash.forward(&h)?;
                let encoding = encoding_angles(&s)?;
                let z = run(&quantum.circuit, &encoding, &quantum.variational, &quantum.observable)?;
                (
                    z,
                    BodyTape::HybridQnn1 {
                        lstm: lstm_tape,
                        squash: squash_tape,
                        features: s,
                        circuit: CircuitTape {
                            encoding,
                            variational: quantum.variational.clone(),
                        },
                    },
                )
            }
            Body::HybridQnn2 {
                lstm,
                projection,
                quantum,
                w_quantum,
                w_classical,
            } => {
                let (h, lstm_tape) = lstm.forward(window)?;
                let (x_dl, projection_tape) = projection.forward(&h)?;
                let steps = self.spec.lookback as f64;
                let mut pooled = vec![0.0; k];
                for step in window.chunks(k) {
                    for (p, x) in pooled.iter_mut().zip(step) {
                        *p += x / steps;
                    }
                }
                let encoding = encoding_angles(&pooled)?;
                let x_qnn = run(&quantum.circuit, &encoding, &quantum.variational, &quantum.observable)?;
                let q = mat_vec(w_quantum, self.spec.n_qubits, &x_qnn);
                let c = mat_vec(w_classical, self.spec.fusion, &x_dl);
                let fused: Vec<f64> = q.iter().zip(&c).map(|(a, b)| math::tanh(a + b)).collect();
                (
                    fused.clone(),
                    BodyTape::HybridQnn2 {
                        lstm: lstm_tape,
                        projection: projection_tape,
                        circuit: CircuitTape {
                            encoding,
                            variational: quantum.variational.clone(),
                        },
                        x_qnn,
                        x_dl,
                        fused,
                    },
                )
            }
            Body::Recurrent { cell } => {
                let (h, tape) = cell.forward(window)?;
                (h, BodyTape::Recurrent { cell: tape })
            }
            Body::Bidirectional { cells } => {
                let (h, tape) = cells.run(window)?;
                (h, BodyTape::Bidirectional { cells: tape })
            }
        };
        let (y, readout) = self.readout.forward(&features)?;
        Ok((
            y[0],
            ModelTape {
                kind: self.spec.kind,
                body,
                readout,
            },
        ))
    }

    pub fn predict(&self, window: &[f64]) -> Result<f64> {
        self.forward(window).map(|(y, _)| y)
    }

    fn check_circuit_tape(quantum: &QuantumPart, tape: &CircuitTape) -> Result<()> {
        if tape.variational != quantum.variational {
            return Err(Error::Tape("variational angles changed since forward".into()));
        }
        Ok(())
    }

    /// Gradients of `upstream * prediction` w.r.t. every parameter, laid out
    /// like [`parameters`](Self::parameters).
    pub fn backward(&self, tape: &ModelTape, upstream: f64) -> Result<ParameterBundle> {
        if tape.kind != self.spec.kind {
            return Err(Error::Tape(format!(
                "tape from a {} model given to a {}",
                tape.kind, self.spec.kind
            )));
        }
        let readout = self.readout.backward(&tape.readout, &[upstream])?;
        let d_features = readout.inputs;
        let mut grads = ParameterBundle::new();
        match (&self.body, &tape.body) {
            (Body::CustomQnn { quantum }, BodyTape::CustomQnn { circuit }) => {
                Self::check_circuit_tape(quantum, circuit)?;
                let g = shift_grad(
                    &quantum.circuit,
                    &circuit.encoding,
                    &quantum.variational,
                    &quantum.observable,
                    &d_features,
                    false,
                )?;
                grads.push("variational", g.variational);
            }
            (
                Body::HybridQnn1 { lstm, squash, quantum },
                BodyTape::HybridQnn1 {
                    lstm: lstm_tape,
                    squash: squash_tape,
                    features,
                    circuit,
                },
            ) => {
                Self::check_circuit_tape(quantum, circuit)?;
                let g = shift_grad(
                    &quantum.circuit,
                    &circuit.encoding,
                    &quantum.variational,
                    &quantum.observable,
                    &d_features,
                    true,
                )?;
                let ds = encoding_feature_grad(features, &g.encoding)?;
                let squash_grads = squash.backward(squash_tape, &ds)?;
                let lstm_grads = lstm.backward(lstm_tape, &squash_grads.inputs)?;
                grads.push("lstm", lstm_grads.params);
                grads.push("squash", squash_grads.params);
                grads.push("variational", g.variational);
            }
            (
                Body::HybridQnn2 {
                    lstm,
                    projection,
                    quantum,
                    w_quantum,
                    w_classical,
                },
                BodyTape::HybridQnn2 {
                    lstm: lstm_tape,
                    projection: projection_tape,
                    circuit,
                    x_qnn,
                    x_dl,
                    fused,
                },
            ) => {
                Self::check_circuit_tape(quantum, circuit)?;
                let d_pre: Vec<f64> = d_features
                    .iter()
                    .zip(fused)
                    .map(|(d, y)| d * (1.0 - y * y))
                    .collect();
                let d_wq = outer(&d_pre, x_qnn);
                let d_wc = outer(&d_pre, x_dl);
                let d_qnn = mat_t_vec(w_quantum, self.spec.n_qubits, &d_pre);
                let d_dl = mat_t_vec(w_classical, self.spec.fusion, &d_pre);
                let g = shift_grad(
                    &quantum.circuit,
                    &circuit.encoding,
                    &quantum.variational,
                    &quantum.observable,
                    &d_qnn,
                    false,
                )?;
                let projection_grads = projection.backward(projection_tape, &d_dl)?;
                let lstm_grads = lstm.backward(lstm_tape, &projection_grads.inputs)?;
                grads.push("lstm", lstm_grads.params);
                grads.push("projection", projection_grads.params);
                grads.push("variational", g.variational);
                grads.push("fusion_quantum", d_wq);
                grads.push("fusion_classical", d_wc);
            }
            (Body::Recurrent { cell }, BodyTape::Recurrent { cell: cell_tape }) => {
                grads.push("recurrent", cell.backward(cell_tape, &d_features)?.params);
            }
            (Body::Bidirectional { cells }, BodyTape::Bidirectional { cells: bi_tape }) => {
                let BiGradients {
                    forward, backward, ..
                } = cells.gradients(bi_tape, &d_features)?;
                grads.push("recurrent_forward", forward);
                grads.push("recurrent_backward", backward);
            }
            _ => return Err(Error::Tape("tape layout does not match model".into())),
        }
        grads.push("readout", readout.params);
        Ok(grads)
    }
}
