use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_len, fingerprint, init_uniform};
use crate::math;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Identity,
    Tanh,
    Sigmoid,
    Relu,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Tanh => math::tanh(x),
            Activation::Sigmoid => math::sigmoid(x),
            Activation::Relu => x.max(0.0),
        }
    }

    /// Derivative expressed through the activation's output.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Tanh => 1.0 - y * y,
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// `y = act(W x + b)` with `W` stored row-major (`outputs x inputs`)
/// followed by `b` in one flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub inputs: usize,
    pub outputs: usize,
    pub activation: Activation,
    pub params: Vec<f64>,
}

/// Intermediates of one [`DenseLayer::forward`] call.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTape {
    input: Vec<f64>,
    output: Vec<f64>,
    fingerprint: u64,
}

impl DenseTape {
    pub fn output(&self) -> &[f64] {
        &self.output
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseGradients {
    pub params: Vec<f64>,
    pub inputs: Vec<f64>,
}

impl DenseLayer {
    pub fn param_count(inputs: usize, outputs: usize) -> usize {
        outputs * inputs + outputs
    }

    pub fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Self {
        Self {
            inputs,
            outputs,
            activation,
            params: vec![0.0; Self::param_count(inputs, outputs)],
        }
    }

    /// Uniform init on `[-1/sqrt(inputs), 1/sqrt(inputs)]`.
    pub fn init(inputs: usize, outputs: usize, activation: Activation, rng: &mut impl Rng) -> Self {
        let mut layer = Self::zeros(inputs, outputs, activation);
        init_uniform(&mut layer.params, 1.0 / math::sqrt(inputs as f64), rng);
        layer
    }

    pub fn from_params(inputs: usize, outputs: usize, activation: Activation, params: Vec<f64>) -> Result<Self> {
        check_len("dense parameters", Self::param_count(inputs, outputs), params.len())?;
        Ok(Self {
            inputs,
            outputs,
            activation,
            params,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.params[..self.outputs * self.inputs]
    }

    pub fn bias(&self) -> &[f64] {
        &self.params[self.outputs * self.inputs..]
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        let split = self.outputs * self.inputs;
        &mut self.params[split..]
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, DenseTape)> {
        if x.len() != self.inputs {
            return Err(Error::Shape(format!(
                "dense layer expects {} inputs, got {}",
                self.inputs,
                x.len()
            )));
        }
        let w = self.weights();
        let y: Vec<f64> = self
            .bias()
            .iter()
            .enumerate()
            .map(|(o, b)| {
                let row = &w[o * self.inputs..(o + 1) * self.inputs];
                self.activation
                    .apply(b + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
            })
            .collect();
        let tape = DenseTape {
            input: x.to_vec(),
            output: y.clone(),
            fingerprint: fingerprint(&self.params),
        };
        Ok((y, tape))
    }

    pub fn backward(&self, tape: &DenseTape, dy: &[f64]) -> Result<DenseGradients> {
        if tape.input.len() != self.inputs || tape.fingerprint != fingerprint(&self.params) {
            return Err(Error::Tape("dense tape recorded with other parameters".into()));
        }
        check_len("dense upstream", self.outputs, dy.len())?;
        let mut params = vec![0.0; self.params.len()];
        let mut dx = vec![0.0; self.inputs];
        let w = self.weights();
        let n_w = self.outputs * self.inputs;
        for o in 0..self.outputs {
            let da = dy[o] * self.activation.derivative_from_output(tape.output[o]);
            if da == 0.0 {
                continue;
            }
            let row = o * self.inputs;
            for i in 0..self.inputs {
                params[row + i] += da * tape.input[i];
                dx[i] += da * w[row + i];
            }
            params[n_w + o] += da;
        }
        Ok(DenseGradients { params, inputs: dx })
    }
}
