use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math;
use crate::models::ParameterBundle;
use crate::{Error, Result};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// Bias-corrected ADAM moments over a flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            step: 0,
        }
    }

    /// One update of `params` in place.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::Shape(format!(
                "ADAM state holds {} moments, got {} parameters and {} gradients",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::Numeric(format!("non-finite gradient at index {i}")));
        }
        self.update(params, grads, lr);
        Ok(())
    }

    fn update(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        self.step += 1;
        let t = self.step as f64;
        let c1 = 1.0 - libm::pow(BETA1, t);
        let c2 = 1.0 - libm::pow(BETA2, t);
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            *m = BETA1 * *m + (1.0 - BETA1) * g;
            *v = BETA2 * *v + (1.0 - BETA2) * g * g;
            *p -= lr * (*m / c1) / (math::sqrt(*v / c2) + EPSILON);
        }
    }
}

/// ADAM update of a whole bundle; a non-finite gradient names its vector.
pub fn adam_step(
    state: &mut AdamState,
    params: &mut ParameterBundle,
    grads: &ParameterBundle,
    lr: f64,
) -> Result<()> {
    params.check_layout(grads)?;
    if let Some(bad) = grads
        .vectors
        .iter()
        .find(|v| v.values.iter().any(|g| !g.is_finite()))
    {
        return Err(Error::Numeric(format!(
            "non-finite gradient in parameter vector {}",
            bad.name
        )));
    }
    let mut flat = params.flatten();
    state.step(&mut flat, &grads.flatten(), lr)?;
    *params = params.unflatten(&flat)?;
    Ok(())
}
