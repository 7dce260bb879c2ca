use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_len, fingerprint, init_uniform};
use crate::math;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellKind {
    Rnn,
    Lstm,
    Gru,
}

impl CellKind {
    /// Number of stacked gate blocks in the weight matrices.
    pub fn gates(self) -> usize {
        match self {
            CellKind::Rnn => 1,
            CellKind::Lstm => 4,
            CellKind::Gru => 3,
        }
    }
}

/// A single recurrent layer.
///
/// Parameters are one flat vector laid out as `[W_x | W_h | b]` with
/// `W_x: (G*H x I)`, `W_h: (G*H x H)`, `b: G*H`, both matrices row-major.
/// Gate blocks are ordered `[i, f, g, o]` for LSTM and `[r, z, n]` for GRU.
///
/// * RNN: `h = tanh(W_x x + W_h h + b)`
/// * LSTM: `c = f*c + i*g`, `h = o*tanh(c)`
/// * GRU: `n = tanh(W_xn x + b_n + r*(W_hn h))`, `h = (1 - z)*n + z*h`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrentCell {
    pub kind: CellKind,
    pub input_size: usize,
    pub hidden_size: usize,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
struct Step {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    /// Activated gate values, `G*H`.
    gates: Vec<f64>,
    /// LSTM: new cell state. GRU: `W_hn h_prev`.
    aux: Vec<f64>,
    h: Vec<f64>,
}

/// Forward intermediates of one pass over a window.
#[derive(Debug, Clone, PartialEq)]
pub struct Tape {
    kind: CellKind,
    input_size: usize,
    hidden_size: usize,
    fingerprint: u64,
    steps: Vec<Step>,
}

impl Tape {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellGradients {
    pub params: Vec<f64>,
    /// Same layout as the input window.
    pub inputs: Vec<f64>,
}

fn matvec_add(out: &mut [f64], m: &[f64], cols: usize, v: &[f64]) {
    for (r, o) in out.iter_mut().enumerate() {
        let row = &m[r * cols..(r + 1) * cols];
        *o += row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    }
}

impl RecurrentCell {
    pub fn param_count(kind: CellKind, input_size: usize, hidden_size: usize) -> usize {
        let gh = kind.gates() * hidden_size;
        gh * input_size + gh * hidden_size + gh
    }

    pub fn zeros(kind: CellKind, input_size: usize, hidden_size: usize) -> Self {
        Self {
            kind,
            input_size,
            hidden_size,
            params: vec![0.0; Self::param_count(kind, input_size, hidden_size)],
        }
    }

    /// Uniform init on `[-1/sqrt(I + H), 1/sqrt(I + H)]`.
    pub fn init(kind: CellKind, input_size: usize, hidden_size: usize, rng: &mut impl Rng) -> Self {
        let mut cell = Self::zeros(kind, input_size, hidden_size);
        let bound = 1.0 / math::sqrt((input_size + hidden_size) as f64);
        init_uniform(&mut cell.params, bound, rng);
        cell
    }

    pub fn from_params(kind: CellKind, input_size: usize, hidden_size: usize, params: Vec<f64>) -> Result<Self> {
        check_len(
            "recurrent parameters",
            Self::param_count(kind, input_size, hidden_size),
            params.len(),
        )?;
        Ok(Self {
            kind,
            input_size,
            hidden_size,
            params,
        })
    }

    fn split(&self) -> (&[f64], &[f64], &[f64]) {
        let gh = self.kind.gates() * self.hidden_size;
        let (wx, rest) = self.params.split_at(gh * self.input_size);
        let (wh, b) = rest.split_at(gh * self.hidden_size);
        (wx, wh, b)
    }

    /// Mutable view of the bias block.
    pub fn bias_mut(&mut self) -> &mut [f64] {
        let gh = self.kind.gates() * self.hidden_size;
        let start = gh * (self.input_size + self.hidden_size);
        &mut self.params[start..]
    }

    /// Runs the cell from `h_0 = c_0 = 0` over a timestep-major window and
    /// returns the final hidden state.
    pub fn forward(&self, window: &[f64]) -> Result<(Vec<f64>, Tape)> {
        if window.is_empty() || window.len() % self.input_size != 0 {
            return Err(Error::Shape(format!(
                "window of {} values is not a nonempty multiple of input size {}",
                window.len(),
                self.input_size
            )));
        }
        let h_size = self.hidden_size;
        let gh = self.kind.gates() * h_size;
        let (wx, wh, b) = self.split();
        let mut h = vec![0.0; h_size];
        let mut c = vec![0.0; h_size];
        let mut steps = Vec::with_capacity(window.len() / self.input_size);
        for x in window.chunks(self.input_size) {
            let mut ax = b.to_vec();
            matvec_add(&mut ax, wx, self.input_size, x);
            let mut ah = vec![0.0; gh];
            matvec_add(&mut ah, wh, h_size, &h);
            let (gates, aux, h_new, c_new) = match self.kind {
                CellKind::Rnn => {
                    let h_new: Vec<f64> = ax.iter().zip(&ah).map(|(a, b)| math::tanh(a + b)).collect();
                    (h_new.clone(), Vec::new(), h_new, c.clone())
                }
                CellKind::Lstm => {
                    let mut g = vec![0.0; gh];
                    for k in 0..gh {
                        let a = ax[k] + ah[k];
                        g[k] = if k / h_size == 2 { math::tanh(a) } else { math::sigmoid(a) };
                    }
                    let c_new: Vec<f64> = (0..h_size)
                        .map(|j| g[h_size + j] * c[j] + g[j] * g[2 * h_size + j])
                        .collect();
                    let h_new = (0..h_size)
                        .map(|j| g[3 * h_size + j] * math::tanh(c_new[j]))
                        .collect();
                    (g, c_new.clone(), h_new, c_new)
                }
                CellKind::Gru => {
                    let mut g = vec![0.0; gh];
                    for k in 0..2 * h_size {
                        g[k] = math::sigmoid(ax[k] + ah[k]);
                    }
                    for j in 0..h_size {
                        g[2 * h_size + j] = math::tanh(ax[2 * h_size + j] + g[j] * ah[2 * h_size + j]);
                    }
                    let h_new = (0..h_size)
                        .map(|j| {
                            let z = g[h_size + j];
                            (1.0 - z) * g[2 * h_size + j] + z * h[j]
                        })
                        .collect();
                    (g, ah[2 * h_size..].to_vec(), h_new, c.clone())
                }
            };
            steps.push(Step {
                x: x.to_vec(),
                h_prev: core::mem::replace(&mut h, h_new.clone()),
                c_prev: core::mem::replace(&mut c, c_new),
                gates,
                aux,
                h: h_new,
            });
        }
        let tape = Tape {
            kind: self.kind,
            input_size: self.input_size,
            hidden_size: h_size,
            fingerprint: fingerprint(&self.params),
            steps,
        };
        Ok((h, tape))
    }

    /// Reverse-mode gradients of `upstream . h_T`.
    pub fn backward(&self, tape: &Tape, upstream: &[f64]) -> Result<CellGradients> {
        if tape.kind != self.kind
            || tape.input_size != self.input_size
            || tape.hidden_size != self.hidden_size
            || tape.fingerprint != fingerprint(&self.params)
        {
            return Err(Error::Tape(format!(
                "{:?} tape does not belong to this {:?} cell",
                tape.kind, self.kind
            )));
        }
        check_len("recurrent upstream", self.hidden_size, upstream.len())?;
        let h_size = self.hidden_size;
        let i_size = self.input_size;
        let gh = self.kind.gates() * h_size;
        let (wx, wh, _) = self.split();
        let n_wx = gh * i_size;
        let n_wh = gh * h_size;
        let mut grads = vec![0.0; self.params.len()];
        let mut d_inputs = vec![0.0; tape.steps.len() * i_size];
        let mut dh = upstream.to_vec();
        let mut dc = vec![0.0; h_size];
        for (t, step) in tape.steps.iter().enumerate().rev() {
            // pre-activation gradients routed to W_x/b and to W_h
            let mut dax = vec![0.0; gh];
            let mut dah;
            let mut dh_prev = vec![0.0; h_size];
            match self.kind {
                CellKind::Rnn => {
                    for j in 0..h_size {
                        dax[j] = dh[j] * (1.0 - step.h[j] * step.h[j]);
                    }
                    dah = dax.clone();
                }
                CellKind::Lstm => {
                    let g = &step.gates;
                    let c_new = &step.aux;
                    for j in 0..h_size {
                        let (ig, fg, cg, og) = (g[j], g[h_size + j], g[2 * h_size + j], g[3 * h_size + j]);
                        let tc = math::tanh(c_new[j]);
                        let dct = dc[j] + dh[j] * og * (1.0 - tc * tc);
                        dax[j] = dct * cg * ig * (1.0 - ig);
                        dax[h_size + j] = dct * step.c_prev[j] * fg * (1.0 - fg);
                        dax[2 * h_size + j] = dct * ig * (1.0 - cg * cg);
                        dax[3 * h_size + j] = dh[j] * tc * og * (1.0 - og);
                        dc[j] = dct * fg;
                    }
                    dah = dax.clone();
                }
                CellKind::Gru => {
                    let g = &step.gates;
                    let u = &step.aux;
                    dah = vec![0.0; gh];
                    for j in 0..h_size {
                        let (r, z, n) = (g[j], g[h_size + j], g[2 * h_size + j]);
                        let dn = dh[j] * (1.0 - z);
                        let dz = dh[j] * (step.h_prev[j] - n);
                        dh_prev[j] = dh[j] * z;
                        let dan = dn * (1.0 - n * n);
                        let dr = dan * u[j];
                        dax[j] = dr * r * (1.0 - r);
                        dax[h_size + j] = dz * z * (1.0 - z);
                        dax[2 * h_size + j] = dan;
                        dah[j] = dax[j];
                        dah[h_size + j] = dax[h_size + j];
                        dah[2 * h_size + j] = dan * r;
                    }
                }
            }
            for k in 0..gh {
                if dax[k] != 0.0 {
                    let row = k * i_size;
                    for i in 0..i_size {
                        grads[row + i] += dax[k] * step.x[i];
                        d_inputs[t * i_size + i] += dax[k] * wx[row + i];
                    }
                    grads[n_wx + n_wh + k] += dax[k];
                }
                if dah[k] != 0.0 {
                    let row = k * h_size;
                    for j in 0..h_size {
                        grads[n_wx + row + j] += dah[k] * step.h_prev[j];
                        dh_prev[j] += dah[k] * wh[row + j];
                    }
                }
            }
            dh = dh_prev;
        }
        Ok(CellGradients {
            params: grads,
            inputs: d_inputs,
        })
    }
}

fn expect_kind(cell: &RecurrentCell, kind: CellKind) -> Result<()> {
    if cell.kind != kind {
        return Err(Error::Shape(format!("expected a {kind:?} cell, got {:?}", cell.kind)));
    }
    Ok(())
}

/// Elman RNN with `tanh` hidden update.
pub fn rnn_forward(cell: &RecurrentCell, window: &[f64]) -> Result<(Vec<f64>, Tape)> {
    expect_kind(cell, CellKind::Rnn)?;
    cell.forward(window)
}

pub fn lstm_forward(cell: &RecurrentCell, window: &[f64]) -> Result<(Vec<f64>, Tape)> {
    expect_kind(cell, CellKind::Lstm)?;
    cell.forward(window)
}

pub fn gru_forward(cell: &RecurrentCell, window: &[f64]) -> Result<(Vec<f64>, Tape)> {
    expect_kind(cell, CellKind::Gru)?;
    cell.forward(window)
}

/// Forward and backward LSTMs whose final hidden states are concatenated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiLstm {
    pub forward: RecurrentCell,
    pub backward: RecurrentCell,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiTape {
    forward: Tape,
    backward: Tape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiGradients {
    pub forward: Vec<f64>,
    pub backward: Vec<f64>,
    pub inputs: Vec<f64>,
}

fn reverse_steps(window: &[f64], step: usize) -> Vec<f64> {
    window.rchunks(step).flatten().copied().collect()
}

impl BiLstm {
    pub fn new(forward: RecurrentCell, backward: RecurrentCell) -> Result<Self> {
        expect_kind(&forward, CellKind::Lstm)?;
        expect_kind(&backward, CellKind::Lstm)?;
        if forward.hidden_size != backward.hidden_size || forward.input_size != backward.input_size {
            return Err(Error::Shape("bidirectional cells differ in size".into()));
        }
        Ok(Self { forward, backward })
    }

    pub fn hidden_size(&self) -> usize {
        self.forward.hidden_size
    }

    /// `[h_fwd_T, h_bwd_1]`, `2H` values.
    pub fn run(&self, window: &[f64]) -> Result<(Vec<f64>, BiTape)> {
        let (mut hf, forward) = self.forward.forward(window)?;
        let reversed = reverse_steps(window, self.backward.input_size);
        let (hb, backward) = self.backward.forward(&reversed)?;
        hf.extend_from_slice(&hb);
        Ok((hf, BiTape { forward, backward }))
    }

    pub fn gradients(&self, tape: &BiTape, upstream: &[f64]) -> Result<BiGradients> {
        let h = self.hidden_size();
        check_len("bidirectional upstream", 2 * h, upstream.len())?;
        let gf = self.forward.backward(&tape.forward, &upstream[..h])?;
        let gb = self.backward.backward(&tape.backward, &upstream[h..])?;
        let back_inputs = reverse_steps(&gb.inputs, self.backward.input_size);
        let inputs = gf.inputs.iter().zip(&back_inputs).map(|(a, b)| a + b).collect();
        Ok(BiGradients {
            forward: gf.params,
            backward: gb.params,
            inputs,
        })
    }
}

/// Free-function form of [`BiLstm::run`].
pub fn bilstm_forward(
    forward_cell: &RecurrentCell,
    backward_cell: &RecurrentCell,
    window: &[f64],
) -> Result<(Vec<f64>, BiTape)> {
    BiLstm::new(forward_cell.clone(), backward_cell.clone())?.run(window)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_cells_stay_at_zero() {
        for kind in [CellKind::Rnn, CellKind::Lstm, CellKind::Gru] {
            let cell = RecurrentCell::zeros(kind, 3, 4);
            let (h, tape) = cell.forward(&[0.0; 6]).unwrap();
            assert_eq!(h, vec![0.0; 4]);
            assert_eq!(tape.len(), 2);
        }
    }

    #[test]
    fn rnn_single_step() {
        let cell = RecurrentCell::from_params(CellKind::Rnn, 1, 1, vec![1.0, 0.0, 0.0]).unwrap();
        let (h, _) = rnn_forward(&cell, &[0.5]).unwrap();
        assert!((h[0] - libm::tanh(0.5)).abs() < 1e-15);
    }

    #[test]
    fn lstm_forget_saturation_preserves_cell() {
        // x feeds the candidate on step 1 only; the forget gate is pinned open
        let (i_size, h) = (1, 1);
        let mut cell = RecurrentCell::zeros(CellKind::Lstm, i_size, h);
        cell.params[2] = 5.0; // W_x candidate
        let b = cell.bias_mut();
        b[0] = 10.0; // input gate open
        b[1] = 10.0; // forget gate open
        b[3] = 10.0; // output gate open
        let (_, tape) = cell.forward(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        let c1 = tape.steps[0].aux[0];
        let c4 = tape.steps[3].aux[0];
        assert!(c1 > 0.99);
        assert!((c4 - c1).abs() < 1e-3);
    }

    #[test]
    fn kind_and_shape_checks() {
        let cell = RecurrentCell::zeros(CellKind::Gru, 2, 2);
        assert!(lstm_forward(&cell, &[0.0; 4]).is_err());
        assert!(cell.forward(&[0.0; 3]).is_err());
        assert!(cell.forward(&[]).is_err());
        let other = RecurrentCell::zeros(CellKind::Gru, 2, 3);
        let (_, tape) = other.forward(&[0.0; 4]).unwrap();
        assert!(matches!(cell.backward(&tape, &[1.0, 1.0]), Err(Error::Tape(_))));
    }

    #[test]
    fn zero_upstream_zero_gradients() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        let cell = RecurrentCell::init(CellKind::Lstm, 2, 3, &mut rng);
        let (_, tape) = cell.forward(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        let g = cell.backward(&tape, &[0.0; 3]).unwrap();
        assert!(g.params.iter().chain(&g.inputs).all(|&v| v == 0.0));
    }

    #[test]
    fn bilstm_palindrome_halves_match() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(9);
        let cell = RecurrentCell::init(CellKind::Lstm, 2, 3, &mut rng);
        let window = [0.1, 0.9, 0.5, 0.5, 0.1, 0.9];
        let (h, _) = bilstm_forward(&cell, &cell, &window).unwrap();
        for j in 0..3 {
            assert!((h[j] - h[3 + j]).abs() < 1e-15);
        }
        let z = RecurrentCell::zeros(CellKind::Lstm, 2, 3);
        let (h, _) = bilstm_forward(&z, &z, &window).unwrap();
        assert!(h.iter().all(|&v| v == 0.0));
    }
}
