//! Independent reference implementations shared by the integration suites.
#![allow(dead_code)]

use hqnn_core::indicators::OhlcSeries;
use hqnn_core::models::{ModelKind, Regressor, RegressorSpec};
use hqnn_core::preprocess::WindowedDataset;
use hqnn_core::quantum::{BoundGate, CircuitProgram};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- quantum

pub type Mat = Vec<Vec<C>>;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn identity(dim: usize) -> Mat {
    (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect())
        .collect()
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (n, m) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); n * m]; n * m];
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

pub fn matvec(a: &Mat, v: &[C]) -> Vec<C> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

pub fn ry(theta: f64) -> Mat {
    let (co, si) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    vec![vec![c(co, 0.0), c(-si, 0.0)], vec![c(si, 0.0), c(co, 0.0)]]
}

pub fn rz(phi: f64) -> Mat {
    vec![
        vec![c((phi / 2.0).cos(), -(phi / 2.0).sin()), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c((phi / 2.0).cos(), (phi / 2.0).sin())],
    ]
}

fn pauli_x() -> Mat {
    vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]
}

fn pauli_z() -> Mat {
    vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]]
}

fn projector(bit: usize) -> Mat {
    let mut p = vec![vec![c(0.0, 0.0); 2]; 2];
    p[bit][bit] = c(1.0, 0.0);
    p
}

/// Tensor product of per-qubit factors, qubit 0 leftmost (most significant).
pub fn embed(n: usize, factors: &[(usize, Mat)]) -> Mat {
    let mut out = vec![vec![c(1.0, 0.0)]];
    for q in 0..n {
        let f = factors
            .iter()
            .find(|(fq, _)| *fq == q)
            .map_or_else(|| identity(2), |(_, m)| m.clone());
        out = kron(&out, &f);
    }
    out
}

fn add(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect())
        .collect()
}

/// Full `2^n x 2^n` unitary of one gate.
pub fn gate_matrix(n: usize, gate: &BoundGate) -> Mat {
    match *gate {
        BoundGate::Ry { qubit, angle } => embed(n, &[(qubit, ry(angle))]),
        BoundGate::Rz { qubit, angle } => embed(n, &[(qubit, rz(angle))]),
        BoundGate::Cnot { control, target } => add(
            &embed(n, &[(control, projector(0))]),
            &embed(n, &[(control, projector(1)), (target, pauli_x())]),
        ),
        BoundGate::Cz { control, target } => add(
            &embed(n, &[(control, projector(0))]),
            &embed(n, &[(control, projector(1)), (target, pauli_z())]),
        ),
    }
}

/// An ansatz preceded by one encoding block.
pub fn encoded_ansatz(n: usize, layers: usize) -> CircuitProgram {
    let mut c = CircuitProgram::new(n).unwrap();
    c.push_encoding_block();
    for _ in 0..layers {
        c.push_ansatz_layer();
    }
    c
}

pub fn dense_run(n: usize, gates: &[BoundGate]) -> Vec<C> {
    let mut v = vec![c(0.0, 0.0); 1 << n];
    v[0] = c(1.0, 0.0);
    for g in gates {
        v = matvec(&gate_matrix(n, g), &v);
    }
    v
}

/// `<psi| Z_q |psi>` through the dense observable.
pub fn dense_z(n: usize, psi: &[C], q: usize) -> f64 {
    let zq = embed(n, &[(q, pauli_z())]);
    let zpsi = matvec(&zq, psi);
    psi.iter().zip(&zpsi).map(|(a, b)| (a.conj() * b).re).sum()
}

/// `exp(a)` by scaling and squaring of a Taylor series.
pub fn expm(a: &Mat) -> Mat {
    let n = a.len();
    let norm: f64 = a.iter().map(|r| r.iter().map(|x| x.norm_sqr().sqrt()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = (norm.max(1.0).log2().ceil() as u32) + 4;
    let scale = 1.0 / f64::from(1u32 << squarings);
    let a: Mat = a.iter().map(|r| r.iter().map(|x| x * scale).collect()).collect();
    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..30 {
        term = matmul(&term, &a);
        term = term.iter().map(|r| r.iter().map(|x| x / k as f64).collect()).collect();
        result = add(&result, &term);
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

pub fn max_diff(a: &Mat, b: &Mat) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm_sqr().sqrt())
        .fold(0.0, f64::max)
}

// ------------------------------------------------------------- indicators

/// Seeded random-walk bars with independent wicks.
pub fn random_walk(n: usize, seed: u64) -> OhlcSeries {
    let mut r = rng(seed);
    let mut close = Vec::with_capacity(n);
    let mut level = 50.0;
    for _ in 0..n {
        level += r.random_range(-1.0..1.0);
        close.push(level);
    }
    let open: Vec<f64> = (0..n).map(|i| if i == 0 { 50.0 } else { close[i - 1] }).collect();
    let high = (0..n).map(|i| open[i].max(close[i]) + r.random_range(0.0..0.8)).collect();
    let low = (0..n).map(|i| open[i].min(close[i]) - r.random_range(0.0..0.8)).collect();
    OhlcSeries::new((0..n as i64).collect(), open, high, low, close).unwrap()
}

/// Closed-form exponential smoothing: the value at input `t >= period - 1`
/// is `(1 - a)^(t - p + 1) * SMA(x[0..p]) + sum_{s = p}^{t} a (1 - a)^(t - s) x[s]`.
pub fn smoothed(x: &[f64], period: usize, alpha: f64, t: usize) -> f64 {
    let seed = x[..period].iter().sum::<f64>() / period as f64;
    let mut v = (1.0 - alpha).powi((t + 1 - period) as i32) * seed;
    for s in period..=t {
        v += alpha * (1.0 - alpha).powi((t - s) as i32) * x[s];
    }
    v
}

pub fn oracle_rsi(close: &[f64], period: usize) -> Vec<Option<f64>> {
    let d: Vec<f64> = close.windows(2).map(|w| w[1] - w[0]).collect();
    let gains: Vec<f64> = d.iter().map(|x| if *x > 0.0 { *x } else { 0.0 }).collect();
    let losses: Vec<f64> = d.iter().map(|x| if *x < 0.0 { -*x } else { 0.0 }).collect();
    let a = 1.0 / period as f64;
    (0..close.len())
        .map(|bar| {
            if bar < period {
                return None;
            }
            let g = smoothed(&gains, period, a, bar - 1);
            let l = smoothed(&losses, period, a, bar - 1);
            Some(if l == 0.0 {
                100.0
            } else if g == 0.0 {
                0.0
            } else {
                100.0 * g / (g + l)
            })
        })
        .collect()
}

/// (line, signal, histogram) per bar.
pub fn oracle_macd(close: &[f64], fast: usize, slow: usize, signal: usize) -> Vec<(Option<f64>, Option<f64>, Option<f64>)> {
    let ema = |x: &[f64], p: usize, t: usize| smoothed(x, p, 2.0 / (p as f64 + 1.0), t);
    let line: Vec<f64> = (slow - 1..close.len())
        .map(|t| ema(close, fast, t) - ema(close, slow, t))
        .collect();
    (0..close.len())
        .map(|t| {
            if t < slow - 1 {
                return (None, None, None);
            }
            let j = t - (slow - 1);
            let l = line[j];
            if j < signal - 1 {
                return (Some(l), None, None);
            }
            let s = ema(&line, signal, j);
            (Some(l), Some(s), Some(l - s))
        })
        .collect()
}

pub fn oracle_adx(s: &OhlcSeries, period: usize) -> Vec<Option<f64>> {
    let (h, l, c) = (s.high(), s.low(), s.close());
    let n = s.len();
    let mut pdm = vec![];
    let mut mdm = vec![];
    let mut tr = vec![];
    for i in 1..n {
        let up = h[i] - h[i - 1];
        let down = l[i - 1] - l[i];
        pdm.push(if up > down && up > 0.0 { up } else { 0.0 });
        mdm.push(if down > up && down > 0.0 { down } else { 0.0 });
        tr.push((h[i] - l[i]).max((h[i] - c[i - 1]).abs()).max((l[i] - c[i - 1]).abs()));
    }
    let a = 1.0 / period as f64;
    // bar b >= period uses smoothed inputs up to index b - 1
    let dx: Vec<f64> = (period..n)
        .map(|b| {
            let t = smoothed(&tr, period, a, b - 1);
            let p = 100.0 * smoothed(&pdm, period, a, b - 1) / t;
            let m = 100.0 * smoothed(&mdm, period, a, b - 1) / t;
            if p + m == 0.0 {
                0.0
            } else {
                100.0 * (p - m).abs() / (p + m)
            }
        })
        .collect();
    (0..n)
        .map(|b| {
            if b < 2 * period - 1 {
                None
            } else {
                Some(smoothed(&dx, period, a, b - period))
            }
        })
        .collect()
}

// -------------------------------------------------------- differentiation

/// Smallest sizes used for gradient checks: quantum kinds stay at or
/// below 60 parameters, classical kinds below 1,500.
pub fn minimal_spec(kind: ModelKind, seed: u64) -> RegressorSpec {
    let mut spec = RegressorSpec::new(kind, 2, seed);
    match kind {
        ModelKind::CustomQnn => spec.layers = 2,
        ModelKind::HybridQnn1 => {
            spec.hidden = 2;
            spec.layers = 1;
        }
        ModelKind::HybridQnn2 => {
            spec.hidden = 1;
            spec.fusion = 3;
            spec.layers = 1;
        }
        _ => {
            spec.k_features = 3;
            spec.n_qubits = 3;
            spec.hidden = 8;
        }
    }
    spec
}

/// Central finite differences of every scalar in the model's bundle.
pub fn model_fd(model: &Regressor, window: &[f64], h: f64) -> Vec<f64> {
    let base = model.parameters();
    let flat = base.flatten();
    let mut probe = model.clone();
    (0..flat.len())
        .map(|i| {
            let mut p = flat.clone();
            p[i] = flat[i] + h;
            probe.set_parameters(&base.unflatten(&p).unwrap()).unwrap();
            let up = probe.predict(window).unwrap();
            p[i] = flat[i] - h;
            probe.set_parameters(&base.unflatten(&p).unwrap()).unwrap();
            let down = probe.predict(window).unwrap();
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Largest `|a - n| / max(|n|, 1)` over the components, and the norm-wise
/// relative error `||a - n|| / ||n||`.
pub fn relative_errors(analytic: &[f64], numeric: &[f64]) -> (f64, f64) {
    let worst = analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / n.abs().max(1.0))
        .fold(0.0, f64::max);
    let diff: f64 = analytic.iter().zip(numeric).map(|(a, n)| (a - n) * (a - n)).sum::<f64>().sqrt();
    let norm: f64 = numeric.iter().map(|n| n * n).sum::<f64>().sqrt();
    (worst, diff / norm.max(1e-300))
}

pub fn random_window(len: usize, r: &mut impl Rng) -> Vec<f64> {
    (0..len).map(|_| r.random_range(0.05..0.95)).collect()
}

// ----------------------------------------------------------------- data

/// Noiseless sinusoid windows whose target is feature 0 one step ahead.
pub fn sinusoid_dataset(n: usize, k: usize, lookback: usize) -> WindowedDataset {
    let f = |t: usize, j: usize| 0.5 + 0.4 * (0.3 * t as f64 + j as f64).sin();
    let windows: Vec<Vec<f64>> = (0..n)
        .map(|i| (i..i + lookback).flat_map(|t| (0..k).map(move |j| f(t, j))).collect())
        .collect();
    let targets = (0..n).map(|i| f(i + lookback, 0)).collect();
    WindowedDataset::from_windows(&windows, targets, lookback, (0..k).map(|j| format!("f{j}")).collect()).unwrap()
}
