mod common;

use common::{minimal_spec, model_fd, random_window, relative_errors, rng};
use hqnn_core::classical::lstm_forward;
use hqnn_core::models::{count_parameters, ModelKind, Regressor, RegressorSpec};
use hqnn_core::quantum::{encoding_angles, run, Observable};
use rand::Rng;

#[test]
fn minimal_sizes_respect_budgets() {
    for kind in ModelKind::ALL {
        let count = count_parameters(&minimal_spec(kind, 0)).unwrap();
        let budget = if kind.is_quantum() { 60 } else { 1500 };
        assert!(count <= budget, "{kind}: {count}");
    }
}

#[test]
fn full_model_gradients_match_finite_differences() {
    for kind in ModelKind::ALL {
        for seed in 0..3 {
            let spec = minimal_spec(kind, seed);
            let model = Regressor::new(spec.clone()).unwrap();
            let mut r = rng(100 + seed);
            let window = random_window(spec.lookback * spec.k_features, &mut r);
            let (_, tape) = model.forward(&window).unwrap();
            let analytic = model.backward(&tape, 1.0).unwrap().flatten();
            let numeric = model_fd(&model, &window, 1e-5);
            let (worst, norm) = relative_errors(&analytic, &numeric);
            assert!(worst < 1e-4 && norm < 1e-4, "{kind} seed {seed}: {worst:e} {norm:e}");
        }
    }
}

#[test]
fn upstream_scales_gradients() {
    let model = Regressor::new(minimal_spec(ModelKind::HybridQnn2, 3)).unwrap();
    let window = [0.1, 0.8, 0.4, 0.3];
    let (_, tape) = model.forward(&window).unwrap();
    let g1 = model.backward(&tape, 1.0).unwrap().flatten();
    let g3 = model.backward(&tape, -2.5).unwrap().flatten();
    for (a, b) in g1.iter().zip(&g3) {
        assert!((a * -2.5 - b).abs() < 1e-12);
    }
}

#[test]
fn hybrid1_equals_manual_composition() {
    let spec = RegressorSpec::new(ModelKind::HybridQnn1, 3, 17);
    let model = Regressor::new(spec.clone()).unwrap();
    let p = model.parameters();
    let mut r = rng(8);
    let window = random_window(6, &mut r);

    let lstm = hqnn_core::classical::RecurrentCell::from_params(
        hqnn_core::classical::CellKind::Lstm,
        3,
        spec.hidden,
        p.get("lstm").unwrap().to_vec(),
    )
    .unwrap();
    let (h, _) = lstm_forward(&lstm, &window).unwrap();
    let squash = p.get("squash").unwrap();
    let s: Vec<f64> = (0..3)
        .map(|o| {
            let row = &squash[o * spec.hidden..(o + 1) * spec.hidden];
            let a = squash[3 * spec.hidden + o] + row.iter().zip(&h).map(|(w, x)| w * x).sum::<f64>();
            1.0 / (1.0 + (-a).exp())
        })
        .collect();
    let circuit = model.circuit().unwrap();
    let z = run(circuit, &encoding_angles(&s).unwrap(), p.get("variational").unwrap(), &Observable::all_z(3)).unwrap();
    let w = p.get("readout").unwrap();
    let expected = w[3] + (0..3).map(|i| w[i] * z[i]).sum::<f64>();
    assert!((model.predict(&window).unwrap() - expected).abs() < 1e-10);
}

fn perturbed(model: &Regressor, name: &str, r: &mut impl Rng) -> Regressor {
    let mut p = model.parameters();
    for v in p.get_mut(name).unwrap() {
        *v += r.random_range(-1.0..1.0);
    }
    Regressor::with_parameters(model.spec().clone(), &p).unwrap()
}

fn zeroed(model: &Regressor, name: &str) -> Regressor {
    let mut p = model.parameters();
    p.get_mut(name).unwrap().iter_mut().for_each(|v| *v = 0.0);
    Regressor::with_parameters(model.spec().clone(), &p).unwrap()
}

#[test]
fn fusion_weights_cut_dataflow() {
    let mut r = rng(31);
    for seed in 0..5 {
        let base = Regressor::new(RegressorSpec::new(ModelKind::HybridQnn2, 3, seed)).unwrap();
        let window = random_window(6, &mut r);

        let no_quantum = zeroed(&base, "fusion_quantum");
        let y = no_quantum.predict(&window).unwrap();
        let moved = perturbed(&no_quantum, "variational", &mut r);
        assert!((moved.predict(&window).unwrap() - y).abs() < 1e-12);

        let no_classical = zeroed(&base, "fusion_classical");
        let y = no_classical.predict(&window).unwrap();
        for name in ["lstm", "projection"] {
            let moved = perturbed(&no_classical, name, &mut r);
            assert!((moved.predict(&window).unwrap() - y).abs() < 1e-12);
        }
        let (_, tape) = no_classical.forward(&window).unwrap();
        let g = no_classical.backward(&tape, 1.0).unwrap();
        assert!(g.get("lstm").unwrap().iter().all(|&v| v == 0.0));
        assert!(g.get("projection").unwrap().iter().all(|&v| v == 0.0));
        assert!(g.get("fusion_classical").unwrap().iter().any(|&v| v != 0.0));
    }
}

#[test]
fn seeded_models_are_deterministic() {
    let window = [0.3, 0.1, 0.9, 0.5, 0.6, 0.2];
    for kind in ModelKind::ALL {
        let a = Regressor::new(RegressorSpec::new(kind, 3, 5)).unwrap();
        let b = Regressor::new(RegressorSpec::new(kind, 3, 5)).unwrap();
        assert_eq!(a.predict(&window).unwrap().to_bits(), b.predict(&window).unwrap().to_bits());
        let c = Regressor::new(RegressorSpec::new(kind, 3, 6)).unwrap();
        assert_ne!(a.parameters(), c.parameters());
    }
}

#[test]
fn custom_qnn_reuploads_each_timestep() {
    let mut spec = RegressorSpec::new(ModelKind::CustomQnn, 3, 0);
    spec.lookback = 3;
    spec.layers = 1;
    let c = spec.circuit().unwrap().unwrap();
    assert_eq!(c.encoding_slots, 18);
    assert_eq!(c.variational_slots, 18);
    // later timesteps influence the output
    let model = Regressor::new(spec).unwrap();
    let mut w = vec![0.5; 9];
    let y = model.predict(&w).unwrap();
    w[8] = 0.9;
    assert_ne!(model.predict(&w).unwrap(), y);
}
