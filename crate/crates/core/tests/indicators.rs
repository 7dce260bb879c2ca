mod common;

use common::{oracle_adx, oracle_macd, oracle_rsi, random_walk};
use hqnn_core::indicators::{adx, macd, rsi, OhlcSeries};
use proptest::prelude::*;

fn close_enough(a: &[Option<f64>], b: &[Option<f64>], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        match (x, y) {
            (None, None) => {}
            (Some(x), Some(y)) => assert!((x - y).abs() <= tol, "bar {i}: {x} vs {y}"),
            _ => panic!("bar {i}: definedness differs ({x:?} vs {y:?})"),
        }
    }
}

#[test]
fn rsi_matches_closed_form() {
    for seed in 0..5 {
        let s = random_walk(100, seed);
        close_enough(&rsi(&s, 14).unwrap().values, &oracle_rsi(s.close(), 14), 1e-9);
        close_enough(&rsi(&s, 5).unwrap().values, &oracle_rsi(s.close(), 5), 1e-9);
    }
}

#[test]
fn macd_matches_closed_form() {
    for seed in 0..5 {
        let s = random_walk(100, seed);
        let m = macd(&s, 12, 26, 9).unwrap();
        let o = oracle_macd(s.close(), 12, 26, 9);
        close_enough(&m.macd_line.values, &o.iter().map(|x| x.0).collect::<Vec<_>>(), 1e-9);
        close_enough(&m.signal_line.values, &o.iter().map(|x| x.1).collect::<Vec<_>>(), 1e-9);
        close_enough(&m.histogram.values, &o.iter().map(|x| x.2).collect::<Vec<_>>(), 1e-9);
    }
}

#[test]
fn adx_matches_closed_form() {
    for seed in 0..5 {
        let s = random_walk(100, seed);
        close_enough(&adx(&s, 14).unwrap().values, &oracle_adx(&s, 14), 1e-9);
    }
}

#[test]
fn hand_computed_rsi() {
    // closes 1,2,1,3: gains (1,0,2), losses (0,1,0); period 2
    // seed at bar 2: g = 0.5, l = 0.5 -> 50; bar 3: g = 1.25, l = 0.25 -> 83.33...
    let close = [1.0, 2.0, 1.0, 3.0];
    let s = OhlcSeries::new(
        (0..4).collect(),
        close.to_vec(),
        close.iter().map(|c| c + 1.0).collect(),
        close.iter().map(|c| c - 1.0).collect(),
        close.to_vec(),
    )
    .unwrap();
    let v = rsi(&s, 2).unwrap().values;
    assert_eq!(v[2], Some(50.0));
    assert!((v[3].unwrap() - 250.0 / 3.0).abs() < 1e-12);
}

#[test]
fn flat_series_has_zero_adx() {
    let flat = OhlcSeries::new((0..60).collect(), vec![3.0; 60], vec![3.0; 60], vec![3.0; 60], vec![3.0; 60]).unwrap();
    assert!(adx(&flat, 14).unwrap().defined().all(|v| v == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bounded_and_causal(seed in 0u64..10_000, cut in 40usize..99) {
        let s = random_walk(100, seed);
        let full = rsi(&s, 14).unwrap();
        let adx_full = adx(&s, 14).unwrap();
        prop_assert!(full.defined().all(|v| (0.0..=100.0).contains(&v)));
        prop_assert!(adx_full.defined().all(|v| (0.0..=100.0).contains(&v)));
        // values at bar t depend only on bars <= t
        let head = OhlcSeries::new(
            s.timestamps()[..cut].to_vec(),
            s.open()[..cut].to_vec(),
            s.high()[..cut].to_vec(),
            s.low()[..cut].to_vec(),
            s.close()[..cut].to_vec(),
        ).unwrap();
        prop_assert_eq!(&rsi(&head, 14).unwrap().values[..], &full.values[..cut]);
        prop_assert_eq!(&adx(&head, 14).unwrap().values[..], &adx_full.values[..cut]);
        let m = macd(&head, 12, 26, 9).unwrap();
        prop_assert_eq!(&m.histogram.values[..], &macd(&s, 12, 26, 9).unwrap().histogram.values[..cut]);
    }

    #[test]
    fn scale_invariance(seed in 0u64..10_000, factor in 0.1f64..10.0) {
        let s = random_walk(80, seed);
        let t = s.scaled(factor);
        let (a, b) = (rsi(&s, 14).unwrap(), rsi(&t, 14).unwrap());
        for (x, y) in a.defined().zip(b.defined()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        let (a, b) = (adx(&s, 14).unwrap(), adx(&t, 14).unwrap());
        for (x, y) in a.defined().zip(b.defined()) {
            prop_assert!((x - y).abs() < 1e-8);
        }
    }
}
