use hqnn_core::synth::{shift_bar, synth_data, Regime, MIN_BARS};
use proptest::prelude::*;

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

#[test]
fn trend_shift_drops_level() {
    assert_eq!(shift_bar(90), 60);
    for seed in 0..50 {
        let s = synth_data(90, seed, Regime::TrendShift).unwrap();
        let c = s.close();
        assert!(mean(&c[60..]) < 0.7 * mean(&c[..60]), "seed {seed}");
        // the same draws without the drop
        let w = synth_data(90, seed, Regime::Walk).unwrap();
        assert_eq!(c[..60], w.close()[..60]);
        for t in 60..90 {
            assert!((c[t] - 0.5 * w.close()[t]).abs() < 1e-12 * w.close()[t]);
        }
    }
}

#[test]
fn too_short() {
    assert!(synth_data(MIN_BARS - 1, 0, Regime::Walk).is_err());
    assert_eq!(synth_data(MIN_BARS, 0, Regime::Walk).unwrap().len(), MIN_BARS);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bars_are_consistent(n in 60usize..400, seed in any::<u64>(), shift in any::<bool>()) {
        let regime = if shift { Regime::TrendShift } else { Regime::Walk };
        let s = synth_data(n, seed, regime).unwrap();
        prop_assert_eq!(&s, &synth_data(n, seed, regime).unwrap());
        for t in 0..n {
            let (o, h, l, c) = (s.open()[t], s.high()[t], s.low()[t], s.close()[t]);
            prop_assert!(l > 0.0);
            prop_assert!(h >= o.max(c) && l <= o.min(c));
            if t > 0 {
                prop_assert_eq!(o, s.close()[t - 1]);
            }
        }
        prop_assert!(s.timestamps().windows(2).all(|w| w[0] < w[1]));
    }
}
