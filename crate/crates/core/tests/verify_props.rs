use proptest::prelude::*;
use std::f64::consts::E;
use std::sync::OnceLock;
use wandering_core::verify::EPSILON_GRID;
use wandering_core::{verify_ring_thm4, EvalConfig, FamilySpec, ZeroSequence};

fn baker() -> &'static ZeroSequence {
    static SEQ: OnceLock<ZeroSequence> = OnceLock::new();
    SEQ.get_or_init(|| FamilySpec::baker1976(1.0 / (4.0 * E), 11.0, 65).build().unwrap())
}

fn grid_eps() -> impl Strategy<Value = f64> {
    prop::sample::select(EPSILON_GRID.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn doubling_samples_keeps_a_clear_pass(k in 5usize..60, eps in grid_eps()) {
        let cfg = EvalConfig::default().with_samples(1024);
        let r = verify_ring_thm4(baker(), k, eps, &cfg).unwrap();
        let clear = r.pass && r.margins.iter().all(|m| m.gap.is_none_or(|g| m.value > 2.0 * g));
        prop_assume!(clear);
        let again = verify_ring_thm4(baker(), k, eps, &cfg.with_samples(2048)).unwrap();
        prop_assert!(again.pass);
    }

    #[test]
    fn passing_is_monotone_in_epsilon(k in 5usize..60) {
        let cfg = EvalConfig::default().with_samples(1024);
        let passes: Vec<bool> = EPSILON_GRID
            .iter()
            .map(|&eps| verify_ring_thm4(baker(), k, eps, &cfg).unwrap().pass)
            .collect();
        // the grid runs from large to small epsilon
        for i in 1..passes.len() {
            if passes[i] {
                prop_assert!(passes[..i].iter().all(|&p| p), "k = {k}: {passes:?}");
            }
        }
    }

    #[test]
    fn reports_are_deterministic(k in 5usize..60, eps in grid_eps()) {
        let cfg = EvalConfig::default().with_samples(512);
        let a = verify_ring_thm4(baker(), k, eps, &cfg).unwrap();
        let b = verify_ring_thm4(baker(), k, eps, &cfg).unwrap();
        prop_assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}
