use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::{E, PI};
use wandering_core::logspace::normalize_arg;
use wandering_core::{
    eval_f, eval_logderiv, zero_count, CircleRadius, EvalConfig, FamilySpec, LogComplex, PRule,
    PhaseRule, ScaledPoint, ZeroSequence,
};

fn baker() -> ZeroSequence {
    FamilySpec::baker1976(1.0 / (4.0 * E), 11.0, 40).build().unwrap()
}

fn positive_axis() -> ZeroSequence {
    FamilySpec::theorem4(
        2,
        LogComplex::from_log(-1.0).unwrap(),
        PRule::Harmonic { c: 0.2 },
        PhaseRule::AllZero,
        60.0,
        40,
    )
    .build()
    .unwrap()
}

fn point(seq: &ZeroSequence, k: usize, log_w: f64, arg: f64) -> ScaledPoint {
    ScaledPoint::from_log(seq, k, LogComplex::new(log_w, arg).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn conjugate_points_give_conjugate_values(
        k in 3usize..30, log_w in -0.6..0.6f64, arg in 0.05..3.0f64, real_axis in prop::bool::ANY,
    ) {
        let seq = if real_axis { positive_axis() } else { baker() };
        let cfg = EvalConfig::default();
        let a = eval_f(&seq, &point(&seq, k, log_w, arg), &cfg).unwrap();
        let b = eval_f(&seq, &point(&seq, k, log_w, -arg), &cfg).unwrap();
        let tol = 1e-12 * a.rho.norm().max(1.0);
        prop_assert!((a.rho.re - b.rho.re).abs() <= tol);
        prop_assert!(normalize_arg(a.rho.im + b.rho.im).abs() <= tol);
    }

    #[test]
    fn rebasing_keeps_the_value(k in 3usize..20, t in 0.05..0.95f64, arg in -PI..PI) {
        let seq = baker();
        let cfg = EvalConfig::default();
        let lk = seq.log_r(k).unwrap();
        let l1 = seq.log_r(k + 1).unwrap();
        let gap = l1 - lk;
        let from_k = eval_f(&seq, &point(&seq, k, t * gap, arg), &cfg).unwrap();
        let from_next = eval_f(&seq, &point(&seq, k + 1, (t - 1.0) * gap, arg), &cfg).unwrap();
        let x = from_k.log_rel(&seq, k + 1).unwrap();
        let y = from_next.log_rel(&seq, k + 1).unwrap();
        let scale = seq.log_r(k + 2).unwrap().abs().max(1.0);
        prop_assert!((x - y).abs() <= 1e-9 * scale, "k = {k}: {x} vs {y}");
    }

    #[test]
    fn zero_count_matches_multiplicities(k in 2usize..30, s in 0.02..0.98f64, u in 0.02..0.98f64) {
        let seq = baker();
        let cfg = EvalConfig::default();
        let lk = seq.log_r(k).unwrap();
        let gap = seq.log_r(k + 1).unwrap() - lk;
        let (lo, hi) = if s <= u { (s, u) } else { (u, s) };
        let inner = zero_count(&seq, &CircleRadius::new(k, lo * gap), &cfg).unwrap();
        let outer = zero_count(&seq, &CircleRadius::new(k, hi * gap), &cfg).unwrap();
        prop_assert_eq!(&inner, &seq.count_inside(lk + lo * gap));
        prop_assert_eq!(&outer, &seq.count_inside(lk + hi * gap));
        prop_assert!(inner <= outer);
    }

    #[test]
    fn log_derivative_matches_finite_differences(
        k in 3usize..10, log_w in 0.2..1.0f64, arg in -PI..PI,
    ) {
        let seq = baker();
        let cfg = EvalConfig::default();
        let h = 1e-5;
        let re = |dl: f64, da: f64| {
            eval_f(&seq, &point(&seq, k, log_w + dl, arg + da), &cfg).unwrap().rho.re
        };
        let g: Complex64 = eval_logderiv(&seq, &point(&seq, k, log_w, arg), &cfg).unwrap();
        // d log|f| / d log|z| = Re g and d log|f| / d arg z = -Im g
        let radial = (re(h, 0.0) - re(-h, 0.0)) / (2.0 * h);
        let angular = (re(0.0, h) - re(0.0, -h)) / (2.0 * h);
        let tol = 1e-6 * g.norm().max(1.0);
        prop_assert!((radial - g.re).abs() <= tol, "{radial} vs {}", g.re);
        prop_assert!((angular + g.im).abs() <= tol, "{angular} vs {}", -g.im);
    }
}
