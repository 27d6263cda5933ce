use proptest::prelude::*;
use std::f64::consts::E;
use wandering_core::critical::{locate_real_bisect, sign_changes_between};
use wandering_core::{
    locate, locate_thm4, EvalConfig, FamilySpec, LogComplex, PRule, PhaseRule, ZeroSequence,
};

fn baker() -> ZeroSequence {
    FamilySpec::baker1976(1.0 / (4.0 * E), 11.0, 65).build().unwrap()
}

fn positive_axis() -> ZeroSequence {
    FamilySpec::theorem4(
        2,
        LogComplex::from_log(-1.0).unwrap(),
        PRule::Harmonic { c: 0.2 },
        PhaseRule::AllZero,
        60.0,
        65,
    )
    .build()
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn one_sign_change_between_real_zeros(k in 3usize..60, which in prop::bool::ANY) {
        let seq = if which { baker() } else { positive_axis() };
        let n = sign_changes_between(&seq, k, 256, &EvalConfig::default()).unwrap();
        prop_assert_eq!(n, 1);
    }

    #[test]
    fn newton_agrees_with_bisection(k in 3usize..60, which in prop::bool::ANY) {
        let seq = if which { baker() } else { positive_axis() };
        let cfg = EvalConfig::default();
        let a = locate_thm4(&seq, k, &cfg).unwrap();
        let b = locate_real_bisect(&seq, k, &cfg).unwrap();
        let rel = (a.w.norm() - b.w.norm()).abs() / b.w.norm();
        prop_assert!(rel <= 1e-10, "k = {k}: relative gap {rel}");
    }

    #[test]
    fn residual_is_small(k in 3usize..60, which in prop::bool::ANY) {
        let seq = if which { baker() } else { positive_axis() };
        let cp = locate(&seq, k, &EvalConfig::default()).unwrap();
        prop_assert!(cp.residual <= 1e-8, "k = {k}: residual {}", cp.residual);
    }
}

#[test]
fn multiplicity_family_residual_is_small() {
    let seq = FamilySpec::theorem2(100, 7).build().unwrap();
    for k in 1..=6 {
        let cp = locate(&seq, k, &EvalConfig::default()).unwrap();
        assert!(cp.residual <= 1e-8, "k = {k}: residual {}", cp.residual);
    }
}
