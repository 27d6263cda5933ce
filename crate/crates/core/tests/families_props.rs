use proptest::prelude::*;
use std::f64::consts::{E, LN_2};
use wandering_core::{FamilySpec, LogComplex, PRule, PhaseRule};

fn product_family() -> impl Strategy<Value = FamilySpec> {
    (2u32..4, -3.0..1.0f64, 0.05..1.0f64, 50.0..200.0f64, prop::bool::ANY).prop_map(
        |(n, log_c, p, r1, harmonic)| {
            let rule = if harmonic { PRule::Harmonic { c: p } } else { PRule::Constant { c: p } };
            FamilySpec::theorem4(
                n,
                LogComplex::from_log(log_c).unwrap(),
                rule,
                PhaseRule::AllPi,
                r1,
                30,
            )
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn regeneration_is_bit_identical(spec in product_family()) {
        let a = spec.build().unwrap();
        let b = spec.build().unwrap();
        prop_assert_eq!(a.to_csv(), b.to_csv());
        for (x, y) in a.entries().iter().zip(b.entries()) {
            prop_assert_eq!(x.log_r.to_bits(), y.log_r.to_bits());
            prop_assert_eq!(x.theta.to_bits(), y.theta.to_bits());
        }
    }

    #[test]
    fn ratio_grows_like_powers_of_two(spec in product_family()) {
        let seq = spec.build().unwrap();
        for k in seq.growth_index().max(seq.first_index())..=seq.last_index() {
            let gap = seq.log_r(k + 1).unwrap() - seq.log_r(k).unwrap();
            prop_assert!(gap >= k as f64 * LN_2, "k = {k}: gap {gap}");
        }
    }
}

#[test]
fn baker1976_doubles_from_the_start() {
    let seq = FamilySpec::baker1976(1.0 / (4.0 * E), 11.0, 80).build().unwrap();
    assert_eq!(seq.growth_index(), 1);
    for k in 1..=80 {
        assert!(seq.log_r(k + 1).unwrap() - seq.log_r(k).unwrap() >= LN_2);
    }
}
