use proptest::prelude::*;
use std::f64::consts::E;
use wandering_core::classify::{decide, zero_counts, Evidence, Signature};
use wandering_core::{
    locate, zero_count, CircleRadius, ClassifyInput, EvalConfig, FamilySpec, ZeroSequence,
};

fn signature() -> impl Strategy<Value = Signature> {
    prop::array::uniform4(prop::bool::ANY).prop_map(|b| Signature {
        ring_k_seen: b[0],
        ring_next_seen: b[1],
        ring_k_diverges: b[2],
        ring_next_diverges: b[3],
    })
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs()
}

proptest! {
    #[test]
    fn verdicts_survive_common_rescaling(
        values in prop::collection::vec(1e-3..10.0f64, 20..60),
        threshold in 0.01..5.0f64,
        margin in 0.01..0.3f64,
        lambda in 1e-3..1e3f64,
        sig in signature(),
    ) {
        // comparisons within rounding of the threshold may flip under scaling
        let lo = threshold * (1.0 - margin);
        let hi = threshold * (1.0 + margin);
        prop_assume!(values.iter().all(|&v| !near(v, lo) && !near(v, hi)));
        prop_assume!(values.iter().all(|&v| !near(v * 10.0, values[0])));
        let kp: Vec<(usize, f64)> = values.iter().enumerate().map(|(i, &v)| (i + 10, v)).collect();
        let scaled: Vec<(usize, f64)> = kp.iter().map(|&(k, v)| (k, v * lambda)).collect();
        let a = Evidence::from_values(&kp, threshold, margin);
        let b = Evidence::from_values(&scaled, threshold * lambda, margin);
        prop_assert_eq!(a, b);
        prop_assert_eq!(decide(&a, &sig), decide(&b, &sig));
    }
}

fn counts_hold(seq: &ZeroSequence, ks: std::ops::RangeInclusive<usize>) {
    let cfg = EvalConfig::default();
    let crit: Vec<_> = (*ks.start()..=*ks.end() + 1)
        .map(|k| locate(seq, k, &cfg).unwrap())
        .collect();
    let input = ClassifyInput {
        window: (*ks.start(), *ks.end()),
        margin: 0.1,
        critical: &crit,
        epsilons: &[],
        verifications: &[],
    };
    for k in ks {
        let c = zero_counts(seq, k, &input).unwrap();
        assert!(c.m < c.n, "k = {k}");
        assert!(num_bigint::BigUint::from(c.l) <= &c.n - &c.m, "k = {k}");
        if c.n < &c.m * 2u32 {
            assert!(num_bigint::BigUint::from(c.l) < c.m, "k = {k}");
        }
        // circle sqrt(r_k r_{k+1}) sits halfway between the zeros in log scale
        let gap = seq.log_r(k + 1).unwrap() - seq.log_r(k).unwrap();
        let counted = zero_count(seq, &CircleRadius::new(k, gap / 2.0), &cfg).unwrap();
        assert_eq!(counted, c.m, "k = {k}");
    }
}

#[test]
fn baker1976_counts_agree_with_the_argument_principle() {
    let seq = FamilySpec::baker1976(1.0 / (4.0 * E), 11.0, 45).build().unwrap();
    counts_hold(&seq, 3..=40);
}

#[test]
fn multiplicity_family_counts_agree_with_the_argument_principle() {
    let seq = FamilySpec::theorem2(100, 7).build().unwrap();
    counts_hold(&seq, 1..=5);
}
