use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;
use wandering_core::geometry::{
    annulus_modulus, circle_polygon, length_lower_bound, polyline_hyperbolic_length,
    winding_number, RoundAnnulus,
};

/// Closed polygon winding `n` times (or a loop beside the origin for
/// `n = 0`) whose log-radius wobbles inside the middle of the annulus.
fn curve(a: &RoundAnnulus, n: i64, wobble: &[f64], phase: f64, vertices: usize) -> Vec<Complex64> {
    let width = a.log_ratio();
    let mut pts: Vec<Complex64> = (0..vertices)
        .map(|i| {
            let t = i as f64 / vertices as f64;
            let bump: f64 = wobble
                .iter()
                .enumerate()
                .map(|(j, c)| c * (2.0 * PI * (j + 1) as f64 * t + phase).sin())
                .sum();
            let log_r = a.log_core() + 0.3 * width * bump.tanh();
            let theta = if n == 0 {
                phase + 0.8 * (2.0 * PI * t).sin()
            } else {
                2.0 * PI * n as f64 * t + 0.2 * (2.0 * PI * t).sin()
            };
            Complex64::from_polar(log_r.exp(), theta)
        })
        .collect();
    pts.push(pts[0]);
    pts
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn hyperbolic_length_respects_the_winding_bound(
        log_inner in -2.0..2.0f64,
        width in 0.5..6.0f64,
        n in prop::sample::select(vec![0i64, 1, 2, 5]),
        wobble in prop::collection::vec(-0.5..0.5f64, 1..4),
        phase in -PI..PI,
    ) {
        let a = RoundAnnulus::new(log_inner, log_inner + width).unwrap();
        let pts = curve(&a, n, &wobble, phase, 400 * n.max(1) as usize);
        prop_assert_eq!(winding_number(&pts[..pts.len() - 1]).unwrap(), n);
        let len = polyline_hyperbolic_length(&pts, &a).unwrap();
        prop_assert!(len >= length_lower_bound(n, &a) * (1.0 - 1e-6));
    }

    #[test]
    fn core_circle_attains_the_bound(log_inner in -2.0..2.0f64, width in 0.5..6.0f64) {
        let a = RoundAnnulus::new(log_inner, log_inner + width).unwrap();
        let pts = circle_polygon(a.log_core(), 4096, 1);
        let len = polyline_hyperbolic_length(&pts, &a).unwrap();
        let bound = length_lower_bound(1, &a);
        prop_assert!((len - bound).abs() <= 1e-5 * bound);
    }

    #[test]
    fn moduli_add_across_a_common_circle(r in -50.0..50.0f64, s in 0.01..30.0f64, t in 0.01..30.0f64) {
        let inner = RoundAnnulus::new(r, r + s).unwrap();
        let outer = RoundAnnulus::new(r + s, r + s + t).unwrap();
        let whole = RoundAnnulus::new(r, r + s + t).unwrap();
        let sum = annulus_modulus(&inner) + annulus_modulus(&outer);
        let total = annulus_modulus(&whole);
        let ulp = f64::EPSILON * (r.abs() + s + t) / (2.0 * PI);
        prop_assert!((sum - total).abs() <= 4.0 * ulp);
    }
}
