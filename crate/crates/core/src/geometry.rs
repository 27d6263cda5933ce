//! Round annuli centred at the origin: modulus, hyperbolic density and the
//! winding-number lower bound for hyperbolic length.
//!
//! The modulus is normalized as `log(R/r)/(2 pi)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// relative change at which segment quadrature stops refining
const QUAD_TOL: f64 = 1e-6;
const MIN_LEVELS: u32 = 3;
const MAX_LEVELS: u32 = 24;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundAnnulus {
    pub log_inner: f64,
    pub log_outer: f64,
}

impl RoundAnnulus {
    pub fn new(log_inner: f64, log_outer: f64) -> Result<Self> {
        if !(log_outer > log_inner) || !log_inner.is_finite() || !log_outer.is_finite() {
            return Err(Error::invalid(format!(
                "annulus needs finite log_inner < log_outer, got [{log_inner}, {log_outer}]"
            )));
        }
        Ok(Self { log_inner, log_outer })
    }

    pub fn log_ratio(&self) -> f64 {
        self.log_outer - self.log_inner
    }

    /// `log` of the core circle radius `sqrt(r R)`.
    pub fn log_core(&self) -> f64 {
        0.5 * (self.log_inner + self.log_outer)
    }
}

pub fn annulus_modulus(a: &RoundAnnulus) -> f64 {
    a.log_ratio() / (2.0 * PI)
}

/// Density of the hyperbolic metric of `a` at a point with `log|z| = z_log_mod`.
/// The annulus need not have inner radius 1; the formula is applied after
/// scaling by `1/r`, and the result is in units of inverse length in the
/// original coordinates.
pub fn hyperbolic_density(z_log_mod: f64, a: &RoundAnnulus) -> Result<f64> {
    let t = z_log_mod - a.log_inner;
    let log_r = a.log_ratio();
    if !(t > 0.0 && t < log_r) {
        return Err(Error::OutOfDomain(format!(
            "log|z| = {z_log_mod} outside ({}, {})",
            a.log_inner, a.log_outer
        )));
    }
    Ok(PI / (z_log_mod.exp() * (PI * t / log_r).sin() * log_r))
}

/// Lower bound `2 pi^2 |n| / log(R/r)` for the hyperbolic length of a curve
/// winding `n` times around the origin.
pub fn length_lower_bound(winding: i64, a: &RoundAnnulus) -> f64 {
    2.0 * PI * PI * winding.unsigned_abs() as f64 / a.log_ratio()
}

/// Winding number of the closed polygon `points` (last vertex joined to the
/// first) around the origin.
pub fn winding_number(points: &[Complex64]) -> Result<i64> {
    let mut total = 0.0;
    for (i, p) in points.iter().enumerate() {
        let q = points[(i + 1) % points.len()];
        if p.norm() == 0.0 {
            return Err(Error::OutOfDomain("polygon passes through the origin".into()));
        }
        total += (q / p).arg();
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

fn density_at(z: Complex64, a: &RoundAnnulus) -> Result<f64> {
    hyperbolic_density(z.norm().ln(), a)
}

/// Trapezoid quadrature of the density along one segment, halving the step
/// until the relative change drops below the tolerance.
fn segment_length(p: Complex64, q: Complex64, a: &RoundAnnulus) -> Result<f64> {
    let len = (q - p).norm();
    if len == 0.0 {
        return Ok(0.0);
    }
    let mut n: usize = 1;
    let mut sum = 0.5 * (density_at(p, a)? + density_at(q, a)?);
    let mut prev = sum * len;
    for level in 1..=MAX_LEVELS {
        let mut mid = 0.0;
        for i in 0..n {
            let s = (i as f64 + 0.5) / n as f64;
            mid += density_at(p + (q - p) * s, a)?;
        }
        sum += mid;
        n *= 2;
        let cur = sum * len / n as f64;
        if level >= MIN_LEVELS && (cur - prev).abs() <= QUAD_TOL * cur.abs() {
            return Ok(cur);
        }
        prev = cur;
    }
    Ok(prev)
}

/// Hyperbolic length of the polyline through `points` in `a`. Pass the first
/// point again at the end to close the curve.
pub fn polyline_hyperbolic_length(points: &[Complex64], a: &RoundAnnulus) -> Result<f64> {
    for p in points {
        density_at(*p, a)?;
    }
    points
        .windows(2)
        .map(|w| segment_length(w[0], w[1], a))
        .sum()
}

/// `n`-gon (closed, first vertex repeated) on the circle `|z| = exp(log_radius)`.
pub fn circle_polygon(log_radius: f64, vertices: usize, turns: i64) -> Vec<Complex64> {
    let r = log_radius.exp();
    (0..=vertices)
        .map(|i| {
            let t = 2.0 * PI * turns as f64 * i as f64 / vertices as f64;
            Complex64::from_polar(r, t)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_modulus() {
        let a = RoundAnnulus::new(0.0, 2.0 * PI).unwrap();
        assert!((annulus_modulus(&a) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scale_invariant_modulus() {
        let a = RoundAnnulus::new(0.3, 2.1).unwrap();
        let b = RoundAnnulus::new(0.3 + 5.0, 2.1 + 5.0).unwrap();
        assert!((annulus_modulus(&a) - annulus_modulus(&b)).abs() < 1e-14);
    }

    #[test]
    fn multiplicity_annulus_modulus() {
        // q_k = 100, q_{k+1} = 15000: ann(4 a_{k+1}, sqrt(a_{k+2}))
        let (q, q_next) = (100.0_f64, 15000.0_f64);
        let a = RoundAnnulus::new(q + 4f64.ln(), q_next / 2.0).unwrap();
        let want = (q_next / 2.0 - 4f64.ln() - q) / (2.0 * PI);
        assert!((annulus_modulus(&a) - want).abs() < 1e-9);
    }

    #[test]
    fn core_density() {
        let log_r = 3.0;
        let a = RoundAnnulus::new(0.0, log_r).unwrap();
        let d = hyperbolic_density(log_r / 2.0, &a).unwrap();
        let want = PI / ((log_r / 2.0).exp() * log_r);
        assert!((d - want).abs() < 1e-14 * want);
    }

    #[test]
    fn density_dominates_flat_bound_and_blows_up() {
        let a = RoundAnnulus::new(0.0, 2.0).unwrap();
        for i in 1..100 {
            let t = 2.0 * i as f64 / 100.0;
            let d = hyperbolic_density(t, &a).unwrap();
            assert!(d >= PI / (t.exp() * 2.0));
        }
        assert!(hyperbolic_density(1e-12, &a).unwrap() > 1e10);
        assert!(matches!(hyperbolic_density(0.0, &a), Err(Error::OutOfDomain(_))));
        assert!(matches!(hyperbolic_density(2.5, &a), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn bound_values() {
        let a = RoundAnnulus::new(0.0, 2.0 * PI * PI).unwrap();
        assert!((length_lower_bound(1, &a) - 1.0).abs() < 1e-15);
        assert_eq!(length_lower_bound(0, &a), 0.0);
        let q = 1e4;
        let b = RoundAnnulus::new(0.0, q + 4f64.ln()).unwrap();
        assert!(length_lower_bound(q as i64, &b) >= PI * PI);
    }

    #[test]
    fn core_circle_meets_bound() {
        let a = RoundAnnulus::new(0.0, 3.0).unwrap();
        let pts = circle_polygon(a.log_core(), 4096, 1);
        assert_eq!(winding_number(&pts[..4096]).unwrap(), 1);
        let len = polyline_hyperbolic_length(&pts, &a).unwrap();
        let bound = length_lower_bound(1, &a);
        assert!(len >= bound * (1.0 - 1e-6));
        assert!((len - 2.0 * PI * PI / 3.0).abs() < 1e-5 * bound);
    }

    #[test]
    fn radial_segment_positive() {
        let a = RoundAnnulus::new(0.0, 3.0).unwrap();
        let pts = [Complex64::new(1.5, 0.0), Complex64::new(10.0, 0.0)];
        let len = polyline_hyperbolic_length(&pts, &a).unwrap();
        assert!(len > 0.0);
        assert_eq!(winding_number(&pts).unwrap(), 0);
    }

    #[test]
    fn chord_leaving_annulus_is_rejected() {
        let a = RoundAnnulus::new(0.0, 1.0).unwrap();
        let pts = [Complex64::new(2.0, 0.0), Complex64::new(-2.0, 0.1)];
        assert!(matches!(
            polyline_hyperbolic_length(&pts, &a),
            Err(Error::OutOfDomain(_))
        ));
    }
}
