//! Critical points of `f` in each ring.
//!
//! For the product-recurrence families the critical point `c_k` sits just
//! inside `a_k`, at `c_k = (1 - 1/(k + N + delta_k)) a_k`; it is found by
//! Newton's method on `g(w) = z f'(z)/f(z)` with `z = w a_k`. For the
//! multiplicity family the critical point between `a_k` and `a_{k+1}` is
//! bracketed on the real axis and bisected.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::{eval_f, logderiv_full, EvalConfig, ScaledPoint};
use crate::families::{FamilyKind, ZeroSequence};
use crate::logspace::LogComplex;

const MAX_NEWTON_STEPS: usize = 50;
const NEWTON_TOL: f64 = 1e-13;
const MAX_HALVINGS: usize = 8;
const BISECT_WIDTH: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub k: usize,
    /// the zero `w` is measured against: `c_k = w a_base`
    pub base: usize,
    pub w: Complex64,
    /// `|z f'/f|` at the point, divided by the largest multiplicity inside it
    pub residual: f64,
    /// real part of `delta_k`
    pub delta: f64,
    pub delta_im: f64,
    /// `log|f(c_k)|`
    pub log_fc: f64,
    /// `log|f(c_k)| - log r_{k+1}`
    pub ratio_next: f64,
}

/// `log |w|` range of `B_k = {sqrt(r_{k-1} r_k) <= |z| <= sqrt(r_k r_{k+1})}`.
fn search_band(seq: &ZeroSequence, k: usize) -> Result<(f64, f64)> {
    let lk = seq.entry(k)?.log_r;
    let prev = seq.log_r(k - 1).ok_or(Error::IndexOutOfRange(k - 1))?;
    let next = seq.log_r(k + 1).ok_or(Error::IndexOutOfRange(k + 1))?;
    Ok((-(lk - prev) / 2.0, (next - lk) / 2.0))
}

/// `N + sum_{j <= k} q_j` as a float, and the largest multiplicity in it.
fn inner_mass(seq: &ZeroSequence, k: usize) -> (f64, f64) {
    let mut total = f64::from(seq.origin_mult());
    let mut largest: f64 = 1.0;
    for e in seq.entries().iter().take_while(|e| e.k <= k) {
        total += e.mult_f64();
        largest = largest.max(e.mult_f64());
    }
    (total, largest)
}

fn finish_point(
    seq: &ZeroSequence,
    k: usize,
    base: usize,
    w: Complex64,
    cfg: &EvalConfig,
) -> Result<CriticalPoint> {
    let p = ScaledPoint::new(seq, base, w)?;
    let d = logderiv_full(seq, &p, cfg)?;
    let (mass, largest) = inner_mass(seq, k);
    let mult_k = seq.entry(k)?.mult_f64();
    let inv = Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) - w);
    let delta = inv - mass / mult_k;
    let v = eval_f(seq, &p, cfg)?;
    Ok(CriticalPoint {
        k,
        base,
        w,
        residual: d.value.norm() / largest,
        delta: delta.re,
        delta_im: delta.im,
        log_fc: v.log_abs(seq),
        ratio_next: v.log_rel_next(seq),
    })
}

/// Newton's method for the critical point in `B_k`.
pub fn locate_thm4(seq: &ZeroSequence, k: usize, cfg: &EvalConfig) -> Result<CriticalPoint> {
    if k < seq.first_index() + 2 {
        return Err(Error::invalid(format!("critical points are located from k = 3 on, got {k}")));
    }
    let (lo, hi) = search_band(seq, k)?;
    let (mass, _) = inner_mass(seq, k);
    let mult_k = seq.entry(k)?.mult_f64();
    let mut w = Complex64::new(1.0 - mult_k / mass, 0.0);
    let inside = |w: Complex64| {
        let l = w.norm().ln();
        l >= lo && l <= hi
    };
    let mut last_step = f64::INFINITY;
    for _ in 0..MAX_NEWTON_STEPS {
        let p = ScaledPoint::new(seq, k, w)?;
        let d = logderiv_full(seq, &p, cfg)?;
        // d.w_derivative is w dg/dw
        let mut step = -d.value * w / d.w_derivative;
        if !(step.re.is_finite() && step.im.is_finite()) {
            return Err(Error::NoConvergence { k, last_step });
        }
        let mut halvings = 0;
        while !inside(w + step) {
            if halvings == MAX_HALVINGS {
                return Err(Error::LeftAnnulus(k));
            }
            step *= 0.5;
            halvings += 1;
        }
        w += step;
        last_step = step.norm();
        if last_step < NEWTON_TOL {
            return finish_point(seq, k, k, w, cfg);
        }
    }
    Err(Error::NoConvergence { k, last_step })
}

/// Real `g` at `w = e^s` along the direction of `a_base`.
fn g_real(seq: &ZeroSequence, base: usize, s: f64, cfg: &EvalConfig) -> Result<f64> {
    let p = ScaledPoint::from_log(seq, base, LogComplex::from_log(s)?)?;
    Ok(logderiv_full(seq, &p, cfg)?.value.re)
}

/// Bisection in `log w` for a sign change `+ -` of real `g`.
fn bisect(
    seq: &ZeroSequence,
    base: usize,
    mut lo: f64,
    mut hi: f64,
    cfg: &EvalConfig,
) -> Result<f64> {
    while hi - lo > BISECT_WIDTH {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g_real(seq, base, mid, cfg)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The critical point between consecutive zeros `a_{k-1}` and `a_k` of a
/// family whose zeros all lie on one ray, found by bisection.
pub fn locate_real_bisect(seq: &ZeroSequence, k: usize, cfg: &EvalConfig) -> Result<CriticalPoint> {
    let lk = seq.entry(k)?.log_r;
    let prev = seq.log_r(k - 1).ok_or(Error::IndexOutOfRange(k - 1))?;
    if seq.entry(k - 1)?.theta != seq.entry(k)?.theta {
        return Err(Error::invalid("bisection needs zeros on a common ray"));
    }
    let lo = -(lk - prev) + 1e-12;
    let hi = -1e-12;
    let s = bisect(seq, k, lo, hi, cfg)?;
    finish_point(seq, k, k, Complex64::new(s.exp(), 0.0), cfg)
}

/// `g(x_k)` and `g(y_k)` at `x_k = q_k/(2 q_{k+1}) a_{k+1}` and
/// `y_k = 2 q_k/q_{k+1} a_{k+1}`.
pub fn bracket_thm2(seq: &ZeroSequence, k: usize, cfg: &EvalConfig) -> Result<(f64, f64)> {
    let (lx, ly) = thm2_bracket_logs(seq, k)?;
    Ok((g_real(seq, k + 1, lx, cfg)?, g_real(seq, k + 1, ly, cfg)?))
}

fn thm2_bracket_logs(seq: &ZeroSequence, k: usize) -> Result<(f64, f64)> {
    if seq.kind() != Some(FamilyKind::Theorem2) {
        return Err(Error::invalid("bracketing applies to the theorem2 family"));
    }
    let q = seq.entry(k)?.mult_f64();
    let q_next = seq.entry(k + 1)?.mult_f64();
    let ratio = (q / q_next).ln();
    Ok((ratio - LN_2, ratio + LN_2))
}

/// Critical point `c_k` of the theorem2 family, measured against `a_{k+1}`.
pub fn locate_thm2(seq: &ZeroSequence, k: usize, cfg: &EvalConfig) -> Result<CriticalPoint> {
    let (lx, ly) = thm2_bracket_logs(seq, k)?;
    let gx = g_real(seq, k + 1, lx, cfg)?;
    let gy = g_real(seq, k + 1, ly, cfg)?;
    if !(gx > 0.0 && gy < 0.0) {
        return Err(Error::BracketFailed { k, gx, gy });
    }
    let s = bisect(seq, k + 1, lx, ly, cfg)?;
    let mut cp = finish_point(seq, k + 1, k + 1, Complex64::new(s.exp(), 0.0), cfg)?;
    cp.k = k;
    cp.delta = f64::NAN;
    cp.delta_im = f64::NAN;
    // ratio against r_{k+1} = a_{k+1} for this indexing
    let v = eval_f(seq, &ScaledPoint::new(seq, k + 1, cp.w)?, cfg)?;
    cp.ratio_next = v.log_rel(seq, k + 1).ok_or(Error::IndexOutOfRange(k + 1))?;
    let (_, largest) = inner_mass(seq, k + 1);
    let d = logderiv_full(seq, &ScaledPoint::new(seq, k + 1, cp.w)?, cfg)?;
    cp.residual = d.value.norm() / largest;
    Ok(cp)
}

/// Dispatches on the family kind.
pub fn locate(seq: &ZeroSequence, k: usize, cfg: &EvalConfig) -> Result<CriticalPoint> {
    match seq.kind() {
        Some(FamilyKind::Theorem2) => locate_thm2(seq, k, cfg),
        _ => locate_thm4(seq, k, cfg),
    }
}

/// `log|f(c_k)| - log r_{k+1}` minus its predicted limit: `log(|C|/(2ekP_k))`
/// for the `P_k` families and `log(1/(4ek))` for Baker's 1988 example.
pub fn critical_value_ratio(seq: &ZeroSequence, cp: &CriticalPoint) -> Result<f64> {
    let kf = cp.k as f64;
    match seq.kind() {
        Some(FamilyKind::Baker1988) => Ok(cp.ratio_next + (4.0 * kf).ln() + 1.0),
        Some(FamilyKind::Theorem2) => {
            Err(Error::invalid("no critical value asymptotic for the theorem2 family"))
        }
        _ => {
            let log_p = seq.log_p(cp.k).ok_or(Error::IndexOutOfRange(cp.k))?;
            let predicted = seq.constant().log_mod() - (2.0 * kf).ln() - 1.0 - log_p;
            Ok(cp.ratio_next - predicted)
        }
    }
}

/// Baker 1988: `log|f(c_k)| - log r_{k+1}` minus `log(1/(4 e^2 k^2))`, the
/// limit obtained by expanding the product at the critical point.
pub fn baker1988_corrected_ratio(cp: &CriticalPoint) -> f64 {
    let kf = cp.k as f64;
    cp.ratio_next + (4.0 * kf * kf).ln() + 2.0
}

/// Number of sign changes of real `g` on a dense grid of the segment between
/// `a_{k-1}` and `a_k`; both zeros must lie on the same ray.
pub fn sign_changes_between(
    seq: &ZeroSequence,
    k: usize,
    points: usize,
    cfg: &EvalConfig,
) -> Result<usize> {
    let lk = seq.entry(k)?.log_r;
    let prev = seq.log_r(k - 1).ok_or(Error::IndexOutOfRange(k - 1))?;
    let w_prev = (prev - lk).exp();
    let mut changes = 0;
    let mut last: Option<f64> = None;
    for i in 1..=points {
        let w = w_prev + (1.0 - w_prev) * i as f64 / (points + 1) as f64;
        let g = g_real(seq, k, w.ln(), cfg)?;
        if let Some(prev_g) = last {
            if prev_g.signum() != g.signum() {
                changes += 1;
            }
        }
        last = Some(g);
    }
    Ok(changes)
}

/// CSV rows `k,re_w,im_w,delta,log_fc,ratio_next`.
pub fn to_csv(points: &[CriticalPoint]) -> String {
    let mut s = String::from("k,re_w,im_w,delta,log_fc,ratio_next\n");
    for cp in points {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            cp.k, cp.w.re, cp.w.im, cp.delta, cp.log_fc, cp.ratio_next
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{FamilySpec, ZeroEntry};
    use num_bigint::BigUint;
    use std::f64::consts::{E, PI};

    fn baker(k_max: usize) -> ZeroSequence {
        FamilySpec::baker1976(1.0 / (4.0 * E), 11.0, k_max).build().unwrap()
    }

    #[test]
    fn toy_critical_point_at_half() {
        // Two tiny zeros act like z^2 near |z| = 1, so
        // g = 2 + w/(w - 1) vanishes at w = 2/3 = 1 - 1/(k + N) with k + N = 3.
        let entries = vec![
            ZeroEntry::new(1, -700.0, PI, BigUint::from(1u32)).unwrap(),
            ZeroEntry::new(2, -600.0, PI, BigUint::from(1u32)).unwrap(),
            ZeroEntry::new(3, 0.0, PI, BigUint::from(1u32)).unwrap(),
            ZeroEntry::new(4, 600.0, PI, BigUint::from(1u32)).unwrap(),
        ];
        let seq = ZeroSequence::custom(LogComplex::ONE, 0, entries, 1200.0).unwrap();
        let cp = locate_thm4(&seq, 3, &EvalConfig::default()).unwrap();
        assert!((cp.w - Complex64::new(2.0 / 3.0, 0.0)).norm() < 1e-12);
        assert!(cp.delta.abs() < 1e-9);
    }

    #[test]
    fn baker_k30_near_prediction() {
        let seq = baker(60);
        let cp = locate_thm4(&seq, 30, &EvalConfig::default()).unwrap();
        assert!(cp.residual <= 1e-8);
        assert!(cp.delta.abs() < 0.2, "delta = {}", cp.delta);
        let (lo, hi) = search_band(&seq, 30).unwrap();
        let l = cp.w.norm().ln();
        assert!(l >= lo && l <= hi);
    }

    #[test]
    fn newton_matches_bisection() {
        let seq = baker(60);
        let cfg = EvalConfig::default();
        for k in [5, 20, 45] {
            let a = locate_thm4(&seq, k, &cfg).unwrap();
            let b = locate_real_bisect(&seq, k, &cfg).unwrap();
            assert!((a.w.norm() - b.w.norm()).abs() <= 1e-10 * a.w.norm(), "k = {k}");
        }
    }

    #[test]
    fn one_sign_change_between_zeros() {
        let seq = baker(40);
        let cfg = EvalConfig::default();
        for k in [4, 15, 30] {
            assert_eq!(sign_changes_between(&seq, k, 256, &cfg).unwrap(), 1);
        }
    }

    #[test]
    fn baker_critical_value_within_ten_percent() {
        let seq = baker(60);
        let cp = locate_thm4(&seq, 40, &EvalConfig::default()).unwrap();
        let r = critical_value_ratio(&seq, &cp).unwrap();
        assert!(r.abs() <= 0.1, "log ratio {r}");
    }

    #[test]
    fn uniform_family_ratio_near_two() {
        let c = 1.0;
        let spec = FamilySpec::theorem4(
            2,
            LogComplex::ONE,
            crate::families::PRule::Harmonic { c: c / (4.0 * E) },
            crate::families::PhaseRule::AllPi,
            30.0,
            60,
        );
        let seq = spec.build().unwrap();
        let cp = locate_thm4(&seq, 40, &EvalConfig::default()).unwrap();
        assert!((cp.ratio_next - 2f64.ln()).abs() < 0.1, "{}", cp.ratio_next);
    }

    #[test]
    fn multiplicity_family_bracket_signs() {
        let seq = FamilySpec::theorem2(100, 7).build().unwrap();
        let cfg = EvalConfig::default();
        for k in 0..6 {
            let (gx, gy) = bracket_thm2(&seq, k, &cfg).unwrap();
            assert!(gx > 0.0 && gy < 0.0, "k = {k}: {gx} {gy}");
            let cp = locate_thm2(&seq, k, &cfg).unwrap();
            assert!(cp.residual <= 1e-8, "k = {k}: residual {}", cp.residual);
        }
    }

    #[test]
    fn multiplicity_family_small_q0_fails_bracket() {
        let seq = FamilySpec::theorem2(4, 5).build().unwrap();
        let cfg = EvalConfig::default();
        let failed = (0..4).any(|k| matches!(locate_thm2(&seq, k, &cfg), Err(Error::BracketFailed { .. })));
        assert!(failed);
    }

    #[test]
    fn small_k_rejected() {
        let seq = baker(20);
        assert!(locate_thm4(&seq, 2, &EvalConfig::default()).is_err());
    }

    #[test]
    fn csv_header() {
        assert!(to_csv(&[]).starts_with("k,re_w,im_w,delta,log_fc,ratio_next"));
    }

    #[test]
    fn baker1988_ratio_scaling() {
        let seq = FamilySpec::baker1988(0.03, 2.0, 40).build().unwrap();
        let cp = locate_thm4(&seq, 30, &EvalConfig::default()).unwrap();
        assert!(baker1988_corrected_ratio(&cp).abs() < 0.1);
    }
}
