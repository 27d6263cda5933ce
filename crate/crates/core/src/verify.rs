//! Sampled checks that each ring is mapped into the next one.
//!
//! Every inclusion is reduced to bounds for `|f|` on the two boundary circles
//! of an annulus free of zeros, where the maximum and minimum principles
//! place the extrema. Bounds are checked on `cfg.samples` points only, so a
//! sampled margin must also exceed the largest change of `log|f|` between
//! neighbouring samples on its own circle before it counts.

use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::critical::{locate_thm2, locate_thm4};
use crate::error::{Error, Result};
use crate::evaluator::{circle_extrema, CircleExtrema, CircleRadius, EvalConfig};
use crate::families::{FamilyKind, ZeroSequence};

/// Search grid for `epsilon`, scanned from the largest value down.
pub const EPSILON_GRID: [f64; 12] = [0.50, 0.45, 0.40, 0.35, 0.30, 0.25, 0.20, 0.15, 0.10, 0.05, 0.02, 0.01];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub name: String,
    /// log units; positive means the bound holds
    pub value: f64,
    /// adjacent-sample variation of `log|f|` on the circle the value was
    /// sampled from; `None` for values not taken from samples
    pub gap: Option<f64>,
}

impl Margin {
    fn sampled(name: &str, value: f64, ext: &CircleExtrema) -> Self {
        Self {
            name: name.into(),
            value,
            gap: Some(ext.sample_gap),
        }
    }

    fn exact(name: &str, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
            gap: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingVerification {
    pub k: usize,
    pub epsilon: f64,
    pub margins: Vec<Margin>,
    pub sample_gap: f64,
    pub samples: usize,
    pub pass: bool,
    /// the circles would interleave with neighbouring zeros
    pub skipped: bool,
}

impl RingVerification {
    fn assemble(k: usize, epsilon: f64, margins: Vec<Margin>, samples: usize) -> Self {
        let pass = margins
            .iter()
            .all(|m| m.value > 0.0 && m.gap.is_none_or(|g| m.value > g));
        let gap = margins.iter().filter_map(|m| m.gap).fold(0.0, f64::max);
        Self {
            k,
            epsilon,
            margins,
            sample_gap: gap,
            samples,
            pass,
            skipped: false,
        }
    }

    fn skipped(k: usize, epsilon: f64, samples: usize) -> Self {
        Self {
            k,
            epsilon,
            margins: Vec::new(),
            sample_gap: 0.0,
            samples,
            pass: false,
            skipped: true,
        }
    }

    pub fn min_margin(&self) -> f64 {
        self.margins
            .iter()
            .map(|m| m.value)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Ring `k` of a product-recurrence family at `epsilon`: on `|z| = (1+eps) r_k`
/// `2 r_{k+1} <= |f| <= r_{k+2}/2`, on `|z| = (1-eps) r_k`
/// `2 r_k <= |f| <= r_{k+1}/2`.
pub fn verify_ring_thm4(
    seq: &ZeroSequence,
    k: usize,
    epsilon: f64,
    cfg: &EvalConfig,
) -> Result<RingVerification> {
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::invalid(format!("epsilon = {epsilon} not in (0, 1/2]")));
    }
    let lk = seq.entry(k)?.log_r;
    let next = seq.log_r(k + 1).ok_or(Error::IndexOutOfRange(k + 1))?;
    let after = seq.log_r(k + 2).ok_or(Error::IndexOutOfRange(k + 2))?;
    let inner_log_w = (1.0 - epsilon).ln();
    let outer_log_w = epsilon.ln_1p();
    let interleaves = match seq.log_r(k.wrapping_sub(1)) {
        Some(prev) => inner_log_w <= prev - lk,
        None => true,
    } || outer_log_w >= next - lk;
    if interleaves {
        return Ok(RingVerification::skipped(k, epsilon, cfg.samples));
    }
    let outer = circle_extrema(seq, &CircleRadius::new(k, outer_log_w), cfg)?;
    let inner = circle_extrema(seq, &CircleRadius::new(k, inner_log_w), cfg)?;
    let margins = vec![
        Margin::sampled("outer_lower", outer.min_rel_next() - LN_2, &outer),
        Margin::sampled("inner_upper", -LN_2 - inner.max_rel_next(), &inner),
        Margin::sampled("inner_lower", inner.min_rel_next() + (next - lk) - LN_2, &inner),
        Margin::sampled(
            "outer_upper",
            (after - next) - LN_2 - outer.max_rel_next(),
            &outer,
        ),
    ];
    Ok(RingVerification::assemble(k, epsilon, margins, cfg.samples))
}

/// Smallest grid `epsilon` at which ring `k` passes.
pub fn find_epsilon(seq: &ZeroSequence, k: usize, cfg: &EvalConfig) -> Result<Option<f64>> {
    let mut found = None;
    for &eps in &EPSILON_GRID {
        if verify_ring_thm4(seq, k, eps, cfg)?.pass {
            found = Some(eps);
        }
    }
    Ok(found)
}

/// `find_epsilon` for every `k` in the window, in order.
pub fn epsilon_sweep(
    seq: &ZeroSequence,
    ks: &[usize],
    cfg: &EvalConfig,
) -> Result<Vec<(usize, Option<f64>)>> {
    ks.par_iter()
        .map(|&k| find_epsilon(seq, k, cfg).map(|e| (k, e)))
        .collect()
}

/// Absolute `(min, max)` of `log|f|` on the circle, relative to `log r_m`.
fn extrema_rel(seq: &ZeroSequence, ext: &CircleExtrema, m: usize) -> Result<(f64, f64)> {
    let next = seq.log_r(ext.base + 1).ok_or(Error::IndexOutOfRange(ext.base + 1))?;
    let lm = seq.log_r(m).ok_or(Error::IndexOutOfRange(m))?;
    let shift = next - lm;
    Ok((ext.min_rel_next() + shift, ext.max_rel_next() + shift))
}

/// Circle bounds of the multiplicity family around ring `k`, plus the
/// position of `c_k` and the size of `f(c_k)`. All logs here are exact
/// integers or half-integers: `log a_{k+1} = q_k`.
pub fn verify_thm2(seq: &ZeroSequence, k: usize, cfg: &EvalConfig) -> Result<RingVerification> {
    if seq.kind() != Some(FamilyKind::Theorem2) {
        return Err(Error::invalid("verify_thm2 needs the theorem2 family"));
    }
    if k == 0 {
        // sqrt(a_1) = a_0: the circle would run through a zero
        return Ok(RingVerification::skipped(k, 0.0, cfg.samples));
    }
    let log4 = 4f64.ln();
    let la_next = seq.entry(k + 1)?.log_r;
    let la_after = seq.log_r(k + 2).ok_or(Error::IndexOutOfRange(k + 2))?;

    let four_a = circle_extrema(seq, &CircleRadius::new(k, log4), cfg)?;
    let quarter_next = circle_extrema(seq, &CircleRadius::new(k + 1, -log4), cfg)?;
    let root_next = circle_extrema(seq, &CircleRadius::new(k + 1, -la_next / 2.0), cfg)?;
    // relative to a_{k+2}; the lower bound is compared with a_{k+1} directly
    let (_, four_max) = extrema_rel(seq, &four_a, k + 2)?;
    let (_, quarter_max) = extrema_rel(seq, &quarter_next, k + 2)?;
    let (_, root_max) = extrema_rel(seq, &root_next, k + 2)?;

    let mut margins = vec![
        Margin::sampled("four_a_lower", four_a.min_rel_next() - log4, &four_a),
        Margin::sampled("quarter_next_upper", -log4 - quarter_max, &quarter_next),
        Margin::sampled("four_a_upper", -log4 - four_max, &four_a),
        Margin::sampled("root_next_upper", -la_after / 2.0 - root_max, &root_next),
    ];
    match locate_thm2(seq, k, cfg) {
        Ok(cp) => {
            let q = seq.entry(k)?.mult_f64();
            let q_next = seq.entry(k + 1)?.mult_f64();
            let lw = cp.w.re.ln();
            let lx = (q / (2.0 * q_next)).ln();
            let ly = (2.0 * q / q_next).ln();
            margins.push(Margin::exact("critical_in_bracket", (lw - lx).min(ly - lw)));
            // log f(c_k) - log a_{k+2}
            let fc = cp.ratio_next - (la_after - la_next);
            margins.push(Margin::exact(
                "critical_value_window",
                (fc + la_after / 2.0).min(-log4 - fc),
            ));
        }
        Err(Error::BracketFailed { gx, gy, .. }) => {
            margins.push(Margin::exact("critical_in_bracket", gx.min(-gy)));
        }
        Err(e) => return Err(e),
    }
    Ok(RingVerification::assemble(k, 0.0, margins, cfg.samples))
}

/// Baker 1988: `f(B_k) ⊂ B_{k+1}` with `B_k = ann(r_k^2, s_k)`,
/// `s_k = (k+1)/(k+2) r_{k+1}`; also `c_{k+1} ∈ (-s_k, -r_k^2)`, the growth
/// `r_{k+1} >= 2^k r_k^2` and `|f(c_{k+1})| > r_{k+1}^2`.
pub fn verify_baker1988(seq: &ZeroSequence, k: usize, cfg: &EvalConfig) -> Result<RingVerification> {
    if seq.kind() != Some(FamilyKind::Baker1988) {
        return Err(Error::invalid("verify_baker1988 needs the baker1988 family"));
    }
    let kf = k as f64;
    let lk = seq.entry(k)?.log_r;
    let l1 = seq.entry(k + 1)?.log_r;
    let l2 = seq.log_r(k + 2).ok_or(Error::IndexOutOfRange(k + 2))?;
    let log_s_rel = ((kf + 1.0) / (kf + 2.0)).ln();
    let log_s_next_rel = ((kf + 2.0) / (kf + 3.0)).ln();

    let inner = circle_extrema(seq, &CircleRadius::from_log_radius(seq, 2.0 * lk), cfg)?;
    let outer = circle_extrema(seq, &CircleRadius::new(k + 1, log_s_rel), cfg)?;
    // relative to r_{k+2}
    let (in_min, in_max) = extrema_rel(seq, &inner, k + 2)?;
    let (out_min, out_max) = extrema_rel(seq, &outer, k + 2)?;
    // log r_{k+1}^2 - log r_{k+2}
    let lower = 2.0 * l1 - l2;

    let mut margins = vec![
        Margin::sampled("inner_lower", in_min - lower, &inner),
        Margin::sampled("outer_lower", out_min - lower, &outer),
        Margin::sampled("inner_upper", log_s_next_rel - in_max, &inner),
        Margin::sampled("outer_upper", log_s_next_rel - out_max, &outer),
        Margin::exact("growth", l1 - 2.0 * lk - kf * LN_2),
    ];
    let cp = locate_thm4(seq, k + 1, cfg)?;
    let lw = cp.w.norm().ln();
    margins.push(Margin::exact(
        "critical_in_ring",
        (lw - (2.0 * lk - l1)).min(log_s_rel - lw),
    ));
    margins.push(Margin::exact("critical_value_lower", cp.ratio_next - lower));
    Ok(RingVerification::assemble(k, 0.0, margins, cfg.samples))
}

/// CSV rows `k,epsilon,min_margin,pass`.
pub fn to_csv(records: &[RingVerification]) -> String {
    let mut s = String::from("k,epsilon,min_margin,pass\n");
    for r in records {
        s.push_str(&format!("{},{},{},{}\n", r.k, r.epsilon, r.min_margin(), r.pass));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::FamilySpec;
    use std::f64::consts::E;

    fn baker(k_max: usize) -> ZeroSequence {
        FamilySpec::baker1976(1.0 / (4.0 * E), 11.0, k_max).build().unwrap()
    }

    #[test]
    fn baker_k25_passes_at_03() {
        let seq = baker(40);
        let v = verify_ring_thm4(&seq, 25, 0.3, &EvalConfig::default()).unwrap();
        assert!(v.pass, "{v:?}");
    }

    #[test]
    fn epsilon_above_half_rejected() {
        let seq = baker(40);
        assert!(matches!(
            verify_ring_thm4(&seq, 25, 0.6, &EvalConfig::default()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn first_ring_does_not_pass() {
        let seq = baker(40);
        let v = verify_ring_thm4(&seq, 1, 0.3, &EvalConfig::default()).unwrap();
        assert!(!v.pass);
    }

    #[test]
    fn found_epsilon_survives_more_samples() {
        let seq = baker(40);
        let cfg = EvalConfig::default();
        let eps = find_epsilon(&seq, 30, &cfg).unwrap().expect("epsilon found");
        let v = verify_ring_thm4(&seq, 30, eps, &cfg.with_samples(4 * cfg.samples)).unwrap();
        assert!(v.pass);
    }

    #[test]
    fn multiplicity_family_q0_100_passes() {
        let seq = FamilySpec::theorem2(100, 7).build().unwrap();
        let v = verify_thm2(&seq, 2, &EvalConfig::default()).unwrap();
        assert!(v.pass, "{v:?}");
    }

    #[test]
    fn multiplicity_family_small_q0_fails_somewhere() {
        let seq = FamilySpec::theorem2(4, 6).build().unwrap();
        let cfg = EvalConfig::default();
        let any_fail = (0..3).any(|k| !verify_thm2(&seq, k, &cfg).unwrap().pass);
        assert!(any_fail);
    }

    #[test]
    fn baker1988_mid_range_passes() {
        let seq = FamilySpec::baker1988(0.03, 2.0, 40).build().unwrap();
        let v = verify_baker1988(&seq, 20, &EvalConfig::default()).unwrap();
        assert!(v.pass, "{v:?}");
    }
}
