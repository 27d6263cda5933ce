//! Evaluation of `f`, its logarithmic derivative, circle extrema and
//! argument-principle zero counts.
//!
//! Points are written `z = w a_b` for a base zero `a_b`. The value of `f` is
//! returned as `log f(z) = L_b + rho`, where `L_b` is the dominant part
//! described in [`crate::families`]; the factors with `j < b` contribute
//! `log w + i(theta_b - theta_j + pi) + log(1 - a_j/(w a_b))` to `rho`, so the
//! huge terms `log r_b - log r_j` cancel exactly against `L_b`.

use std::f64::consts::{PI, TAU};

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::ZeroSequence;
use crate::logspace::{normalize_arg, LogComplex};

/// `|log u|` beyond which `u/(u - 1)` is expanded around 0 or infinity.
const LOGDERIV_SWITCH: f64 = 35.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// tail factors with `|z/a_j| < tail_tol` are dropped
    pub tail_tol: f64,
    /// circle sampling count
    pub samples: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            tail_tol: 1e-12,
            samples: 4096,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tail_tol > 0.0 && self.tail_tol <= 1e-6) {
            return Err(Error::invalid(format!("tail_tol = {} not in (0, 1e-6]", self.tail_tol)));
        }
        if self.samples < 256 || !self.samples.is_power_of_two() {
            return Err(Error::invalid(format!(
                "samples = {} must be a power of two >= 256",
                self.samples
            )));
        }
        Ok(())
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }
}

/// The point `z = w a_base`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledPoint {
    pub base: usize,
    pub w: LogComplex,
}

impl ScaledPoint {
    pub fn new(seq: &ZeroSequence, base: usize, w: Complex64) -> Result<Self> {
        Self::from_log(seq, base, LogComplex::from_complex(w))
    }

    pub fn from_log(seq: &ZeroSequence, base: usize, w: LogComplex) -> Result<Self> {
        seq.entry(base)?;
        Ok(Self { base, w })
    }

    /// Places an absolute point relative to the zero closest in log-modulus.
    pub fn from_absolute(seq: &ZeroSequence, z: LogComplex) -> Result<Self> {
        if z.is_zero() {
            return Ok(Self {
                base: seq.first_index(),
                w: LogComplex::ZERO,
            });
        }
        let base = seq.nearest_index(z.log_mod());
        let e = seq.entry(base)?;
        let w = LogComplex::new(z.log_mod() - e.log_r, z.arg() - e.theta)?;
        Self { base, w }.checked(seq)
    }

    /// Moves the base to the zero nearest in log-modulus. Points at or beyond
    /// the radius following the last zero cannot be evaluated faithfully and
    /// are rejected.
    pub fn rebased(self, seq: &ZeroSequence) -> Result<Self> {
        if self.w.is_zero() {
            return Ok(Self {
                base: seq.first_index(),
                w: self.w,
            });
        }
        let lb = seq.entry(self.base)?.log_r;
        let absolute = lb + self.w.log_mod();
        let target = seq.nearest_index(absolute);
        if target == self.base {
            return self.checked(seq);
        }
        let e = seq.entry(target)?;
        let theta_b = seq.entry(self.base)?.theta;
        let w = LogComplex::new(
            self.w.log_mod() + (lb - e.log_r),
            self.w.arg() + theta_b - e.theta,
        )?;
        Self { base: target, w }.checked(seq)
    }

    fn checked(self, seq: &ZeroSequence) -> Result<Self> {
        let e = seq.entry(self.base)?;
        if self.base == seq.last_index() {
            let next = seq.log_r(self.base + 1).expect("next radius");
            if self.w.log_mod() >= next - e.log_r {
                return Err(Error::Rebase(format!(
                    "|z| beyond the generated horizon (base {})",
                    self.base
                )));
            }
        }
        if !self.w.log_mod().is_finite() && !self.w.is_zero() {
            return Err(Error::Rebase("non-finite scale".into()));
        }
        Ok(self)
    }

    /// `log|z|`; loses precision once the radii are huge.
    pub fn log_abs(&self, seq: &ZeroSequence) -> f64 {
        seq.entry(self.base).map(|e| e.log_r).unwrap_or(f64::NAN) + self.w.log_mod()
    }

    pub fn to_absolute(&self, seq: &ZeroSequence) -> Result<LogComplex> {
        let e = seq.entry(self.base)?;
        self.w.mul(e.point())
    }
}

/// `log f(z) = L_base + rho`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FValue {
    pub base: usize,
    pub rho: Complex64,
    /// bound on `|rho|` error from the dropped tail factors
    pub tail_bound: f64,
}

impl FValue {
    pub fn is_zero(&self) -> bool {
        self.rho.re == f64::NEG_INFINITY
    }

    pub fn arg(&self) -> f64 {
        self.rho.im
    }

    /// `log|f| - log r_{base+1}`, accurate at any scale.
    pub fn log_rel_next(&self, seq: &ZeroSequence) -> f64 {
        self.rho.re - seq.sigma(self.base).expect("base index")
    }

    /// `log|f| - log r_m`.
    pub fn log_rel(&self, seq: &ZeroSequence, m: usize) -> Option<f64> {
        let next = seq.log_r(self.base + 1)?;
        let lm = seq.log_r(m)?;
        Some(self.log_rel_next(seq) + (next - lm))
    }

    pub fn log_abs(&self, seq: &ZeroSequence) -> f64 {
        seq.log_r(self.base + 1).expect("next radius") + self.log_rel_next(seq)
    }

    pub fn to_log_complex(&self, seq: &ZeroSequence) -> Result<LogComplex> {
        LogComplex::new(self.log_abs(seq), self.arg())
    }

    /// `f(z)` as a point for the next evaluation of an orbit.
    pub fn to_point(&self, seq: &ZeroSequence) -> Result<ScaledPoint> {
        if self.is_zero() {
            return Ok(ScaledPoint {
                base: seq.first_index(),
                w: LogComplex::ZERO,
            });
        }
        let rel = self.log_rel_next(seq);
        let next = self.base + 1;
        match seq.entry(next) {
            Ok(e) => ScaledPoint {
                base: next,
                w: LogComplex::new(rel, self.arg() - e.theta)?,
            }
            .rebased(seq),
            Err(_) => Err(Error::Rebase("value beyond the generated horizon".into())),
        }
    }
}

/// Evaluates `f` at `z = w a_b`.
pub fn eval_f(seq: &ZeroSequence, p: &ScaledPoint, cfg: &EvalConfig) -> Result<FValue> {
    eval_f_truncated(seq, p, cfg, None)
}

/// Same as [`eval_f`], optionally keeping at most `max_tail` factors past the
/// base before truncation.
pub fn eval_f_truncated(
    seq: &ZeroSequence,
    p: &ScaledPoint,
    cfg: &EvalConfig,
    max_tail: Option<usize>,
) -> Result<FValue> {
    let p = if p.w.is_zero() && p.base != seq.first_index() {
        ScaledPoint {
            base: seq.first_index(),
            w: p.w,
        }
    } else {
        *p
    };
    let b = p.base;
    let eb = seq.entry(b)?;
    let w = p.w;
    let n = f64::from(seq.origin_mult());
    let log_tol = cfg.tail_tol.ln();

    let mut re = 0.0;
    let mut im = seq.constant().arg();
    if seq.origin_mult() > 0 {
        re += n * w.log_mod();
        im += normalize_arg(n * (w.arg() + eb.theta));
    }
    let mut tail_bound = 0.0;
    let mut kept_tail = 0usize;
    for e in seq.entries() {
        let m = e.mult_f64();
        if e.k < b {
            // log(1 - u) = log(-u) + log(1 - 1/u), u = w a_b / a_j
            let inv_u = LogComplex::new(
                -w.log_mod() - (eb.log_r - e.log_r),
                -(w.arg() + eb.theta - e.theta),
            )?;
            let corr = inv_u.one_minus();
            re += m * (w.log_mod() + corr.log_mod());
            im += normalize_arg(m * (w.arg() + eb.theta - e.theta + PI + corr.arg()));
        } else if e.k == b {
            let f = w.one_minus();
            if f.is_zero() {
                return Ok(FValue {
                    base: b,
                    rho: Complex64::new(f64::NEG_INFINITY, 0.0),
                    tail_bound: 0.0,
                });
            }
            re += m * f.log_mod();
            im += normalize_arg(m * f.arg());
        } else {
            let log_u = w.log_mod() - (e.log_r - eb.log_r);
            let beyond = max_tail.is_some_and(|t| kept_tail >= t);
            if log_u < log_tol || beyond {
                // |log(1 - u)| <= 2|u| for |u| <= 1/2
                let t = 2.0 * m * log_u.exp();
                tail_bound += t;
                if t == 0.0 {
                    break;
                }
                continue;
            }
            kept_tail += 1;
            let u = LogComplex::new(log_u, w.arg() + eb.theta - e.theta)?;
            let f = u.one_minus();
            if f.is_zero() {
                return Ok(FValue {
                    base: b,
                    rho: Complex64::new(f64::NEG_INFINITY, 0.0),
                    tail_bound: 0.0,
                });
            }
            re += m * f.log_mod();
            im += normalize_arg(m * f.arg());
        }
    }
    if re == f64::NEG_INFINITY {
        im = 0.0;
    }
    if re.is_nan() {
        return Err(Error::overflow("log f is not a number"));
    }
    Ok(FValue {
        base: b,
        rho: Complex64::new(re, normalize_arg(im)),
        tail_bound,
    })
}

/// `u / (u - 1)` and `-u / (u - 1)^2` for `u` in log form.
fn logderiv_term(u: LogComplex, k: usize) -> Result<(Complex64, Complex64)> {
    let l = u.log_mod();
    if l > LOGDERIV_SWITCH {
        let v = u.recip()?.to_complex();
        let one_minus_v = Complex64::new(1.0, 0.0) - v;
        Ok((Complex64::new(1.0, 0.0) + v / one_minus_v, -v / (one_minus_v * one_minus_v)))
    } else if l < -LOGDERIV_SWITCH {
        let uc = u.to_complex();
        let one_minus_u = Complex64::new(1.0, 0.0) - uc;
        Ok((-uc / one_minus_u, -uc / (one_minus_u * one_minus_u)))
    } else {
        let uc = u.to_complex();
        let d = uc - Complex64::new(1.0, 0.0);
        if d.norm() < 1e-14 * uc.norm().max(1.0) {
            return Err(Error::Pole(k));
        }
        Ok((uc / d, -uc / (d * d)))
    }
}

/// Logarithmic derivative data at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogDeriv {
    /// `z f'(z) / f(z)`
    pub value: Complex64,
    /// `w d/dw (z f'/f)` along `z = w a_b`
    pub w_derivative: Complex64,
    /// `N + sum_j q_j |z/(z - a_j)|`, the size of the terms being cancelled
    pub scale: f64,
}

/// `z f'(z)/f(z) = N + sum_j q_j z/(z - a_j)`.
pub fn eval_logderiv(seq: &ZeroSequence, p: &ScaledPoint, cfg: &EvalConfig) -> Result<Complex64> {
    Ok(logderiv_full(seq, p, cfg)?.value)
}

pub fn logderiv_full(seq: &ZeroSequence, p: &ScaledPoint, cfg: &EvalConfig) -> Result<LogDeriv> {
    let eb = seq.entry(p.base)?;
    let w = p.w;
    let n = f64::from(seq.origin_mult());
    let log_tol = cfg.tail_tol.ln();
    let mut value = Complex64::new(n, 0.0);
    let mut w_derivative = Complex64::new(0.0, 0.0);
    let mut scale = n;
    for e in seq.entries() {
        let log_u = w.log_mod() + (eb.log_r - e.log_r);
        if e.k > p.base && log_u < log_tol {
            break;
        }
        let u = LogComplex::new(log_u, w.arg() + eb.theta - e.theta)?;
        let (s, ds) = logderiv_term(u, e.k)?;
        let m = e.mult_f64();
        value += m * s;
        w_derivative += m * ds;
        scale += m * s.norm();
    }
    Ok(LogDeriv {
        value,
        w_derivative,
        scale,
    })
}

/// Circle `|z| = |w| r_base`, sampled starting in the direction of `a_base`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleRadius {
    pub base: usize,
    pub log_w: f64,
}

impl CircleRadius {
    pub fn new(base: usize, log_w: f64) -> Self {
        Self { base, log_w }
    }

    pub fn from_log_radius(seq: &ZeroSequence, log_radius: f64) -> Self {
        let base = seq.nearest_index(log_radius);
        let lb = seq.log_r(base).expect("nearest index exists");
        Self {
            base,
            log_w: log_radius - lb,
        }
    }

    fn point(&self, phi: f64) -> ScaledPoint {
        ScaledPoint {
            base: self.base,
            w: LogComplex::new(self.log_w, phi).expect("finite radius"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleExtrema {
    pub base: usize,
    /// minimum of `log|f| - L_base` over the samples
    pub min_rho: f64,
    pub max_rho: f64,
    /// `sigma_base`, so that `min_rho - sigma` is `min log|f| - log r_{base+1}`
    pub sigma: f64,
    /// largest change of `log|f|` between adjacent samples
    pub sample_gap: f64,
    pub samples: usize,
}

impl CircleExtrema {
    pub fn min_rel_next(&self) -> f64 {
        self.min_rho - self.sigma
    }

    pub fn max_rel_next(&self) -> f64 {
        self.max_rho - self.sigma
    }

    /// Absolute `(min, max)` of `log|f|`.
    pub fn min_max_log(&self, seq: &ZeroSequence) -> (f64, f64) {
        let next = seq.log_r(self.base + 1).expect("next radius");
        (next + self.min_rel_next(), next + self.max_rel_next())
    }
}

/// Sampled extrema of `log|f|` on a circle centred at 0.
pub fn circle_extrema(
    seq: &ZeroSequence,
    radius: &CircleRadius,
    cfg: &EvalConfig,
) -> Result<CircleExtrema> {
    let n = cfg.samples;
    let values = (0..n)
        .into_par_iter()
        .map(|i| {
            let phi = TAU * i as f64 / n as f64;
            eval_f(seq, &radius.point(phi), cfg).map(|v| v.rho.re)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut min_rho = f64::INFINITY;
    let mut max_rho = f64::NEG_INFINITY;
    let mut gap: f64 = 0.0;
    for i in 0..n {
        let v = values[i];
        min_rho = min_rho.min(v);
        max_rho = max_rho.max(v);
        let d = (values[(i + 1) % n] - v).abs();
        gap = if d.is_nan() { f64::INFINITY } else { gap.max(d) };
    }
    Ok(CircleExtrema {
        base: radius.base,
        min_rho,
        max_rho,
        sigma: seq.sigma(radius.base)?,
        sample_gap: gap,
        samples: n,
    })
}

/// Largest sample count tried when a factor's argument moves too fast.
const MAX_COUNT_SAMPLES: usize = 1 << 20;

/// Number of zeros inside the circle by the argument principle.
///
/// The argument of `f` is `arg C + N arg z + sum_j q_j arg(1 - z/a_j)`; the
/// variation of each factor is accumulated sample to sample, with the sample
/// count doubled until no step exceeds `pi/2`. Each factor's winding must be
/// within 0.01 of an integer.
pub fn zero_count(seq: &ZeroSequence, radius: &CircleRadius, cfg: &EvalConfig) -> Result<BigUint> {
    let eb = seq.entry(radius.base)?;
    for e in seq.entries() {
        let offset = e.log_r - eb.log_r;
        if (radius.log_w - offset).abs() <= 1e-6 {
            return Err(Error::RadiusOnZero(e.k));
        }
    }
    if let Some(next) = seq.log_r(seq.last_index() + 1) {
        if radius.log_w >= next - eb.log_r {
            return Err(Error::Rebase("circle beyond the generated horizon".into()));
        }
    }

    // z^N: arg z = phi + theta_b
    let origin = factor_winding(cfg.samples, |phi| Ok(phi + eb.theta))?;
    let mut total = BigInt::from(seq.origin_mult()) * BigInt::from(origin);

    let windings = seq
        .entries()
        .par_iter()
        .map(|e| {
            let offset = eb.log_r - e.log_r;
            let dtheta = eb.theta - e.theta;
            factor_winding(cfg.samples, |phi| {
                let u = LogComplex::new(radius.log_w + offset, phi + dtheta)?;
                Ok(u.one_minus().arg())
            })
        })
        .collect::<Result<Vec<i64>>>()?;
    for (e, wnd) in seq.entries().iter().zip(windings) {
        total += BigInt::from(e.mult.clone()) * BigInt::from(wnd);
    }
    if total.is_negative() {
        return Err(Error::CountUnreliable { residual: f64::INFINITY });
    }
    Ok(total.to_biguint().expect("non-negative"))
}

/// Winding of a sampled angle function around the full circle.
fn factor_winding(start_samples: usize, angle: impl Fn(f64) -> Result<f64>) -> Result<i64> {
    let mut n = start_samples;
    loop {
        let mut total = 0.0;
        let mut prev = angle(0.0)?;
        let mut ok = true;
        for i in 1..=n {
            let phi = TAU * i as f64 / n as f64;
            let cur = angle(phi)?;
            let step = normalize_arg(cur - prev);
            if step.abs() > PI / 2.0 {
                ok = false;
                break;
            }
            total += step;
            prev = cur;
        }
        if ok {
            let turns = total / TAU;
            let rounded = turns.round();
            let residual = (turns - rounded).abs();
            if residual >= 0.01 {
                return Err(Error::CountUnreliable { residual });
            }
            return rounded
                .to_i64()
                .ok_or(Error::CountUnreliable { residual: f64::INFINITY });
        }
        if n >= MAX_COUNT_SAMPLES {
            return Err(Error::CountUnreliable { residual: f64::INFINITY });
        }
        n *= 2;
    }
}
