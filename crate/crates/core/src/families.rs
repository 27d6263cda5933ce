//! Zero sequences of the four product families, generated in log space.
//!
//! Every family is an entire function `f(z) = C z^N prod (1 - z/a_k)^{q_k}`
//! and is fully described by the list `(log r_k, theta_k, q_k)`.
//!
//! Besides the raw radii the sequence stores, for each index `k`, the
//! *excess* `sigma_k` defined by
//!
//! ```text
//! log r_{k+1} = L_k + sigma_k,
//! L_k = log|C| + N log r_k + sum_{j<k} q_j (log r_k - log r_j).
//! ```
//!
//! `L_k` is the dominant part of `log|f|` near `|z| = r_k` and is never
//! formed numerically. For families defined by a product recurrence
//! `sigma_k` is obtained from the recurrence itself, so `log|f(z)| - log r_{k+1}`
//! stays accurate even when `log r_k` is around `1e100`.

use std::f64::consts::{LN_2, PI};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logspace::LogComplex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Theorem4,
    Theorem2,
    Baker1976,
    Baker1988,
}

impl FamilyKind {
    /// Families whose radii obey `r_{k+1} = P_k r_k^N prod_{j<=k}(1 + r_k/r_j)`.
    pub fn has_p_sequence(self) -> bool {
        matches!(self, FamilyKind::Theorem4 | FamilyKind::Baker1976)
    }
}

/// Rule for the sequence `P_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum PRule {
    Constant { c: f64 },
    /// `P_k = c / k`
    Harmonic { c: f64 },
    /// `P_k = c k^s`
    Power { c: f64, s: f64 },
    /// `P_k = values[k - 1]`
    Table { values: Vec<f64> },
}

impl PRule {
    pub fn value(&self, k: usize) -> Result<f64> {
        let kf = k as f64;
        let p = match self {
            PRule::Constant { c } => *c,
            PRule::Harmonic { c } => c / kf,
            PRule::Power { c, s } => c * kf.powf(*s),
            PRule::Table { values } => *values
                .get(k.wrapping_sub(1))
                .ok_or_else(|| Error::invalid(format!("P table has no entry for k = {k}")))?,
        };
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::invalid(format!("P_{k} = {p} is not a positive finite number")));
        }
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum PhaseRule {
    /// zeros on the negative real axis
    AllPi,
    AllZero,
    Table { values: Vec<f64> },
}

impl PhaseRule {
    fn value(&self, k: usize, first_index: usize) -> Result<f64> {
        match self {
            PhaseRule::AllPi => Ok(PI),
            PhaseRule::AllZero => Ok(0.0),
            PhaseRule::Table { values } => values
                .get(k - first_index)
                .copied()
                .ok_or_else(|| Error::invalid(format!("phase table has no entry for k = {k}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    /// multiplicity of the zero at the origin
    pub origin_mult: u32,
    pub constant: LogComplex,
    pub p_rule: Option<PRule>,
    pub phase_rule: PhaseRule,
    pub r1: Option<f64>,
    pub q0: Option<u64>,
    pub k_max: usize,
}

impl FamilySpec {
    /// Baker's 1976 example: `N = 2`, `P_k = C`, zeros at `-r_k`.
    pub fn baker1976(c: f64, r1: f64, k_max: usize) -> Self {
        Self {
            kind: FamilyKind::Baker1976,
            origin_mult: 2,
            constant: LogComplex::from_log(c.ln()).expect("finite constant"),
            p_rule: Some(PRule::Constant { c }),
            phase_rule: PhaseRule::AllPi,
            r1: Some(r1),
            q0: None,
            k_max,
        }
    }

    pub fn theorem4(
        origin_mult: u32,
        constant: LogComplex,
        p_rule: PRule,
        phase_rule: PhaseRule,
        r1: f64,
        k_max: usize,
    ) -> Self {
        Self {
            kind: FamilyKind::Theorem4,
            origin_mult,
            constant,
            p_rule: Some(p_rule),
            phase_rule,
            r1: Some(r1),
            q0: None,
            k_max,
        }
    }

    pub fn theorem2(q0: u64, k_max: usize) -> Self {
        Self {
            kind: FamilyKind::Theorem2,
            origin_mult: 2,
            constant: LogComplex::ONE,
            p_rule: None,
            phase_rule: PhaseRule::AllZero,
            r1: None,
            q0: Some(q0),
            k_max,
        }
    }

    /// Baker's 1988 example `C^2 prod (1 + z/r_k)^2`; `c` is the `C` of that
    /// formula, the stored constant is `C^2`.
    pub fn baker1988(c: f64, r1: f64, k_max: usize) -> Self {
        Self {
            kind: FamilyKind::Baker1988,
            origin_mult: 0,
            constant: LogComplex::from_log(c.ln()).expect("finite constant"),
            p_rule: None,
            phase_rule: PhaseRule::AllPi,
            r1: Some(r1),
            q0: None,
            k_max,
        }
    }

    /// `|C|` as an ordinary number.
    pub fn abs_constant(&self) -> f64 {
        self.constant.log_mod().exp()
    }

    /// Statistic `|log P_k| / k`, whose limit must be 0.
    pub fn p_root_statistic(&self, k: usize) -> Result<f64> {
        let rule = self
            .p_rule
            .as_ref()
            .ok_or_else(|| Error::invalid("family has no P sequence"))?;
        Ok(rule.value(k)?.ln().abs() / k as f64)
    }

    pub fn build(&self) -> Result<ZeroSequence> {
        match self.kind {
            FamilyKind::Theorem4 | FamilyKind::Baker1976 => build_theorem4(self),
            FamilyKind::Theorem2 => build_theorem2(self),
            FamilyKind::Baker1988 => build_baker1988(self),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroEntry {
    pub k: usize,
    pub log_r: f64,
    pub theta: f64,
    pub mult: BigUint,
    mult_f: f64,
}

impl ZeroEntry {
    pub fn new(k: usize, log_r: f64, theta: f64, mult: BigUint) -> Result<Self> {
        let mult_f = mult.to_f64().unwrap_or(f64::INFINITY);
        if !mult_f.is_finite() || mult.is_zero() {
            return Err(Error::Overflow {
                index: Some(k),
                context: "multiplicity not representable as f64".into(),
            });
        }
        if !log_r.is_finite() {
            return Err(Error::Overflow {
                index: Some(k),
                context: "log r_k exceeds f64 range".into(),
            });
        }
        Ok(Self {
            k,
            log_r,
            theta: crate::logspace::normalize_arg(theta),
            mult,
            mult_f,
        })
    }

    #[inline]
    pub fn mult_f64(&self) -> f64 {
        self.mult_f
    }

    /// `a_k` as a log-space complex number.
    pub fn point(&self) -> LogComplex {
        LogComplex::new(self.log_r, self.theta).expect("finite log_r")
    }
}

#[derive(Clone, Debug)]
pub struct ZeroSequence {
    entries: Vec<ZeroEntry>,
    first_index: usize,
    origin_mult: u32,
    constant: LogComplex,
    next_log_r: f64,
    sigma: Vec<f64>,
    log_p: Vec<f64>,
    growth_index: usize,
    family: Option<FamilySpec>,
}

impl ZeroSequence {
    /// Sequence from explicit data; `next_log_r` is the radius beyond the
    /// last zero used as the reference scale for points near it.
    pub fn custom(
        constant: LogComplex,
        origin_mult: u32,
        entries: Vec<ZeroEntry>,
        next_log_r: f64,
    ) -> Result<Self> {
        let first_index = entries.first().map(|e| e.k).ok_or_else(|| Error::invalid("no zeros"))?;
        let mut seq = Self {
            entries,
            first_index,
            origin_mult,
            constant,
            next_log_r,
            sigma: Vec::new(),
            log_p: Vec::new(),
            growth_index: first_index,
            family: None,
        };
        seq.check_monotone()?;
        seq.sigma = (0..seq.entries.len()).map(|i| seq.numeric_sigma(i)).collect();
        seq.growth_index = seq.compute_growth_index();
        Ok(seq)
    }

    pub fn entries(&self) -> &[ZeroEntry] {
        &self.entries
    }

    pub fn first_index(&self) -> usize {
        self.first_index
    }

    pub fn last_index(&self) -> usize {
        self.first_index + self.entries.len() - 1
    }

    pub fn origin_mult(&self) -> u32 {
        self.origin_mult
    }

    pub fn constant(&self) -> LogComplex {
        self.constant
    }

    pub fn family(&self) -> Option<&FamilySpec> {
        self.family.as_ref()
    }

    pub fn kind(&self) -> Option<FamilyKind> {
        self.family.as_ref().map(|f| f.kind)
    }

    /// First index from which `r_{k+1} >= 2 r_k` holds on the whole window.
    pub fn growth_index(&self) -> usize {
        self.growth_index
    }

    pub fn entry(&self, k: usize) -> Result<&ZeroEntry> {
        k.checked_sub(self.first_index)
            .and_then(|i| self.entries.get(i))
            .ok_or(Error::IndexOutOfRange(k))
    }

    /// `log r_k`, including the radius one past the last zero.
    pub fn log_r(&self, k: usize) -> Option<f64> {
        if k == self.last_index() + 1 {
            return Some(self.next_log_r);
        }
        self.entry(k).ok().map(|e| e.log_r)
    }

    /// Excess `sigma_k` with `log r_{k+1} = L_k + sigma_k`.
    pub fn sigma(&self, k: usize) -> Result<f64> {
        self.entry(k)?;
        Ok(self.sigma[k - self.first_index])
    }

    pub fn log_p(&self, k: usize) -> Option<f64> {
        k.checked_sub(self.first_index)
            .and_then(|i| self.log_p.get(i))
            .copied()
    }

    /// `N + sum_{j <= k} q_j`.
    pub fn mult_sum_through(&self, k: usize) -> BigUint {
        let mut total = BigUint::from(self.origin_mult);
        for e in self.entries.iter().take_while(|e| e.k <= k) {
            total += &e.mult;
        }
        total
    }

    /// Zeros of `f` (with multiplicity) strictly inside `|z| = exp(log_radius)`.
    pub fn count_inside(&self, log_radius: f64) -> BigUint {
        let mut total = BigUint::from(self.origin_mult);
        for e in self.entries.iter().filter(|e| e.log_r < log_radius) {
            total += &e.mult;
        }
        total
    }

    /// Index of the zero whose circle is closest to `log_radius` in log scale.
    pub fn nearest_index(&self, log_radius: f64) -> usize {
        let pos = self.entries.partition_point(|e| e.log_r <= log_radius);
        let cand = |i: usize| (self.entries[i].log_r - log_radius).abs();
        let i = match pos {
            0 => 0,
            p if p == self.entries.len() => p - 1,
            p => {
                if cand(p - 1) <= cand(p) {
                    p - 1
                } else {
                    p
                }
            }
        };
        self.entries[i].k
    }

    /// Relative residuals of the defining recurrence, recomputed by summing
    /// the product in reverse order. Empty for families without one.
    pub fn recurrence_residuals(&self) -> Vec<(usize, f64)> {
        let Some(spec) = &self.family else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for i in 0..self.entries.len() {
            let k = self.entries[i].k;
            let lk = self.entries[i].log_r;
            let recomputed = match spec.kind {
                FamilyKind::Theorem4 | FamilyKind::Baker1976 => {
                    let mut s = 0.0;
                    for e in self.entries[..=i].iter().rev() {
                        s += log1p_ratio(lk, e.log_r);
                    }
                    self.log_p[i] + f64::from(self.origin_mult) * lk + s
                }
                FamilyKind::Baker1988 if k >= self.growth_anchor() => {
                    let mut s = 0.0;
                    for e in self.entries[..=i].iter().rev() {
                        s += log1p_ratio(lk, e.log_r);
                    }
                    2.0 * (spec.constant.log_mod() + s)
                }
                _ => continue,
            };
            let stored = self.log_r(k + 1).expect("next radius");
            out.push((k, (stored - recomputed).abs() / stored.abs().max(1.0)));
        }
        out
    }

    /// First index at which the Baker 1988 recurrence takes over.
    fn growth_anchor(&self) -> usize {
        self.family
            .as_ref()
            .filter(|f| f.kind == FamilyKind::Baker1988)
            .map(|f| baker1988_k0(f.abs_constant(), f.r1.unwrap_or(2.0)))
            .unwrap_or(self.first_index)
    }

    /// Writes `k,log_r,theta,mult` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,log_r,theta,mult\n");
        for e in &self.entries {
            s.push_str(&format!("{},{},{},{}\n", e.k, e.log_r, e.theta, e.mult));
        }
        s
    }

    fn check_monotone(&self) -> Result<()> {
        for w in self.entries.windows(2) {
            if w[1].log_r <= w[0].log_r {
                return Err(Error::invalid(format!(
                    "radii not strictly increasing: r_{} <= r_{}",
                    w[1].k, w[0].k
                )));
            }
        }
        if let Some(last) = self.entries.last() {
            if self.next_log_r <= last.log_r {
                return Err(Error::invalid(format!(
                    "radii not strictly increasing: r_{} <= r_{}",
                    last.k + 1,
                    last.k
                )));
            }
        }
        Ok(())
    }

    fn compute_growth_index(&self) -> usize {
        let mut radii: Vec<(usize, f64)> = self.entries.iter().map(|e| (e.k, e.log_r)).collect();
        radii.push((self.last_index() + 1, self.next_log_r));
        let mut k0 = self.first_index;
        for w in radii.windows(2) {
            if w[1].1 - w[0].1 < LN_2 - 1e-12 {
                k0 = w[1].0;
            }
        }
        k0
    }

    /// `log r_{k+1} - L_k` computed directly; exact only while the radii are
    /// of moderate size.
    fn numeric_sigma(&self, i: usize) -> f64 {
        let e = &self.entries[i];
        let next = self.entries.get(i + 1).map(|n| n.log_r).unwrap_or(self.next_log_r);
        let mut dominant = self.constant.log_mod() + f64::from(self.origin_mult) * e.log_r;
        for p in &self.entries[..i] {
            dominant += p.mult_f64() * (e.log_r - p.log_r);
        }
        next - dominant
    }
}

/// `log(1 + r_k/r_j)` from the two logs, as `(log r_k - log r_j) + log1p(r_j/r_k)`.
#[inline]
fn log1p_ratio(log_rk: f64, log_rj: f64) -> f64 {
    let d = log_rk - log_rj;
    d + (-d).exp().ln_1p()
}

fn required_r1(spec: &FamilySpec) -> Result<f64> {
    match spec.r1 {
        Some(r1) if r1 > 1.0 && r1.is_finite() => Ok(r1),
        Some(r1) => Err(Error::invalid(format!("r1 = {r1} must exceed 1"))),
        None => Err(Error::invalid("r1 is required")),
    }
}

fn overflow_at(k: usize) -> Error {
    Error::Overflow {
        index: Some(k),
        context: "log r_k exceeds f64 range".into(),
    }
}

/// Radii from `r_{k+1} = P_k r_k^N prod_{j<=k}(1 + r_k/r_j)`; also used for
/// Baker's 1976 example.
pub fn build_theorem4(spec: &FamilySpec) -> Result<ZeroSequence> {
    if !spec.kind.has_p_sequence() {
        return Err(Error::invalid("build_theorem4 needs a theorem4 or baker1976 spec"));
    }
    let r1 = required_r1(spec)?;
    let rule = spec
        .p_rule
        .as_ref()
        .ok_or_else(|| Error::invalid("p_rule is required"))?;
    if spec.constant.is_zero() {
        return Err(Error::invalid("C must be nonzero"));
    }
    if spec.k_max < 2 {
        return Err(Error::invalid("k_max must be at least 2"));
    }
    let n = f64::from(spec.origin_mult);
    if spec.kind == FamilyKind::Baker1976 {
        let c = spec.abs_constant();
        let p_is_c = matches!(rule, PRule::Constant { c: p } if (p - c).abs() <= 1e-15 * c);
        if spec.origin_mult != 2 || !p_is_c || spec.constant.arg() != 0.0 {
            return Err(Error::invalid("baker1976 requires N = 2, real C > 0 and P_k = C"));
        }
        if !(c * (2.0 / r1).exp() < 0.25 && c * r1 > 1.0) {
            return Err(Error::invalid(format!(
                "baker1976 seeds violate C exp(2/r1) < 1/4, C r1 > 1 (C = {c}, r1 = {r1})"
            )));
        }
    }
    check_p_trend(spec)?;

    let log_c = spec.constant.log_mod();
    let mut log_r: Vec<f64> = vec![r1.ln()];
    let mut log_p = Vec::with_capacity(spec.k_max);
    let mut sigma = Vec::with_capacity(spec.k_max);
    for k in 1..=spec.k_max {
        let lk = log_r[k - 1];
        let lp = rule.value(k)?.ln();
        let mut dominant_sum = 0.0;
        let mut small_sum = 0.0;
        for &lj in &log_r[..k - 1] {
            let d = lk - lj;
            dominant_sum += d;
            small_sum += (-d).exp().ln_1p();
        }
        // j = k contributes log 2
        let next = lp + n * lk + dominant_sum + small_sum + LN_2;
        if !next.is_finite() {
            return Err(overflow_at(k + 1));
        }
        log_p.push(lp);
        sigma.push(lp - log_c + small_sum + LN_2);
        log_r.push(next);
    }
    let next_log_r = log_r.pop().expect("k_max >= 2");
    let entries = log_r
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let k = i + 1;
            ZeroEntry::new(k, l, spec.phase_rule.value(k, 1)?, BigUint::from(1u32))
        })
        .collect::<Result<Vec<_>>>()?;
    finish(spec, entries, 1, spec.constant, next_log_r, sigma, log_p)
}

fn check_p_trend(spec: &FamilySpec) -> Result<()> {
    let hi = spec.k_max;
    let mid = (hi / 2).max(1);
    let s_mid = spec.p_root_statistic(mid)?;
    let s_hi = spec.p_root_statistic(hi)?;
    if s_hi > s_mid + 1e-12 && s_hi > 0.05 {
        return Err(Error::invalid(format!(
            "|log P_k|/k is not tending to 0 on the window ({s_mid:.4} at k={mid}, {s_hi:.4} at k={hi})"
        )));
    }
    Ok(())
}

/// Multiplicity family: `q_{k+1} = 3 q_k^2 / 2`, `a_0 = exp(q_0/2)`,
/// `a_{k+1} = exp(q_k)`, zero `a_k` of multiplicity `q_k`, `f = z^2 prod`.
pub fn build_theorem2(spec: &FamilySpec) -> Result<ZeroSequence> {
    let q0 = spec.q0.ok_or_else(|| Error::invalid("q0 is required"))?;
    if q0 % 2 != 0 || q0 < 4 {
        return Err(Error::invalid(format!("q0 = {q0} must be even and at least 4")));
    }
    let mut q = vec![BigUint::from(q0)];
    for k in 0..spec.k_max {
        let next = (&q[k] * &q[k] * 3u32) >> 1;
        q.push(next);
    }
    let q_f = |k: usize| q[k].to_f64().filter(|v| v.is_finite());
    let mut entries = Vec::with_capacity(spec.k_max + 1);
    for k in 0..=spec.k_max {
        let log_r = if k == 0 {
            q0 as f64 / 2.0
        } else {
            q_f(k - 1).ok_or_else(|| overflow_at(k))?
        };
        q_f(k).ok_or_else(|| overflow_at(k))?;
        entries.push(ZeroEntry::new(
            k,
            log_r,
            spec.phase_rule.value(k, 0)?,
            q[k].clone(),
        )?);
    }
    let next_log_r = q_f(spec.k_max).ok_or_else(|| overflow_at(spec.k_max + 1))?;
    let mut seq = ZeroSequence {
        entries,
        first_index: 0,
        origin_mult: spec.origin_mult,
        constant: spec.constant,
        next_log_r,
        sigma: Vec::new(),
        log_p: Vec::new(),
        growth_index: 0,
        family: Some(spec.clone()),
    };
    seq.check_monotone()?;
    seq.sigma = (0..seq.entries.len()).map(|i| seq.numeric_sigma(i)).collect();
    seq.growth_index = seq.compute_growth_index();
    Ok(seq)
}

/// Smallest `k0` with `2^{k0-1} C > 2 r1`.
pub fn baker1988_k0(c: f64, r1: f64) -> usize {
    let mut k0 = 1usize;
    while 2f64.powi(k0 as i32 - 1) * c <= 2.0 * r1 {
        k0 += 1;
    }
    k0
}

/// Baker's 1988 family. Radii below `k0` follow a ratio-2 geometric preamble,
/// then `r_{k+1} = C^2 prod_{j<=k}(1 + r_k/r_j)^2`.
pub fn build_baker1988(spec: &FamilySpec) -> Result<ZeroSequence> {
    let r1 = required_r1(spec)?;
    let c = spec.abs_constant();
    let limit = 1.0 / (4.0 * std::f64::consts::E.powi(2));
    if !(c > 0.0 && c < limit) || spec.constant.arg() != 0.0 {
        return Err(Error::invalid(format!(
            "baker1988 requires 0 < C < 1/(4e^2) = {limit:.6}, got {c}"
        )));
    }
    let k0 = baker1988_k0(c, r1);
    if spec.k_max <= k0 + 1 {
        return Err(Error::invalid(format!("k_max must exceed k0 + 1 = {}", k0 + 1)));
    }
    let log_c = c.ln();
    let mut log_r = vec![r1.ln()];
    let mut sigma = Vec::with_capacity(spec.k_max);
    for k in 1..=spec.k_max {
        let lk = log_r[k - 1];
        if k < k0 {
            log_r.push(lk + LN_2);
            sigma.push(f64::NAN);
            continue;
        }
        let mut dominant_sum = 0.0;
        let mut small_sum = 0.0;
        for &lj in &log_r[..k - 1] {
            let d = lk - lj;
            dominant_sum += d;
            small_sum += (-d).exp().ln_1p();
        }
        let next = 2.0 * (log_c + dominant_sum + small_sum + LN_2);
        if !next.is_finite() {
            return Err(overflow_at(k + 1));
        }
        sigma.push(2.0 * (small_sum + LN_2));
        log_r.push(next);
    }
    let next_log_r = log_r.pop().expect("k_max >= 2");
    let entries = log_r
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let k = i + 1;
            ZeroEntry::new(k, l, spec.phase_rule.value(k, 1)?, BigUint::from(2u32))
        })
        .collect::<Result<Vec<_>>>()?;
    let constant = LogComplex::from_log(2.0 * log_c)?;
    finish(spec, entries, 1, constant, next_log_r, sigma, Vec::new())
}

fn finish(
    spec: &FamilySpec,
    entries: Vec<ZeroEntry>,
    first_index: usize,
    constant: LogComplex,
    next_log_r: f64,
    sigma: Vec<f64>,
    log_p: Vec<f64>,
) -> Result<ZeroSequence> {
    let mut seq = ZeroSequence {
        entries,
        first_index,
        origin_mult: spec.origin_mult,
        constant,
        next_log_r,
        sigma,
        log_p,
        growth_index: first_index,
        family: Some(spec.clone()),
    };
    seq.check_monotone()?;
    // preamble entries without a recurrence fall back to the direct excess
    for i in 0..seq.sigma.len() {
        if seq.sigma[i].is_nan() {
            seq.sigma[i] = seq.numeric_sigma(i);
        }
    }
    seq.growth_index = seq.compute_growth_index();
    if seq.growth_index > seq.first_index + spec.k_max / 2 {
        return Err(Error::invalid(format!(
            "r_(k+1) >= 2 r_k fails late in the window (last failure at k = {})",
            seq.growth_index - 1
        )));
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn baker1976_first_step() {
        let c = 1.0 / (4.0 * E);
        let seq = FamilySpec::baker1976(c, 11.0, 10).build().unwrap();
        // r_2 = C r_1^2 (1 + r_1/r_1) = 242 C = 22.2567...
        let expected = (2.0 * c * 121.0).ln();
        assert!((seq.log_r(2).unwrap() - expected).abs() < 1e-14);
        assert!(seq.entries().iter().all(|e| e.theta == PI));
        assert_eq!(seq.growth_index(), 1);
    }

    #[test]
    fn product_family_stalling_radius_rejected() {
        let spec = FamilySpec::theorem4(
            0,
            LogComplex::ONE,
            PRule::Constant { c: 1.0 },
            PhaseRule::AllPi,
            2.0,
            10,
        );
        assert!(matches!(spec.build(), Err(Error::Validation(_))));
    }

    #[test]
    fn overflow_names_index() {
        let c = 1.0 / (4.0 * E);
        match FamilySpec::baker1976(c, 11.0, 400).build() {
            Err(Error::Overflow { index: Some(k), .. }) => assert!(k > 100 && k < 200, "k = {k}"),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn multiplicity_family_first_terms() {
        let seq = FamilySpec::theorem2(4, 3).build().unwrap();
        assert_eq!(seq.first_index(), 0);
        assert_eq!(seq.log_r(0), Some(2.0));
        assert_eq!(seq.log_r(1), Some(4.0));
        assert_eq!(seq.entry(1).unwrap().mult, BigUint::from(24u32));

        let seq = FamilySpec::theorem2(100, 3).build().unwrap();
        assert_eq!(seq.entry(1).unwrap().mult, BigUint::from(15_000u32));
        assert_eq!(seq.entry(2).unwrap().mult, BigUint::from(337_500_000u64));
    }

    #[test]
    fn multiplicity_family_odd_rejected() {
        assert!(matches!(FamilySpec::theorem2(5, 3).build(), Err(Error::Validation(_))));
    }

    #[test]
    fn multiplicity_family_overflow_horizon() {
        assert!(FamilySpec::theorem2(100, 7).build().is_ok());
        assert!(matches!(
            FamilySpec::theorem2(100, 8).build(),
            Err(Error::Overflow { index: Some(8), .. })
        ));
    }

    #[test]
    fn baker1988_preamble_length() {
        assert_eq!(baker1988_k0(0.03, 2.0), 9);
        let seq = FamilySpec::baker1988(0.03, 2.0, 14).build().unwrap();
        for k in 1..9 {
            let d = seq.log_r(k + 1).unwrap() - seq.log_r(k).unwrap();
            assert!((d - LN_2).abs() < 1e-12);
        }
    }

    #[test]
    fn baker1988_constant_limit() {
        assert!(matches!(
            FamilySpec::baker1988(0.1, 2.0, 20).build(),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn sigma_matches_direct_difference_for_small_radii() {
        let c = 1.0 / (4.0 * E);
        let seq = FamilySpec::baker1976(c, 11.0, 12).build().unwrap();
        for k in 1..6 {
            let direct = seq.numeric_sigma(k - 1);
            assert!((seq.sigma(k).unwrap() - direct).abs() < 1e-9, "k = {k}");
        }
    }

    #[test]
    fn recurrence_residuals_small() {
        let c = 1.0 / (4.0 * E);
        let seq = FamilySpec::baker1976(c, 11.0, 80).build().unwrap();
        for (k, r) in seq.recurrence_residuals() {
            assert!(r <= 1e-9, "k = {k}, residual {r}");
        }
    }

    #[test]
    fn count_inside_sums_multiplicities() {
        let seq = FamilySpec::theorem2(100, 4).build().unwrap();
        let between = 0.5 * (seq.log_r(1).unwrap() + seq.log_r(2).unwrap());
        // 2 + q_0 + q_1
        assert_eq!(seq.count_inside(between), BigUint::from(15_102u32));
    }
}
