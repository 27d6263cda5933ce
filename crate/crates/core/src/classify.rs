//! Connectivity and uniform-perfectness verdicts over a finite window.
//!
//! Limits of `k P_k` cannot be computed, so every verdict is windowed: the
//! tail half of the window is compared with the threshold `T = |C|/(2e)`
//! with a relative margin, and the result is evidence, never proof.

use std::f64::consts::{LN_2, TAU};

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::critical::CriticalPoint;
use crate::error::{Error, Result};
use crate::evaluator::{eval_f, EvalConfig, ScaledPoint};
use crate::families::{FamilyKind, ZeroSequence};
use crate::verify::RingVerification;

/// `epsilon` used for rings where no grid value passed.
pub const FALLBACK_EPSILON: f64 = 0.5;
/// shortest window for the `k P_k` trichotomy
pub const MIN_WINDOW: usize = 20;
/// radius factor of the small disc around `a_k` in the clustering diagnostics
const SMALL_DISC_FACTOR: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connectivity {
    Infinite,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UniformPerfectness {
    Yes,
    No,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clustering {
    InnerIsolated,
    OuterIsolated,
    Neither,
    Inconclusive,
}

/// Where the critical value `f(c_k)` lands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Landing {
    /// `|f(c_k)| < (1 - eps_{k+1}) r_{k+1}`
    RingK,
    /// `(1 + eps_{k+1}) r_{k+1} < |f(c_k)| < r_{k+2}/2`
    RingNext,
    Between,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KpStats {
    pub min: f64,
    pub max: f64,
    pub first: f64,
    pub last: f64,
    /// least-squares slope of `k P_k` against `k`
    pub slope: f64,
    pub tail_min: f64,
    pub tail_max: f64,
}

impl KpStats {
    pub fn from_values(values: &[(usize, f64)]) -> Self {
        assert!(!values.is_empty(), "empty kP window");
        let tail = &values[values.len() / 2..];
        let fold_min = |s: &[(usize, f64)]| s.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        let fold_max = |s: &[(usize, f64)]| s.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
        let pts: Vec<(f64, f64)> = values.iter().map(|&(k, v)| (k as f64, v)).collect();
        Self {
            min: fold_min(values),
            max: fold_max(values),
            first: values[0].1,
            last: values[values.len() - 1].1,
            slope: ls_slope(&pts),
            tail_min: fold_min(tail),
            tail_max: fold_max(tail),
        }
    }
}

fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return 0.0;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Comparison flags of the tail of `k P_k` against the threshold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub limsup_above: bool,
    pub liminf_below: bool,
    pub limsup_below: bool,
    pub liminf_above: bool,
    pub liminf_zero: bool,
    /// the tail stays within the margin band around the threshold
    pub straddles: bool,
}

impl Evidence {
    pub fn from_values(values: &[(usize, f64)], threshold: f64, margin: f64) -> Self {
        let s = KpStats::from_values(values);
        let hi = threshold * (1.0 + margin);
        let lo = threshold * (1.0 - margin);
        let tail = &values[values.len() / 2..];
        let decreasing = tail.windows(2).all(|w| w[1].1 <= w[0].1);
        let limsup_above = s.tail_max > hi;
        let liminf_below = s.tail_min < lo;
        Self {
            limsup_above,
            liminf_below,
            limsup_below: s.tail_max < lo,
            liminf_above: s.tail_min > hi,
            liminf_zero: s.last < s.first / 10.0 && decreasing,
            straddles: !limsup_above && !liminf_below,
        }
    }
}

/// Verdicts of the trichotomy. `ring_k_seen` / `ring_next_seen` say whether
/// some tail critical value landed in ring `k` / ring `k+1`;
/// `ring_k_diverges` / `ring_next_diverges` whether the separating-annulus
/// criterion diverges along those critical points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Signature {
    pub ring_k_seen: bool,
    pub ring_next_seen: bool,
    pub ring_k_diverges: bool,
    pub ring_next_diverges: bool,
}

pub fn decide(ev: &Evidence, sig: &Signature) -> (Connectivity, UniformPerfectness) {
    let above = ev.limsup_above && sig.ring_k_seen;
    let below = ev.liminf_below && sig.ring_next_seen;
    let connectivity = if above || below {
        Connectivity::Infinite
    } else {
        Connectivity::Inconclusive
    };
    let not_up = (above && sig.ring_k_diverges) || (ev.liminf_zero && below && sig.ring_next_diverges);
    let up = ev.limsup_below && !ev.liminf_zero;
    let perfect = match (not_up, up) {
        (true, false) => UniformPerfectness::No,
        (false, true) => UniformPerfectness::Yes,
        _ => UniformPerfectness::Inconclusive,
    };
    (connectivity, perfect)
}

/// Divergence of a criterion sequence: the last five entries strictly
/// increase, and the final value exceeds twice the median or the values grow
/// at least `0.1` per unit of `log k` over the second half.
pub fn diverges(values: &[(usize, f64)]) -> bool {
    if values.len() < 5 {
        return false;
    }
    let last5 = &values[values.len() - 5..];
    if !last5.windows(2).all(|w| w[1].1 > w[0].1) {
        return false;
    }
    let mut sorted: Vec<f64> = values.iter().map(|v| v.1).collect();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let last = values[values.len() - 1].1;
    let half = &values[values.len() / 2..];
    let pts: Vec<(f64, f64)> = half.iter().map(|&(k, v)| ((k as f64).ln(), v)).collect();
    last > 2.0 * median || ls_slope(&pts) >= 0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroCounts {
    pub k: usize,
    pub l: u32,
    #[serde(with = "decimal")]
    pub m: BigUint,
    #[serde(with = "decimal")]
    pub n: BigUint,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnulusShape {
    /// `ann((1+eps_k) r_k, min(k r_k, |f(c_k)|))`
    RingK,
    /// `ann((1+eps_{k+1}) r_{k+1}, |f(c_k)|)`
    RingNext,
    /// `ann(4 a_{k+1}, sqrt(a_{k+2}))`
    Multiplicity,
    /// `ann(r_{k+1}^2, |f(c_{k+1})|)`
    Squares,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparatingAnnulus {
    pub k: usize,
    pub shape: AnnulusShape,
    pub log_inner: f64,
    pub log_outer: f64,
    /// `log(outer/inner)/(2 pi)`, formed from relative quantities
    pub modulus: f64,
    /// `modulus / (n_k - m_k)`
    pub criterion: f64,
    /// outer radius not above the inner one
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterDiagnostic {
    pub k: usize,
    /// `min log|f| - log r_{k+1}` on `|z| = (1 - 1/k) r_k`
    pub inner_circle_lower: f64,
    /// `min log|f| - log r_{k+1}` on `|z - a_k| = r_k/k`
    pub disc_lower: f64,
    /// `log(r_{k+1}/2) - max log|f|` on `|z - a_k| = 0.1 r_k/k`
    pub small_disc_upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub kind: Option<FamilyKind>,
    pub window: (usize, usize),
    pub margin: f64,
    /// `|C|/(2e)` for the `P_k` families
    pub threshold: Option<f64>,
    pub kp: Vec<(usize, f64)>,
    pub kp_stats: Option<KpStats>,
    pub evidence: Option<Evidence>,
    pub landings: Vec<(usize, Landing)>,
    pub connectivity: Connectivity,
    pub uniformly_perfect: UniformPerfectness,
    pub moduli: Vec<(usize, f64)>,
    pub counts: Vec<ZeroCounts>,
    pub annuli: Vec<SeparatingAnnulus>,
    pub criterion_diverges: bool,
    pub clustering: Clustering,
    pub diagnostics: Vec<ClusterDiagnostic>,
}

/// Inputs gathered by earlier stages of the pipeline.
pub struct ClassifyInput<'a> {
    pub window: (usize, usize),
    pub margin: f64,
    /// critical points by index; Baker 1988 uses `c_{k+1}` for ring `k`
    pub critical: &'a [CriticalPoint],
    /// `epsilon_k` found per ring
    pub epsilons: &'a [(usize, Option<f64>)],
    pub verifications: &'a [RingVerification],
}

impl ClassifyInput<'_> {
    fn critical(&self, k: usize) -> Result<&CriticalPoint> {
        self.critical
            .iter()
            .find(|c| c.k == k)
            .ok_or(Error::MissingCriticalPoint(k))
    }

    fn epsilon(&self, k: usize) -> f64 {
        self.epsilons
            .iter()
            .find(|e| e.0 == k)
            .and_then(|e| e.1)
            .unwrap_or(FALLBACK_EPSILON)
    }
}

/// `(l_k, m_k, n_k)`: `m_k` zeros through index `k`, `n_k` through `k+1`,
/// `l_k = 1` when the critical value of ring `k` lies beyond the inner
/// radius of ring `k+1`.
pub fn zero_counts(seq: &ZeroSequence, k: usize, input: &ClassifyInput) -> Result<ZeroCounts> {
    let m = seq.mult_sum_through(k);
    let n = seq.mult_sum_through(k + 1);
    let beyond = match seq.kind() {
        Some(FamilyKind::Theorem2) => input.critical(k)?.ratio_next > 4f64.ln(),
        Some(FamilyKind::Baker1988) => {
            let cp = input.critical(k + 1)?;
            let l1 = seq.log_r(k + 1).ok_or(Error::IndexOutOfRange(k + 1))?;
            let l2 = seq.log_r(k + 2).ok_or(Error::IndexOutOfRange(k + 2))?;
            cp.ratio_next + (l2 - l1) > l1
        }
        _ => input.critical(k)?.ratio_next >= input.epsilon(k + 1).ln_1p(),
    };
    Ok(ZeroCounts {
        k,
        l: u32::from(beyond),
        m,
        n,
    })
}

fn landing(seq: &ZeroSequence, cp: &CriticalPoint, eps_next: f64) -> Result<Landing> {
    let l1 = seq.log_r(cp.k + 1).ok_or(Error::IndexOutOfRange(cp.k + 1))?;
    let l2 = seq.log_r(cp.k + 2).ok_or(Error::IndexOutOfRange(cp.k + 2))?;
    Ok(if cp.ratio_next < (1.0 - eps_next).ln() {
        Landing::RingK
    } else if cp.ratio_next > eps_next.ln_1p() && cp.ratio_next < (l2 - l1) - LN_2 {
        Landing::RingNext
    } else {
        Landing::Between
    })
}

fn diff_f64(n: &BigUint, m: &BigUint) -> f64 {
    (n - m).to_f64().unwrap_or(f64::INFINITY)
}

/// Separating annulus for the critical value of ring `k`.
pub fn separating_annulus(
    seq: &ZeroSequence,
    k: usize,
    counts: &ZeroCounts,
    input: &ClassifyInput,
) -> Result<SeparatingAnnulus> {
    let d = diff_f64(&counts.n, &counts.m);
    let (shape, log_inner, log_outer, width) = match seq.kind() {
        Some(FamilyKind::Theorem2) => {
            let q = seq.entry(k)?.mult_f64();
            let q_next = seq.entry(k + 1)?.mult_f64();
            let inner = 4f64.ln() + q;
            let outer = q_next / 2.0;
            (AnnulusShape::Multiplicity, inner, outer, q_next / 2.0 - 4f64.ln() - q)
        }
        Some(FamilyKind::Baker1988) => {
            let cp = input.critical(k + 1)?;
            let l1 = seq.log_r(k + 1).ok_or(Error::IndexOutOfRange(k + 1))?;
            let l2 = seq.log_r(k + 2).ok_or(Error::IndexOutOfRange(k + 2))?;
            let width = cp.ratio_next + (l2 - 2.0 * l1);
            (AnnulusShape::Squares, 2.0 * l1, l2 + cp.ratio_next, width)
        }
        _ => {
            let cp = input.critical(k)?;
            let lk = seq.entry(k)?.log_r;
            let l1 = seq.log_r(k + 1).ok_or(Error::IndexOutOfRange(k + 1))?;
            let eps_next = input.epsilon(k + 1);
            match landing(seq, cp, eps_next)? {
                Landing::RingK => {
                    let eps = input.epsilon(k);
                    // outer radius relative to r_k
                    let outer_rel = (k as f64).ln().min(cp.ratio_next + (l1 - lk));
                    let inner_rel = eps.ln_1p();
                    (AnnulusShape::RingK, lk + inner_rel, lk + outer_rel, outer_rel - inner_rel)
                }
                _ => {
                    let inner_rel = eps_next.ln_1p();
                    (
                        AnnulusShape::RingNext,
                        l1 + inner_rel,
                        l1 + cp.ratio_next,
                        cp.ratio_next - inner_rel,
                    )
                }
            }
        }
    };
    let modulus = width / TAU;
    Ok(SeparatingAnnulus {
        k,
        shape,
        log_inner,
        log_outer,
        modulus,
        criterion: modulus / d,
        degenerate: width <= 0.0,
    })
}

/// Sampled `(min, max)` of `log|f| - log r_{k+1}` on `|z - a_k| = rho r_k`.
fn disc_extrema(seq: &ZeroSequence, k: usize, rho: f64, cfg: &EvalConfig) -> Result<(f64, f64)> {
    let n = cfg.samples;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let phi = TAU * i as f64 / n as f64;
        let w = Complex64::new(1.0, 0.0) + Complex64::from_polar(rho, phi);
        let v = eval_f(seq, &ScaledPoint::new(seq, k, w)?, cfg)?.log_rel_next(seq);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

/// Circle bounds behind the boundary-clustering picture, at ring `k`.
pub fn cluster_diagnostic(seq: &ZeroSequence, k: usize, cfg: &EvalConfig) -> Result<ClusterDiagnostic> {
    let kf = k as f64;
    let inner = crate::evaluator::circle_extrema(
        seq,
        &crate::evaluator::CircleRadius::new(k, (1.0 - 1.0 / kf).ln()),
        cfg,
    )?;
    let (disc_min, _) = disc_extrema(seq, k, 1.0 / kf, cfg)?;
    let (_, small_max) = disc_extrema(seq, k, SMALL_DISC_FACTOR / kf, cfg)?;
    Ok(ClusterDiagnostic {
        k,
        inner_circle_lower: inner.min_rel_next(),
        disc_lower: disc_min,
        small_disc_upper: -LN_2 - small_max,
    })
}

/// Clustering verdict from the tail of `k P_k`.
pub fn clustering_from_evidence(ev: &Evidence) -> Clustering {
    if ev.limsup_below {
        Clustering::OuterIsolated
    } else if ev.liminf_above {
        Clustering::InnerIsolated
    } else if ev.limsup_above && ev.liminf_below {
        Clustering::Neither
    } else {
        Clustering::Inconclusive
    }
}

/// Full classification over `input.window`.
pub fn classify(
    seq: &ZeroSequence,
    input: &ClassifyInput,
    cfg: &EvalConfig,
) -> Result<Classification> {
    let (lo, hi) = input.window;
    let kind = seq.kind();
    // the multiplicity family overflows after a handful of rings
    let min_len = if kind == Some(FamilyKind::Theorem2) { 1 } else { MIN_WINDOW };
    if hi < lo || hi - lo + 1 < min_len {
        return Err(Error::invalid(format!(
            "window [{lo}, {hi}] is shorter than {min_len}"
        )));
    }
    if !(input.margin > 0.0 && input.margin < 0.5) {
        return Err(Error::invalid(format!("margin = {} not in (0, 0.5)", input.margin)));
    }
    let ks: Vec<usize> = (lo..=hi).collect();
    let counts = ks
        .iter()
        .map(|&k| zero_counts(seq, k, input))
        .collect::<Result<Vec<_>>>()?;
    let annuli = ks
        .iter()
        .zip(&counts)
        .map(|(&k, c)| separating_annulus(seq, k, c, input))
        .collect::<Result<Vec<_>>>()?;
    let moduli: Vec<(usize, f64)> = annuli.iter().map(|a| (a.k, a.criterion)).collect();

    let mut out = Classification {
        kind,
        window: input.window,
        margin: input.margin,
        threshold: None,
        kp: Vec::new(),
        kp_stats: None,
        evidence: None,
        landings: Vec::new(),
        connectivity: Connectivity::Inconclusive,
        uniformly_perfect: UniformPerfectness::Inconclusive,
        moduli: moduli.clone(),
        counts,
        annuli,
        criterion_diverges: diverges(&moduli),
        clustering: Clustering::Inconclusive,
        diagnostics: Vec::new(),
    };

    let window_verified = |ks: &[usize]| {
        ks.iter().all(|k| {
            input
                .verifications
                .iter()
                .any(|v| v.k == *k && v.pass)
        })
    };
    match kind {
        Some(FamilyKind::Theorem2) => {
            let ok = window_verified(&ks) && out.counts.iter().all(|c| c.l == 1);
            if ok {
                out.connectivity = Connectivity::Infinite;
                if !out.criterion_diverges {
                    out.uniformly_perfect = UniformPerfectness::Yes;
                }
            }
            out.clustering = Clustering::InnerIsolated;
        }
        Some(FamilyKind::Baker1988) => {
            if window_verified(&ks) {
                out.connectivity = Connectivity::Infinite;
                if out.criterion_diverges {
                    out.uniformly_perfect = UniformPerfectness::No;
                }
            }
        }
        _ => {
            let threshold = seq.constant().log_mod().exp() / (2.0 * std::f64::consts::E);
            let kp = ks
                .iter()
                .map(|&k| {
                    seq.log_p(k)
                        .map(|lp| (k, k as f64 * lp.exp()))
                        .ok_or(Error::IndexOutOfRange(k))
                })
                .collect::<Result<Vec<_>>>()?;
            let ev = Evidence::from_values(&kp, threshold, input.margin);
            let landings = ks
                .iter()
                .map(|&k| Ok((k, landing(seq, input.critical(k)?, input.epsilon(k + 1))?)))
                .collect::<Result<Vec<_>>>()?;
            let tail_start = ks[ks.len() / 2];
            let seen = |target: Landing| {
                landings
                    .iter()
                    .any(|&(k, l)| k >= tail_start && l == target)
            };
            let along = |target: Landing| {
                let sub: Vec<(usize, f64)> = out
                    .annuli
                    .iter()
                    .zip(&landings)
                    .filter(|(_, l)| l.1 == target)
                    .map(|(a, _)| (a.k, a.criterion))
                    .collect();
                diverges(&sub)
            };
            let sig = Signature {
                ring_k_seen: seen(Landing::RingK),
                ring_next_seen: seen(Landing::RingNext),
                ring_k_diverges: along(Landing::RingK),
                ring_next_diverges: along(Landing::RingNext),
            };
            let (c, u) = decide(&ev, &sig);
            out.connectivity = c;
            out.uniformly_perfect = u;
            out.clustering = clustering_from_evidence(&ev);
            out.diagnostics = ks[ks.len() / 2..]
                .par_iter()
                .map(|&k| cluster_diagnostic(seq, k, cfg))
                .collect::<Result<Vec<_>>>()?;
            out.threshold = Some(threshold);
            out.kp_stats = Some(KpStats::from_values(&kp));
            out.kp = kp;
            out.evidence = Some(ev);
            out.landings = landings;
        }
    }
    Ok(out)
}

/// CSV rows `k,kp,l,m,n,criterion`; `kp` is empty for families without `P_k`.
pub fn to_csv(c: &Classification) -> String {
    let mut s = String::from("k,kp,l,m,n,criterion\n");
    for (i, counts) in c.counts.iter().enumerate() {
        let kp = c
            .kp
            .get(i)
            .map(|v| v.1.to_string())
            .unwrap_or_default();
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            counts.k, kp, counts.l, counts.m, counts.n, c.moduli[i].1
        ));
    }
    s
}

/// Big integers as decimal strings.
mod decimal {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}
