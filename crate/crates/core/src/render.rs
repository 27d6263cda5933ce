//! Escape-ring images in `(log|z|, arg z)` coordinates.
//!
//! Each pixel is iterated under `f` in scaled form until its orbit reaches
//! the target ring. The colour index is the number of steps taken, with a
//! few indices reserved for orbits that never get there.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::{eval_f, EvalConfig, ScaledPoint};
use crate::families::ZeroSequence;
use crate::logspace::LogComplex;

pub const MAX_SIDE: usize = 8192;
pub const MAX_ITER: u32 = 256;

/// orbit reached a zero of `f` and stays there
pub const INDEX_STUCK: u8 = 0;
/// the pixel already lies at or beyond the target ring
pub const INDEX_ALREADY: u8 = 253;
/// `max_iter` steps without reaching the target ring
pub const INDEX_UNRESOLVED: u8 = 254;
/// orbit left the representable or generated range
pub const INDEX_OVERFLOW: u8 = 255;
/// layers map onto `1..=LAYER_CYCLE`
const LAYER_CYCLE: u32 = 252;

const PALETTE: [[u8; 3]; 16] = [
    [25, 25, 112],
    [0, 0, 205],
    [30, 144, 255],
    [0, 191, 255],
    [0, 206, 209],
    [46, 139, 87],
    [50, 205, 50],
    [173, 255, 47],
    [255, 255, 0],
    [255, 215, 0],
    [255, 165, 0],
    [255, 99, 71],
    [220, 20, 60],
    [199, 21, 133],
    [148, 0, 211],
    [106, 90, 205],
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenderSpec {
    pub log_mod_lo: f64,
    pub log_mod_hi: f64,
    #[serde(default = "neg_pi")]
    pub arg_lo: f64,
    #[serde(default = "pos_pi")]
    pub arg_hi: f64,
    pub width: usize,
    pub height: usize,
    pub max_iter: u32,
    pub target_ring: usize,
}

fn neg_pi() -> f64 {
    -PI
}

fn pos_pi() -> f64 {
    PI
}

impl RenderSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::SpecInvalid(m));
        if !(self.log_mod_lo < self.log_mod_hi) || !self.log_mod_hi.is_finite() || !self.log_mod_lo.is_finite() {
            return bad(format!("log_mod range [{}, {}] is empty", self.log_mod_lo, self.log_mod_hi));
        }
        if !(self.arg_lo < self.arg_hi) || self.arg_lo < -PI || self.arg_hi > PI {
            return bad(format!("arg range [{}, {}] not inside [-pi, pi]", self.arg_lo, self.arg_hi));
        }
        if self.width == 0 || self.height == 0 || self.width > MAX_SIDE || self.height > MAX_SIDE {
            return bad(format!("size {}x{} not in 1..={MAX_SIDE}", self.width, self.height));
        }
        if self.max_iter == 0 || self.max_iter > MAX_ITER {
            return bad(format!("max_iter = {} not in 1..={MAX_ITER}", self.max_iter));
        }
        Ok(())
    }

    /// Pixel centre `(log|z|, arg z)`; row 0 is the top (largest argument).
    pub fn pixel_center(&self, row: usize, col: usize) -> (f64, f64) {
        let x = self.log_mod_lo
            + (col as f64 + 0.5) * (self.log_mod_hi - self.log_mod_lo) / self.width as f64;
        let y = self.arg_hi - (row as f64 + 0.5) * (self.arg_hi - self.arg_lo) / self.height as f64;
        (x, y)
    }
}

/// Largest `k` with `log r_k <= x`, or `-1` below the first ring.
pub fn ring_index(seq: &ZeroSequence, x: f64) -> i64 {
    let pos = seq.entries().partition_point(|e| e.log_r <= x);
    if pos == 0 {
        -1
    } else {
        (seq.first_index() + pos - 1) as i64
    }
}

/// Ring of a scaled point, read from its base and the sign of `log|w|`,
/// which stays exact where `log|z|` itself is too large to compare.
fn point_ring(seq: &ZeroSequence, p: &ScaledPoint) -> i64 {
    if p.w.is_zero() {
        return -1;
    }
    if p.w.log_mod() >= 0.0 {
        p.base as i64
    } else if p.base == seq.first_index() {
        -1
    } else {
        p.base as i64 - 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitPoint {
    pub log_mod: f64,
    pub ring: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitEnd {
    Reached,
    Stuck,
    /// the value overflowed or fell past the generated horizon
    Escaped,
    MaxIter,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    /// starting point first
    pub points: Vec<OrbitPoint>,
    pub end: OrbitEnd,
}

impl Orbit {
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }
}

/// Orbit of `start` until it reaches `target_ring`, sticks at a zero, leaves
/// the generated range or runs for `max_iter` steps.
pub fn iterate_orbit(
    seq: &ZeroSequence,
    start: LogComplex,
    max_iter: u32,
    target_ring: usize,
    cfg: &EvalConfig,
) -> Orbit {
    let mut points = Vec::new();
    let mut p = match ScaledPoint::from_absolute(seq, start) {
        Ok(p) => p,
        Err(_) => {
            return Orbit {
                points: vec![OrbitPoint { log_mod: start.log_mod(), ring: ring_index(seq, start.log_mod()) }],
                end: OrbitEnd::Escaped,
            }
        }
    };
    let record = |p: &ScaledPoint| OrbitPoint {
        log_mod: if p.w.is_zero() { f64::NEG_INFINITY } else { p.log_abs(seq) },
        ring: point_ring(seq, p),
    };
    points.push(record(&p));
    for _ in 0..max_iter {
        let last = points[points.len() - 1];
        if last.ring >= target_ring as i64 {
            return Orbit { points, end: OrbitEnd::Reached };
        }
        if p.w.is_zero() && seq.origin_mult() > 0 {
            return Orbit { points, end: OrbitEnd::Stuck };
        }
        let next = eval_f(seq, &p, cfg).and_then(|v| v.to_point(seq));
        match next {
            Ok(q) => {
                p = q;
                points.push(record(&p));
            }
            Err(Error::Overflow { .. }) | Err(Error::Rebase(_)) => {
                return Orbit { points, end: OrbitEnd::Escaped };
            }
            // a pole-type failure means the orbit hit a zero exactly
            Err(_) => return Orbit { points, end: OrbitEnd::Stuck },
        }
    }
    let last = points[points.len() - 1];
    let end = if last.ring >= target_ring as i64 {
        OrbitEnd::Reached
    } else if p.w.is_zero() && seq.origin_mult() > 0 {
        OrbitEnd::Stuck
    } else {
        OrbitEnd::MaxIter
    };
    Orbit { points, end }
}

/// Colour index of an orbit.
pub fn color_index(orbit: &Orbit) -> u8 {
    match orbit.end {
        OrbitEnd::Stuck => INDEX_STUCK,
        OrbitEnd::Escaped => INDEX_OVERFLOW,
        OrbitEnd::MaxIter => INDEX_UNRESOLVED,
        OrbitEnd::Reached => match orbit.steps() as u32 {
            0 => INDEX_ALREADY,
            n => (1 + (n - 1) % LAYER_CYCLE) as u8,
        },
    }
}

pub fn index_rgb(index: u8) -> [u8; 3] {
    match index {
        INDEX_STUCK => [0, 0, 0],
        INDEX_OVERFLOW => [255, 255, 255],
        INDEX_UNRESOLVED => [128, 128, 128],
        INDEX_ALREADY => [64, 64, 64],
        i => PALETTE[i as usize % PALETTE.len()],
    }
}

/// Colour indices row-major, top row first.
pub fn render_indices(seq: &ZeroSequence, spec: &RenderSpec, cfg: &EvalConfig) -> Result<Vec<u8>> {
    spec.validate()?;
    if spec.target_ring > seq.last_index() {
        return Err(Error::SpecInvalid(format!(
            "target ring {} beyond the last generated index {}",
            spec.target_ring,
            seq.last_index()
        )));
    }
    let rows: Vec<Vec<u8>> = (0..spec.height)
        .into_par_iter()
        .map(|row| {
            (0..spec.width)
                .map(|col| {
                    let (x, y) = spec.pixel_center(row, col);
                    match LogComplex::new(x, y) {
                        Ok(z) => color_index(&iterate_orbit(seq, z, spec.max_iter, spec.target_ring, cfg)),
                        Err(_) => INDEX_OVERFLOW,
                    }
                })
                .collect()
        })
        .collect();
    Ok(rows.concat())
}

/// Binary PPM (`P6`) image.
pub fn render_image(seq: &ZeroSequence, spec: &RenderSpec, cfg: &EvalConfig) -> Result<Vec<u8>> {
    let indices = render_indices(seq, spec, cfg)?;
    let mut out = format!("P6\n{} {}\n255\n", spec.width, spec.height).into_bytes();
    out.reserve(indices.len() * 3);
    for i in indices {
        out.extend_from_slice(&index_rgb(i));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::FamilySpec;
    use crate::verify::find_epsilon;
    use std::f64::consts::E;

    fn baker() -> ZeroSequence {
        FamilySpec::baker1976(1.0 / (4.0 * E), 11.0, 40).build().unwrap()
    }

    #[test]
    fn ring_index_conventions() {
        let seq = baker();
        let l3 = seq.log_r(3).unwrap();
        assert_eq!(ring_index(&seq, l3 + 1e-9), 3);
        assert_eq!(ring_index(&seq, l3), 3);
        assert_eq!(ring_index(&seq, seq.log_r(1).unwrap() - 0.1), -1);
    }

    #[test]
    fn orbit_from_verified_ring_moves_out() {
        let seq = baker();
        let cfg = EvalConfig::default();
        let k = 8;
        let eps = find_epsilon(&seq, k, &cfg).unwrap().unwrap();
        let x = seq.log_r(k).unwrap() + (eps * 1.5).ln_1p();
        let orbit = iterate_orbit(&seq, LogComplex::new(x, 0.7).unwrap(), 5, k + 4, &cfg);
        assert_eq!(orbit.points[0].ring, k as i64);
        assert_eq!(orbit.points[1].ring, k as i64 + 1);
        assert!(orbit.points.windows(2).all(|w| w[1].log_mod > w[0].log_mod));
        assert_eq!(orbit.end, OrbitEnd::Reached);
        assert_eq!(orbit.steps(), 4);
    }

    #[test]
    fn zero_is_stuck() {
        let seq = baker();
        let e = seq.entry(5).unwrap();
        let orbit = iterate_orbit(&seq, e.point(), 10, 30, &EvalConfig::default());
        assert_eq!(orbit.end, OrbitEnd::Stuck);
        assert_eq!(orbit.points.last().unwrap().ring, -1);
        assert_eq!(color_index(&orbit), INDEX_STUCK);
    }

    #[test]
    fn single_pixel_one_layer() {
        let seq = baker();
        let cfg = EvalConfig::default();
        let k = 8;
        let x = seq.log_r(k).unwrap() + 0.3f64.ln_1p();
        let spec = RenderSpec {
            log_mod_lo: x - 1e-3,
            log_mod_hi: x + 1e-3,
            arg_lo: 0.5,
            arg_hi: 0.6,
            width: 1,
            height: 1,
            max_iter: 10,
            target_ring: k + 1,
        };
        assert_eq!(render_indices(&seq, &spec, &cfg).unwrap(), vec![1]);
        let img = render_image(&seq, &spec, &cfg).unwrap();
        assert!(img.starts_with(b"P6\n1 1\n255\n"));
        assert_eq!(img.len(), b"P6\n1 1\n255\n".len() + 3);
    }

    #[test]
    fn spec_validation() {
        let ok = RenderSpec {
            log_mod_lo: 0.0,
            log_mod_hi: 1.0,
            arg_lo: -PI,
            arg_hi: PI,
            width: 4,
            height: 4,
            max_iter: 8,
            target_ring: 3,
        };
        assert!(ok.validate().is_ok());
        for bad in [
            RenderSpec { log_mod_hi: 0.0, ..ok.clone() },
            RenderSpec { width: MAX_SIDE + 1, ..ok.clone() },
            RenderSpec { max_iter: MAX_ITER + 1, ..ok.clone() },
            RenderSpec { max_iter: 0, ..ok.clone() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::SpecInvalid(_))));
        }
    }
}
