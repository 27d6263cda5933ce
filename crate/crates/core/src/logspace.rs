//! Complex numbers stored as (natural-log modulus, argument).
//!
//! Moduli up to `exp(f64::MAX)` are representable, and long products of huge
//! factors become sums of logarithms. Zero is encoded by `log_mod = -inf`.
//! `+inf` never appears in a value: operations that would produce it return
//! [`Error::Overflow`].

use std::cmp::Ordering;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wrap an angle into `(-pi, pi]`.
#[inline]
pub fn normalize_arg(theta: f64) -> f64 {
    assert!(theta.is_finite(), "non-finite argument {theta}");
    // wrapping an in-range angle would cost it its low-order bits
    if theta > -PI && theta <= PI {
        return theta;
    }
    let a = theta.rem_euclid(TAU);
    if a > PI {
        a - TAU
    } else {
        a
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    log_mod: f64,
    arg: f64,
}

impl LogComplex {
    pub const ZERO: Self = Self {
        log_mod: f64::NEG_INFINITY,
        arg: 0.0,
    };
    pub const ONE: Self = Self {
        log_mod: 0.0,
        arg: 0.0,
    };

    /// Builds a value, wrapping `arg`. NaN in either field is a contract
    /// violation and panics; `log_mod = +inf` is reported as overflow.
    pub fn new(log_mod: f64, arg: f64) -> Result<Self> {
        assert!(!log_mod.is_nan(), "NaN log-modulus");
        assert!(!arg.is_nan(), "NaN argument");
        if log_mod == f64::INFINITY {
            return Err(Error::overflow("log-modulus is +inf"));
        }
        if log_mod == f64::NEG_INFINITY {
            return Ok(Self::ZERO);
        }
        Ok(Self {
            log_mod,
            arg: normalize_arg(arg),
        })
    }

    /// Positive real number `exp(log_mod)`.
    pub fn from_log(log_mod: f64) -> Result<Self> {
        Self::new(log_mod, 0.0)
    }

    pub fn from_complex(z: Complex64) -> Self {
        assert!(!z.re.is_nan() && !z.im.is_nan(), "NaN complex input");
        if z.re == 0.0 && z.im == 0.0 {
            return Self::ZERO;
        }
        // hypot can overflow for |z| near f64::MAX; scale by the larger part.
        let m = z.re.abs().max(z.im.abs());
        let log_mod = m.ln() + ((z.re / m).hypot(z.im / m)).ln();
        Self {
            log_mod,
            arg: normalize_arg(z.im.atan2(z.re)),
        }
    }

    pub fn to_complex(self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.log_mod.exp(), self.arg)
    }

    #[inline]
    pub fn log_mod(self) -> f64 {
        self.log_mod
    }

    #[inline]
    pub fn arg(self) -> f64 {
        self.arg
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.log_mod == f64::NEG_INFINITY
    }

    pub fn conj(self) -> Self {
        if self.is_zero() {
            return self;
        }
        Self {
            log_mod: self.log_mod,
            arg: if self.arg == PI { PI } else { -self.arg },
        }
    }

    pub fn neg(self) -> Self {
        if self.is_zero() {
            return self;
        }
        Self {
            log_mod: self.log_mod,
            arg: normalize_arg(self.arg + PI),
        }
    }

    /// `1/z`; the reciprocal of zero is reported as overflow.
    pub fn recip(self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::overflow("reciprocal of zero"));
        }
        Self::new(-self.log_mod, -self.arg)
    }

    pub fn mul(self, other: Self) -> Result<Self> {
        if self.is_zero() || other.is_zero() {
            return Ok(Self::ZERO);
        }
        let log_mod = self.log_mod + other.log_mod;
        if log_mod == f64::INFINITY {
            return Err(Error::overflow("log-modulus sum exceeds f64 range"));
        }
        Self::new(log_mod, self.arg + other.arg)
    }

    pub fn div(self, other: Self) -> Result<Self> {
        self.mul(other.recip()?)
    }

    /// `z^m` for a real exponent `m > 0`, principal branch.
    pub fn powf(self, m: f64) -> Result<Self> {
        assert!(m > 0.0 && m.is_finite(), "exponent must be positive");
        if self.is_zero() {
            return Ok(Self::ZERO);
        }
        let log_mod = self.log_mod * m;
        if !log_mod.is_finite() {
            return Err(Error::overflow("power exceeds f64 range"));
        }
        Self::new(log_mod, self.arg * m)
    }

    /// Canonical operand order for addition: larger modulus first, ties
    /// broken by argument. Makes `add` commutative to the bit.
    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.log_mod
            .total_cmp(&other.log_mod)
            .then(self.arg.total_cmp(&other.arg))
    }

    pub fn add(self, other: Self) -> Result<Self> {
        let (big, small) = match self.canonical_cmp(&other) {
            Ordering::Less => (other, self),
            _ => (self, other),
        };
        if small.is_zero() {
            return Ok(big);
        }
        // big + small = big * (1 - (-(small / big)))
        let ratio = small.div(big)?;
        big.mul(ratio.neg().one_minus())
    }

    /// `1 - z`. Small `|z|` goes through a log1p branch; large `|z|` is
    /// factored as `-z (1 - 1/z)` so the result never leaves log scale.
    pub fn one_minus(self) -> Self {
        if self.is_zero() {
            return Self::ONE;
        }
        let (l, t) = (self.log_mod, self.arg);
        if l < -1.0 {
            // log(1 + u) with u = -z
            let u = -Complex64::from_polar(l.exp(), t);
            let s = u.re.mul_add(u.re + 2.0, u.im * u.im);
            let log_mod = 0.5 * s.ln_1p();
            let arg = u.im.atan2(1.0 + u.re);
            Self {
                log_mod,
                arg: normalize_arg(arg),
            }
        } else if l > 1.0 {
            let inner = Self {
                log_mod: -l,
                arg: normalize_arg(-t),
            }
            .one_minus();
            if inner.is_zero() {
                return Self::ZERO;
            }
            Self {
                log_mod: l + inner.log_mod,
                arg: normalize_arg(t + PI + inner.arg),
            }
        } else if t == PI {
            // sin(PI) is not 0 in floating point
            Self {
                log_mod: l.exp().ln_1p(),
                arg: 0.0,
            }
        } else {
            // 1 - e^{l + i t} = -(expm1(l) cos t - 2 sin^2(t/2)) - i e^l sin t
            let h = (0.5 * t).sin();
            let re = -(l.exp_m1() * t.cos() - 2.0 * h * h);
            let im = -l.exp() * t.sin();
            Self::from_complex(Complex64::new(re, im))
        }
    }
}

impl Default for LogComplex {
    fn default() -> Self {
        Self::ONE
    }
}
