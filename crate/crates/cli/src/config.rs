//! Experiment files: TOML, or JSON with the same keys.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wandering_core::render::RenderSpec;
use wandering_core::{EvalConfig, FamilyKind, FamilySpec, LogComplex, PRule, PhaseRule, ZeroSequence};

use crate::CliError;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub family: FamilyConfig,
    pub window: Window,
    #[serde(default)]
    pub eval: EvalSection,
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default)]
    pub outputs: Outputs,
}

fn default_margin() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub kind: FamilyKind,
    /// real constant `C`; negative values put the argument at `pi`
    pub c: Option<f64>,
    /// `log|C|`, with `arg_c`, as an alternative to `c`
    pub log_c: Option<f64>,
    pub arg_c: Option<f64>,
    pub r1: Option<f64>,
    pub k_max: usize,
    pub origin_mult: Option<u32>,
    pub p: Option<PRule>,
    pub phase: Option<PhaseRule>,
    pub q0: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub lo: usize,
    pub hi: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    pub tail_tol: Option<f64>,
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub sequence_csv: Option<String>,
    pub critical_csv: Option<String>,
    pub verify_json: Option<String>,
    pub classification_json: Option<String>,
    pub render: Option<RenderOutput>,
}

impl Outputs {
    pub fn is_empty(&self) -> bool {
        self == &Outputs::default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderOutput {
    pub file: String,
    /// `[k_lo, k_hi]`: spans `log r_{k_lo}` to `log r_{k_hi}`
    pub rings: Option<[usize; 2]>,
    pub log_mod_lo: Option<f64>,
    pub log_mod_hi: Option<f64>,
    pub arg_lo: Option<f64>,
    pub arg_hi: Option<f64>,
    pub width: usize,
    pub height: usize,
    pub max_iter: u32,
    pub target_ring: usize,
}

impl RenderOutput {
    pub fn spec(&self, seq: &ZeroSequence) -> Result<RenderSpec, CliError> {
        let (lo, hi) = match (self.rings, self.log_mod_lo, self.log_mod_hi) {
            (Some([a, b]), None, None) => {
                let radius = |k: usize| {
                    seq.log_r(k)
                        .ok_or_else(|| CliError::config(format!("render ring {k} is not generated")))
                };
                (radius(a)?, radius(b)?)
            }
            (None, Some(lo), Some(hi)) => (lo, hi),
            _ => {
                return Err(CliError::config(
                    "render needs either `rings` or both `log_mod_lo` and `log_mod_hi`",
                ))
            }
        };
        let spec = RenderSpec {
            log_mod_lo: lo,
            log_mod_hi: hi,
            arg_lo: self.arg_lo.unwrap_or(-std::f64::consts::PI),
            arg_hi: self.arg_hi.unwrap_or(std::f64::consts::PI),
            width: self.width,
            height: self.height,
            max_iter: self.max_iter,
            target_ring: self.target_ring,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl ExperimentConfig {
    /// Reads a config; `.json` files are parsed as JSON, anything else as TOML.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        Self::parse(&text, is_json)
    }

    pub fn parse(text: &str, is_json: bool) -> Result<Self, CliError> {
        // check the schema first so an old file gets a clear message
        let schema = if is_json {
            serde_json::from_str::<serde_json::Value>(text)
                .map_err(|e| CliError::config(format!("malformed JSON: {e}")))?
                .get("schema")
                .and_then(|v| v.as_u64())
        } else {
            text.parse::<toml::Table>()
                .map_err(|e| CliError::config(format!("malformed TOML: {e}")))?
                .get("schema")
                .and_then(|v| v.as_integer())
                .and_then(|v| u64::try_from(v).ok())
        };
        match schema {
            Some(s) if s == u64::from(SCHEMA) => {}
            Some(s) => return Err(CliError::config(format!("schema {s} is not supported (expected {SCHEMA})"))),
            None => return Err(CliError::config("missing `schema = 1`")),
        }
        let cfg: Self = if is_json {
            serde_json::from_str(text).map_err(|e| CliError::config(format!("invalid config: {e}")))?
        } else {
            toml::from_str(text).map_err(|e| CliError::config(format!("invalid config: {e}")))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let Window { lo, hi } = self.window;
        if lo < 1 || hi < lo {
            return Err(CliError::config(format!("window [{lo}, {hi}] needs 1 <= lo <= hi")));
        }
        // critical points and ring checks look one index past the window
        if hi + 1 > self.family.k_max {
            return Err(CliError::config(format!(
                "window end {hi} needs k_max >= {}, got {}",
                hi + 1,
                self.family.k_max
            )));
        }
        if !(self.margin > 0.0 && self.margin < 0.5) {
            return Err(CliError::config(format!("margin = {} not in (0, 0.5)", self.margin)));
        }
        self.eval_config().validate()?;
        Ok(())
    }

    pub fn eval_config(&self) -> EvalConfig {
        let d = EvalConfig::default();
        EvalConfig {
            tail_tol: self.eval.tail_tol.unwrap_or(d.tail_tol),
            samples: self.eval.samples.unwrap_or(d.samples),
        }
    }

    pub fn family_spec(&self) -> Result<FamilySpec, CliError> {
        let f = &self.family;
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| CliError::config(format!("family `{name}` is required for {:?}", f.kind)))
        };
        let constant = || -> Result<LogComplex, CliError> {
            match (f.c, f.log_c) {
                (Some(c), None) if c != 0.0 && c.is_finite() => Ok(LogComplex::from_complex(c.into())),
                (None, Some(l)) => Ok(LogComplex::new(l, f.arg_c.unwrap_or(0.0))?),
                _ => Err(CliError::config("give exactly one of a nonzero `c` or `log_c`")),
            }
        };
        let spec = match f.kind {
            FamilyKind::Baker1976 => FamilySpec::baker1976(need(f.c, "c")?, need(f.r1, "r1")?, f.k_max),
            FamilyKind::Baker1988 => FamilySpec::baker1988(need(f.c, "c")?, need(f.r1, "r1")?, f.k_max),
            FamilyKind::Theorem2 => {
                let q0 = f.q0.ok_or_else(|| CliError::config("family `q0` is required for theorem2"))?;
                FamilySpec::theorem2(q0, f.k_max)
            }
            FamilyKind::Theorem4 => FamilySpec::theorem4(
                f.origin_mult
                    .ok_or_else(|| CliError::config("family `origin_mult` is required for theorem4"))?,
                constant()?,
                f.p.clone()
                    .ok_or_else(|| CliError::config("family `p` is required for theorem4"))?,
                f.phase.clone().unwrap_or(PhaseRule::AllPi),
                need(f.r1, "r1")?,
                f.k_max,
            ),
        };
        Ok(spec)
    }

    /// SHA-256 of the effective config in canonical JSON form, so TOML and
    /// JSON spellings of one experiment share a hash.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex(&Sha256::digest(canonical))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
