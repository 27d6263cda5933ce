//! Stages of an experiment and the artifacts they produce.
//!
//! Artifacts are collected in memory and written only after every stage has
//! succeeded, so a failing run leaves no partial output behind.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};
use wandering_core::classify::{self, Classification, ClassifyInput};
use wandering_core::verify::epsilon_sweep;
use wandering_core::{
    critical, locate, render, verify_baker1988, verify_ring_thm4, verify_thm2,
    CriticalPoint, EvalConfig, FamilyKind, RingVerification, ZeroSequence,
};

use crate::config::{hex, ExperimentConfig};
use crate::CliError;

/// largest relative recurrence residual accepted by `--seed-check`
pub const SEED_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Gen,
    Crit,
    Verify,
    Classify,
    Render,
    Run,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Options {
    pub seed_check: bool,
}

/// File name to bytes, in name order.
pub type Artifacts = BTreeMap<String, Vec<u8>>;

/// Everything computed for one config.
pub struct Context<'a> {
    pub cfg: &'a ExperimentConfig,
    pub eval: EvalConfig,
    pub seq: ZeroSequence,
    pub hash: String,
}

impl<'a> Context<'a> {
    pub fn new(cfg: &'a ExperimentConfig) -> Result<Self, CliError> {
        let seq = cfg.family_spec()?.build()?;
        if seq.last_index() < cfg.window.hi + 1 {
            return Err(CliError::config(format!(
                "window end {} needs index {} but the sequence stops at {}",
                cfg.window.hi,
                cfg.window.hi + 1,
                seq.last_index()
            )));
        }
        Ok(Self {
            cfg,
            eval: cfg.eval_config(),
            seq,
            hash: cfg.hash(),
        })
    }

    fn kind(&self) -> FamilyKind {
        self.cfg.family.kind
    }

    fn window(&self) -> (usize, usize) {
        (self.cfg.window.lo, self.cfg.window.hi)
    }

    /// Wraps `data` with provenance.
    fn envelope(&self, kind: &str, data: impl Serialize) -> Result<Vec<u8>, CliError> {
        let value = json!({
            "kind": kind,
            "version": wandering_core::VERSION,
            "config_hash": self.hash,
            "family": self.kind(),
            "window": [self.cfg.window.lo, self.cfg.window.hi],
            "data": data,
        });
        let mut out = serde_json::to_vec_pretty(&value).map_err(|e| CliError::io(e.to_string()))?;
        out.push(b'\n');
        Ok(out)
    }

    /// Critical points for the window and one index past it.
    pub fn critical_points(&self) -> Result<Vec<CriticalPoint>, CliError> {
        use rayon::prelude::*;
        let (lo, hi) = self.window();
        let last = match self.kind() {
            // the multiplicity family has no c_{k+1} beyond the last ring
            FamilyKind::Theorem2 => hi,
            _ => hi + 1,
        };
        let ks: Vec<usize> = (lo..=last).collect();
        Ok(ks
            .par_iter()
            .map(|&k| locate(&self.seq, k, &self.eval))
            .collect::<wandering_core::Result<Vec<_>>>()?)
    }

    /// `epsilon_k` for the window and one index past it (product families).
    pub fn epsilons(&self) -> Result<Vec<(usize, Option<f64>)>, CliError> {
        if !self.kind().has_p_sequence() {
            return Ok(Vec::new());
        }
        let (lo, hi) = self.window();
        let ks: Vec<usize> = (lo..=hi + 1).collect();
        Ok(epsilon_sweep(&self.seq, &ks, &self.eval)?)
    }

    pub fn verifications(&self, eps: &[(usize, Option<f64>)]) -> Result<Vec<RingVerification>, CliError> {
        use rayon::prelude::*;
        let (lo, hi) = self.window();
        let ks: Vec<usize> = (lo..=hi).collect();
        let out = ks
            .par_iter()
            .map(|&k| match self.kind() {
                FamilyKind::Theorem2 => verify_thm2(&self.seq, k, &self.eval),
                FamilyKind::Baker1988 => verify_baker1988(&self.seq, k, &self.eval),
                _ => {
                    let e = eps
                        .iter()
                        .find(|e| e.0 == k)
                        .and_then(|e| e.1)
                        .unwrap_or(classify::FALLBACK_EPSILON);
                    verify_ring_thm4(&self.seq, k, e, &self.eval)
                }
            })
            .collect::<wandering_core::Result<Vec<_>>>()?;
        Ok(out)
    }

    pub fn classification(
        &self,
        crit: &[CriticalPoint],
        eps: &[(usize, Option<f64>)],
        ver: &[RingVerification],
    ) -> Result<Classification, CliError> {
        let input = ClassifyInput {
            window: self.window(),
            margin: self.cfg.margin,
            critical: crit,
            epsilons: eps,
            verifications: ver,
        };
        Ok(classify::classify(&self.seq, &input, &self.eval)?)
    }
}

fn name(configured: &Option<String>, default: &str) -> String {
    configured.clone().unwrap_or_else(|| default.to_string())
}

/// Runs `stage` and returns the artifacts it produces.
pub fn execute(cfg: &ExperimentConfig, stage: Stage, opts: Options) -> Result<Artifacts, CliError> {
    let ctx = Context::new(cfg)?;
    let out = &cfg.outputs;
    let mut files = Artifacts::new();
    let wants = |requested: bool, this: Stage| stage == this || (stage == Stage::Run && (requested || out.is_empty()));

    if opts.seed_check {
        let residuals = ctx.seq.recurrence_residuals();
        let worst = residuals.iter().map(|r| r.1).fold(0.0, f64::max);
        if worst > SEED_TOL {
            let k = residuals.iter().find(|r| r.1 == worst).map(|r| r.0);
            return Err(CliError::config(format!(
                "recurrence residual {worst:.3e} at index {k:?} exceeds {SEED_TOL:e}"
            )));
        }
        files.insert(
            "seed_check.json".into(),
            ctx.envelope("seed_check", json!({ "max_residual": worst, "tolerance": SEED_TOL, "residuals": residuals }))?,
        );
    }

    if wants(out.sequence_csv.is_some(), Stage::Gen) {
        files.insert(name(&out.sequence_csv, "sequence.csv"), ctx.seq.to_csv().into_bytes());
    }
    if stage == Stage::Gen {
        return Ok(files);
    }
    if stage == Stage::Render {
        let r = out
            .render
            .as_ref()
            .ok_or_else(|| CliError::config("config has no [outputs.render] section"))?;
        render_files(&ctx, r, &mut files)?;
        return Ok(files);
    }

    let crit = ctx.critical_points()?;
    if wants(out.critical_csv.is_some(), Stage::Crit) {
        files.insert(name(&out.critical_csv, "critical.csv"), critical::to_csv(&crit).into_bytes());
    }
    if stage == Stage::Crit {
        return Ok(files);
    }

    {
        let eps = ctx.epsilons()?;
        let ver = ctx.verifications(&eps)?;
        if wants(out.verify_json.is_some(), Stage::Verify) {
            let data = json!({
                "epsilons": eps,
                "all_pass": ver.iter().all(|v| v.pass),
                "records": ver,
            });
            files.insert(name(&out.verify_json, "verify.json"), ctx.envelope("verify", data)?);
        }
        if stage == Stage::Verify {
            return Ok(files);
        }
        let class = ctx.classification(&crit, &eps, &ver)?;
        if wants(out.classification_json.is_some(), Stage::Classify) {
            files.insert(
                name(&out.classification_json, "classification.json"),
                ctx.envelope("classification", &class)?,
            );
        }
        if stage == Stage::Classify {
            return Ok(files);
        }
    }

    if let Some(r) = &out.render {
        render_files(&ctx, r, &mut files)?;
    }
    Ok(files)
}

fn render_files(ctx: &Context, r: &crate::config::RenderOutput, files: &mut Artifacts) -> Result<(), CliError> {
    let spec = r.spec(&ctx.seq)?;
    let image = render::render_image(&ctx.seq, &spec, &ctx.eval)?;
    let sidecar = json!({
        "file": r.file,
        "spec": spec,
        "sha256": hex(&Sha256::digest(&image)),
        "bytes": image.len(),
    });
    files.insert(format!("{}.json", r.file), ctx.envelope("render", sidecar)?);
    files.insert(r.file.clone(), image);
    Ok(())
}

/// Writes artifacts under `dir`, creating it when needed.
pub fn write_all(dir: &Path, files: &Artifacts) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
    for (name, bytes) in files {
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::io(format!("cannot create {}: {e}", parent.display())))?;
        }
        std::fs::write(&path, bytes).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

/// Convenience for callers that only need the verdicts.
pub fn run_classification(cfg: &ExperimentConfig) -> Result<Classification, CliError> {
    let ctx = Context::new(cfg)?;
    let crit = ctx.critical_points()?;
    let eps = ctx.epsilons()?;
    let ver = ctx.verifications(&eps)?;
    ctx.classification(&crit, &eps, &ver)
}
