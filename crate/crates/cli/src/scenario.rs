//! Scenario file schema (version 1). A scenario is either a sweep scenario
//! (moving set, start point, prescriptions) or a play scenario (input
//! curve, characteristic set, mode). Parsing and validation failures name
//! the offending field.

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use moreau::bvpath::BVPath;
use moreau::geometry::{ConvexSet, Vector};
use moreau::movingset::MovingSet;
use moreau::play::PlayInput;
use moreau::solver::{JumpKind, JumpPrescription, SolverConfig};

pub const SCHEMA_VERSION: u64 = 1;

pub const SWEEP_CHECKS: &[&str] = &["vi_residual", "contraction", "variation_bound"];
pub const PLAY_CHECKS: &[&str] = &["play_properties", "pipeline_equivalence"];

#[derive(Debug)]
pub enum Scenario {
    Sweep(SweepScenario),
    Play(PlayScenario),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepScenario {
    #[allow(dead_code)]
    pub schema_version: u64,
    pub moving_set: MovingSet,
    pub y0: Vector,
    /// Second start for the contraction check; derived when absent.
    #[serde(default)]
    pub y0_alt: Option<Vector>,
    #[serde(default)]
    pub prescriptions: Vec<JumpPrescription>,
    #[serde(default)]
    pub config: SolverConfig,
    #[serde(default)]
    pub checks: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayScenario {
    #[allow(dead_code)]
    pub schema_version: u64,
    pub play: PlayBlock,
    pub mode: PlayMode,
    #[serde(default)]
    pub config: SolverConfig,
    #[serde(default)]
    pub checks: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayBlock {
    pub u: BVPath,
    #[serde(rename = "Z")]
    pub set: ConvexSet,
    pub z0: Vector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
pub enum PlayMode {
    P,
    Pbar,
    #[serde(rename = "segment_jump_equiv")]
    SegmentJumpEquiv,
}

impl PlayBlock {
    pub fn input(&self) -> PlayInput {
        PlayInput::new(self.u.clone(), self.set.clone(), self.z0.clone())
    }
}

/// Parse and validate a scenario document. Every error message names the
/// field that caused it.
pub fn parse(text: &str) -> Result<Scenario> {
    let value: serde_json::Value =
        serde_json::from_str(text).context("scenario is not valid JSON")?;
    let version = value
        .get("schema_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| anyhow!("missing or non-integer field schema_version"))?;
    if version != SCHEMA_VERSION {
        bail!("unsupported schema_version {version}, expected {SCHEMA_VERSION}");
    }
    let scenario = if value.get("play").is_some() {
        let s: PlayScenario = serde_json::from_value(value).context("invalid play scenario")?;
        Scenario::Play(s)
    } else if value.get("moving_set").is_some() {
        let s: SweepScenario =
            serde_json::from_value(value).context("invalid sweep scenario")?;
        Scenario::Sweep(s)
    } else {
        bail!("scenario must contain either a moving_set or a play field");
    };
    validate(&scenario)?;
    Ok(scenario)
}

fn validate(scenario: &Scenario) -> Result<()> {
    match scenario {
        Scenario::Sweep(s) => {
            s.config
                .validate()
                .map_err(|e| anyhow!("invalid config: {e}"))?;
            s.moving_set
                .validate(&s.config.projection)
                .map_err(|e| anyhow!("invalid moving_set: {e}"))?;
            if !s.y0.is_finite() || s.y0.dim() != s.moving_set.dim() {
                bail!(
                    "invalid y0: expected {} finite coordinates",
                    s.moving_set.dim()
                );
            }
            if let Some(alt) = &s.y0_alt {
                if !alt.is_finite() || alt.dim() != s.moving_set.dim() {
                    bail!("invalid y0_alt: dimension mismatch");
                }
            }
            for p in &s.prescriptions {
                if !p.t.is_finite() {
                    bail!("invalid prescriptions: non-finite time");
                }
                if let JumpKind::SegmentPlay { substeps } = &p.kind {
                    if *substeps == 0 {
                        bail!("invalid prescriptions: substeps must be >= 1");
                    }
                }
            }
            for c in &s.checks {
                if !SWEEP_CHECKS.contains(&c.as_str()) {
                    bail!(
                        "invalid checks: unknown checker {c:?} (available: {})",
                        SWEEP_CHECKS.join(", ")
                    );
                }
            }
        }
        Scenario::Play(s) => {
            s.config
                .validate()
                .map_err(|e| anyhow!("invalid config: {e}"))?;
            s.play
                .set
                .validate(&s.config.projection)
                .map_err(|e| anyhow!("invalid play.Z: {e}"))?;
            s.play
                .u
                .validate()
                .map_err(|e| anyhow!("invalid play.u: {e}"))?;
            if !s.play.u.right_continuous {
                bail!("invalid play.u: must be right_continuous");
            }
            if s.play.z0.dim() != s.play.set.dim() || s.play.u.dim() != s.play.set.dim() {
                bail!("invalid play.z0: dimension mismatch between u, Z and z0");
            }
            for c in &s.checks {
                if !PLAY_CHECKS.contains(&c.as_str()) {
                    bail!(
                        "invalid checks: unknown checker {c:?} (available: {})",
                        PLAY_CHECKS.join(", ")
                    );
                }
            }
        }
    }
    Ok(())
}
