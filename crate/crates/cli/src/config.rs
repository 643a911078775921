//! Run configuration: one JSON document per run, overlaid by CLI flags.
//!
//! Precedence is flags > file > defaults. `--set key=value` targets dotted
//! paths into the JSON tree (`tolerances.cancellation=1e-13`); values parse
//! as JSON first and fall back to bare strings. Unknown keys are rejected.

use crate::suites::SUITE_NAMES;
use krf_core::decomp::CurvatureParts;
use krf_core::lattice::MAX_STEP_FRACTION;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Explicit reaction-flow initial state. Replaces the sampled ensemble with
/// a single run; states outside the cone (or trace-incompatible ones) are
/// flagged `hypothesis_unmet` in the summary instead of counting as
/// violations.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub r: f64,
    pub s: [f64; 3],
    pub m: [[f64; 3]; 3],
}

impl InitialState {
    pub fn to_parts(&self) -> CurvatureParts {
        let mut parts = CurvatureParts {
            r: self.r,
            s: self.s,
            m: self.m,
        };
        parts.symmetrize_m();
        parts
    }
}

/// One cosine mode `amplitude · cos(wave · x + phase)` over the grid axes
/// `(x1, y1, x2, y2)`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CosineMode {
    pub amplitude: f64,
    pub wave: [i64; 4],
    #[serde(default)]
    pub phase: f64,
}

/// Lattice potential selector. The named variants scale with `epsilon`;
/// `custom` carries explicit amplitudes and ignores `epsilon`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum Potential {
    Zero,
    CosX1,
    CosSum,
    Custom { modes: Vec<CosineMode> },
}

/// The single source of truth for a run; embedded verbatim in every report.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    /// Sample count for the identity suites and the reaction ensemble size.
    pub count: usize,
    /// Sample count for the positivity-agreement suite.
    pub positivity_samples: usize,
    pub horizon: f64,
    pub dt: f64,
    pub mu: f64,
    /// Scale handed to the random tensor sampler.
    pub scale: f64,
    pub blow_up_threshold: f64,
    pub touch_threshold: f64,
    /// Monitor level below which a run counts as a cone violation.
    pub excursion_tolerance: f64,
    /// Lower bound demanded of the eigen-sum rate at boundary touches.
    pub eigen_rhs_tolerance: f64,
    pub initial: Option<InitialState>,
    pub grid_n: usize,
    pub epsilon: f64,
    pub potential: Potential,
    pub steps: usize,
    /// Euler step as a fraction of h²; capped by the stability bound.
    pub dt_factor: f64,
    /// Snapshot cadence in steps; 0 disables snapshots.
    pub snapshot_every: usize,
    /// Per-suite tolerance overrides, keyed by suite name.
    pub tolerances: BTreeMap<String, f64>,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            count: 1000,
            positivity_samples: 10_000,
            horizon: 1.0,
            dt: 1e-3,
            mu: 0.0,
            scale: 1.0,
            blow_up_threshold: 1e6,
            touch_threshold: 1e-6,
            excursion_tolerance: 1e-7,
            eigen_rhs_tolerance: 1e-9,
            initial: None,
            grid_n: 16,
            epsilon: 0.05,
            potential: Potential::CosX1,
            steps: 100,
            dt_factor: 0.1,
            snapshot_every: 0,
            tolerances: BTreeMap::new(),
            output_dir: PathBuf::from("out"),
        }
    }
}

fn ensure(cond: bool, msg: &str) -> Result<(), ConfigError> {
    if cond {
        Ok(())
    } else {
        Err(ConfigError(msg.to_string()))
    }
}

fn finite_positive(x: f64, name: &str) -> Result<(), ConfigError> {
    ensure(
        x.is_finite() && x > 0.0,
        &format!("{name} must be finite and positive, got {x}"),
    )
}

pub fn validate(config: &RunConfig) -> Result<(), ConfigError> {
    ensure(config.count >= 1, "count must be at least 1")?;
    ensure(
        config.positivity_samples >= 1,
        "positivity_samples must be at least 1",
    )?;
    finite_positive(config.horizon, "horizon")?;
    finite_positive(config.dt, "dt")?;
    finite_positive(config.scale, "scale")?;
    finite_positive(config.blow_up_threshold, "blow_up_threshold")?;
    ensure(config.mu.is_finite(), "mu must be finite")?;
    ensure(
        config.touch_threshold.is_finite() && config.touch_threshold >= 0.0,
        "touch_threshold must be finite and nonnegative",
    )?;
    ensure(
        config.excursion_tolerance.is_finite() && config.excursion_tolerance >= 0.0,
        "excursion_tolerance must be finite and nonnegative",
    )?;
    ensure(
        config.eigen_rhs_tolerance.is_finite() && config.eigen_rhs_tolerance >= 0.0,
        "eigen_rhs_tolerance must be finite and nonnegative",
    )?;
    ensure(
        config.grid_n >= 8 && config.grid_n % 2 == 0,
        "grid_n must be even and at least 8",
    )?;
    ensure(config.epsilon.is_finite(), "epsilon must be finite")?;
    finite_positive(config.dt_factor, "dt_factor")?;
    ensure(
        config.dt_factor <= MAX_STEP_FRACTION,
        &format!("dt_factor exceeds the stability bound {MAX_STEP_FRACTION}"),
    )?;
    if let Some(init) = &config.initial {
        let finite = init.r.is_finite()
            && init.s.iter().all(|v| v.is_finite())
            && init.m.iter().flatten().all(|v| v.is_finite());
        ensure(finite, "initial state entries must be finite")?;
    }
    if let Potential::Custom { modes } = &config.potential {
        ensure(!modes.is_empty(), "custom potential needs at least one mode")?;
        for mode in modes {
            ensure(
                mode.amplitude.is_finite() && mode.phase.is_finite(),
                "custom mode amplitude and phase must be finite",
            )?;
        }
    }
    for (name, tol) in &config.tolerances {
        ensure(
            SUITE_NAMES.contains(&name.as_str()),
            &format!("unknown suite in tolerances: {name}"),
        )?;
        finite_positive(*tol, &format!("tolerances.{name}"))?;
    }
    Ok(())
}

/// Deep-merge `overlay` into `base`: objects merge key-by-key, everything
/// else replaces.
fn deep_merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (key, value) in o {
                match b.get_mut(&key) {
                    Some(slot) if slot.is_object() && value.is_object() => {
                        deep_merge(slot, value);
                    }
                    _ => {
                        b.insert(key, value);
                    }
                }
            }
        }
        (slot, value) => *slot = value,
    }
}

fn set_path(root: &mut Value, path: &str, new: Value) -> Result<(), ConfigError> {
    let segments: Vec<&str> = path.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(ConfigError(format!("empty segment in --set path {path:?}")));
    }
    let mut node = root;
    for seg in &segments[..segments.len() - 1] {
        let map = node
            .as_object_mut()
            .expect("intermediate --set nodes are objects");
        let next = map
            .entry(seg.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
        if !next.is_object() {
            *next = Value::Object(Map::new());
        }
        node = next;
    }
    let map = node
        .as_object_mut()
        .expect("intermediate --set nodes are objects");
    map.insert(segments[segments.len() - 1].to_string(), new);
    Ok(())
}

fn parse_set(entry: &str) -> Result<(&str, Value), ConfigError> {
    let (key, raw) = entry
        .split_once('=')
        .ok_or_else(|| ConfigError(format!("--set expects KEY=VALUE, got {entry:?}")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((key, value))
}

/// Resolve the effective configuration from file plus flag overlays.
pub fn load(
    file: Option<&Path>,
    sets: &[String],
    output: Option<&Path>,
    seed: Option<u64>,
) -> Result<RunConfig, ConfigError> {
    let mut value = serde_json::to_value(RunConfig::default()).expect("defaults serialize");
    if let Some(path) = file {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let overlay: Value = serde_json::from_str(&text)
            .map_err(|e| ConfigError(format!("invalid JSON in {}: {e}", path.display())))?;
        if !overlay.is_object() {
            return Err(ConfigError(format!(
                "{} must hold a JSON object",
                path.display()
            )));
        }
        deep_merge(&mut value, overlay);
    }
    for entry in sets {
        let (key, parsed) = parse_set(entry)?;
        set_path(&mut value, key, parsed)?;
    }
    if let Some(dir) = output {
        set_path(
            &mut value,
            "output_dir",
            Value::String(dir.display().to_string()),
        )?;
    }
    if let Some(s) = seed {
        set_path(&mut value, "seed", Value::from(s))?;
    }
    let config: RunConfig =
        serde_json::from_value(value).map_err(|e| ConfigError(format!("invalid config: {e}")))?;
    validate(&config)?;
    Ok(config)
}
