// SPDX-License-Identifier: Apache-2.0

//! Run configuration: strict JSON parsing, `--set` overrides and validation.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use trion_core::experiments::SolverSettings;
use trion_core::{MagnetoModel, PulseSequence, SystemParams, TrionError};

/// Marks a manifest document so it can be fed back as a config.
pub const MANIFEST_FORMAT: &str = "trion-dynamics-manifest/1";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    #[default]
    Rabi,
    Ramsey,
    Coherence,
    Map,
    Zeeman,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Rabi => "rabi",
            Experiment::Ramsey => "ramsey",
            Experiment::Coherence => "coherence",
            Experiment::Map => "map",
            Experiment::Zeeman => "zeeman",
        }
    }
}

/// A grid axis: either explicit values or `count` evenly spaced points from
/// `start` to `stop` inclusive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, try_from = "Value")]
pub enum AxisSpec {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl TryFrom<Value> for AxisSpec {
    type Error = String;

    fn try_from(v: Value) -> Result<Self, String> {
        match v {
            Value::Array(items) => items
                .into_iter()
                .map(|x| x.as_f64().ok_or_else(|| format!("axis values must be numbers, got {x}")))
                .collect::<Result<Vec<_>, _>>()
                .map(AxisSpec::Values),
            Value::Object(map) => {
                if let Some(k) = map.keys().find(|k| !matches!(k.as_str(), "start" | "stop" | "count")) {
                    return Err(format!("unknown field `{k}`, expected `start`, `stop` or `count`"));
                }
                let num = |k: &str| {
                    map.get(k).and_then(Value::as_f64).ok_or_else(|| format!("missing or non-numeric field `{k}`"))
                };
                let count = map
                    .get("count")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| "missing or non-integer field `count`".to_string())?;
                Ok(AxisSpec::Range { start: num("start")?, stop: num("stop")?, count: count as usize })
            }
            other => Err(format!("expected a list of numbers or {{start, stop, count}}, got {other}")),
        }
    }
}

impl AxisSpec {
    pub fn range(start: f64, stop: f64, count: usize) -> Self {
        AxisSpec::Range { start, stop, count }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            AxisSpec::Values(v) => v.clone(),
            AxisSpec::Range { count: 1, start, .. } => vec![*start],
            AxisSpec::Range { start, stop, count } => {
                (0..*count).map(|k| start + (stop - start) * k as f64 / (*count - 1) as f64).collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    /// Single-pulse areas for `rabi`, units of π.
    pub areas: AxisSpec,
    /// Fine delays for `ramsey` and `coherence`, fs.
    pub fine_delays: AxisSpec,
    /// Coarse delays for `coherence`, ps.
    pub coarse_delays: AxisSpec,
    /// Per-pulse areas for `map`, units of π.
    pub map_areas: AxisSpec,
    /// Fine delays for `map`, fs.
    pub map_fine_delays: AxisSpec,
    /// Per-pulse area for `ramsey` and `coherence`, units of π.
    pub pulse_area_pi: f64,
    /// Largest field for `zeeman`, T.
    pub b_max: f64,
    pub b_points: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Self {
            areas: AxisSpec::range(0.0, 4.25, 81),
            fine_delays: AxisSpec::range(0.0, 11.0, 111),
            coarse_delays: AxisSpec::range(80.0, 180.2, 31),
            map_areas: AxisSpec::range(0.0, 2.0, 61),
            map_fine_delays: AxisSpec::range(0.0, 11.0, 61),
            pulse_area_pi: 0.5,
            b_max: 5.0,
            b_points: 51,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub system: SystemParams,
    pub sequence: PulseSequence,
    pub magneto: MagnetoModel,
    pub grids: Grids,
    pub solver: SolverSettings,
    pub output_dir: PathBuf,
    /// Seed for randomized batteries (`selftest`).
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::default(),
            system: SystemParams::default(),
            sequence: PulseSequence::default(),
            magneto: MagnetoModel::default(),
            grids: Grids::default(),
            solver: SolverSettings::default(),
            output_dir: PathBuf::from("out"),
            seed: 0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config is not valid JSON: {0}")]
    Syntax(serde_json::Error),
    #[error("config key `{key}`: {message}")]
    Key { key: String, message: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config key `{key}` is ambiguous; use one of {candidates:?}")]
    Ambiguous { key: String, candidates: Vec<String> },
    #[error("override `{0}` is not of the form key=value")]
    OverrideSyntax(String),
    #[error("config key `{key}` = {value}: {reason}")]
    OutOfRange { key: String, value: f64, reason: String },
}

fn key_error(path: String, e: serde_json::Error) -> ConfigError {
    let key = if path.is_empty() || path == "." { "<root>".to_string() } else { path };
    ConfigError::Key { key, message: e.to_string() }
}

fn from_value(v: Value) -> Result<RunConfig, ConfigError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        key_error(path, e.into_inner())
    })
}

/// Parses a config document (or a run manifest) without validating it.
fn parse_unvalidated(text: &str) -> Result<RunConfig, ConfigError> {
    let v: Value = serde_json::from_str(text).map_err(ConfigError::Syntax)?;
    let v = match v {
        Value::Object(mut m) if m.get("format").and_then(Value::as_str) == Some(MANIFEST_FORMAT) => {
            m.remove("config").ok_or_else(|| ConfigError::Key { key: "config".into(), message: "missing".into() })?
        }
        other => other,
    };
    from_value(v)
}

/// Parses and validates a config document; a run manifest is accepted too.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let c = parse_unvalidated(text)?;
    c.validate()?;
    Ok(c)
}

/// Builds the effective config from an optional document plus overrides.
pub fn load_config(
    text: Option<&str>,
    experiment: Option<Experiment>,
    detuning: Option<f64>,
    overrides: &[String],
) -> Result<RunConfig, ConfigError> {
    let mut c = match text {
        Some(t) => parse_unvalidated(t)?,
        None => RunConfig::default(),
    };
    if let Some(e) = experiment {
        c.experiment = e;
    }
    if let Some(d) = detuning {
        c.sequence.detuning = d;
    }
    if !overrides.is_empty() {
        let mut v = serde_json::to_value(&c).expect("config serializes");
        for o in overrides {
            apply_override(&mut v, o)?;
        }
        c = from_value(v)?;
    }
    c.validate()?;
    Ok(c)
}

fn leaf_paths(v: &Value, prefix: &str, out: &mut Vec<String>) {
    if let Value::Object(m) = v {
        for (k, child) in m {
            let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            out.push(p.clone());
            leaf_paths(child, &p, out);
        }
    }
}

/// Resolves a dotted path, or a bare key that occurs exactly once.
fn resolve(v: &Value, key: &str) -> Result<String, ConfigError> {
    let mut all = Vec::new();
    leaf_paths(v, "", &mut all);
    if all.iter().any(|p| p == key) {
        return Ok(key.to_string());
    }
    let suffix = format!(".{key}");
    let candidates: Vec<String> = all.into_iter().filter(|p| p.ends_with(&suffix)).collect();
    match candidates.len() {
        0 => Err(ConfigError::UnknownKey(key.to_string())),
        1 => Ok(candidates.into_iter().next().unwrap()),
        _ => Err(ConfigError::Ambiguous { key: key.to_string(), candidates }),
    }
}

/// Applies one `key=value` override; the value is read as JSON, falling back
/// to a plain string.
pub fn apply_override(v: &mut Value, assignment: &str) -> Result<(), ConfigError> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| ConfigError::OverrideSyntax(assignment.to_string()))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(ConfigError::OverrideSyntax(assignment.to_string()));
    }
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    let path = resolve(v, key)?;
    let mut node = v;
    let parts: Vec<&str> = path.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        node = node.get_mut(*part).expect("resolved path exists");
    }
    let obj: &mut Map<String, Value> = node.as_object_mut().expect("resolved parent is an object");
    obj.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn range(key: &str, value: f64, reason: &str) -> ConfigError {
    ConfigError::OutOfRange { key: key.to_string(), value, reason: reason.to_string() }
}

fn model_error(section: &str, e: TrionError) -> ConfigError {
    match e {
        TrionError::OutOfRange { name, value, reason } => range(&format!("{section}.{name}"), value, reason),
        other => ConfigError::Key { key: section.to_string(), message: other.to_string() },
    }
}

fn check_axis(key: &str, spec: &AxisSpec, min: f64) -> Result<(), ConfigError> {
    if let AxisSpec::Range { start, stop, count } = spec {
        if *count == 0 {
            return Err(range(&format!("{key}.count"), 0.0, "an axis needs at least one point"));
        }
        if *count == 1 && start != stop {
            return Err(range(&format!("{key}.count"), 1.0, "a single-point range needs start == stop"));
        }
    }
    let values = spec.values();
    if values.is_empty() {
        return Err(range(key, 0.0, "an axis needs at least one point"));
    }
    for v in values {
        if !v.is_finite() {
            return Err(range(key, v, "axis values must be finite"));
        }
        if v < min {
            return Err(range(key, v, &format!("axis values must be >= {min}")));
        }
    }
    Ok(())
}

impl RunConfig {
    /// Range checks on the parameters and on the axes the experiment uses.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.system.validate().map_err(|e| model_error("system", e))?;
        self.sequence.validate().map_err(|e| model_error("sequence", e))?;
        if !(1e-12..=1e-4).contains(&self.solver.tol) {
            return Err(range("solver.tol", self.solver.tol, "tolerance must lie in [1e-12, 1e-4]"));
        }
        if !(self.solver.sample_interval > 0.0) || !self.solver.sample_interval.is_finite() {
            return Err(range("solver.sample_interval", self.solver.sample_interval, "must be positive"));
        }
        let g = &self.grids;
        match self.experiment {
            Experiment::Rabi => check_axis("grids.areas", &g.areas, 0.0)?,
            Experiment::Ramsey | Experiment::Coherence => {
                if !(g.pulse_area_pi >= 0.0) || !g.pulse_area_pi.is_finite() {
                    return Err(range("grids.pulse_area_pi", g.pulse_area_pi, "must be finite and non-negative"));
                }
                check_axis("grids.fine_delays", &g.fine_delays, f64::NEG_INFINITY)?;
                if self.experiment == Experiment::Coherence {
                    check_axis("grids.coarse_delays", &g.coarse_delays, 0.0)?;
                    // one fringe fit per coarse delay, then a three-parameter decay fit
                    let n = g.coarse_delays.values().len();
                    if n < 5 {
                        return Err(range("grids.coarse_delays", n as f64, "the decay fit needs at least 5 delays"));
                    }
                    let n = g.fine_delays.values().len();
                    if n < 8 {
                        return Err(range("grids.fine_delays", n as f64, "fringe fits need at least 8 delays"));
                    }
                }
            }
            Experiment::Map => {
                check_axis("grids.map_areas", &g.map_areas, 0.0)?;
                check_axis("grids.map_fine_delays", &g.map_fine_delays, f64::NEG_INFINITY)?;
            }
            Experiment::Zeeman => {
                self.magneto.validate().map_err(|e| model_error("magneto", e))?;
                if !(g.b_max > 0.0) || !g.b_max.is_finite() {
                    return Err(range("grids.b_max", g.b_max, "must be positive"));
                }
                if g.b_points < 2 {
                    return Err(range("grids.b_points", g.b_points as f64, "need at least two points"));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
