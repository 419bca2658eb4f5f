//! JSON configuration documents: one file per run or figure recipe.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::correlations::DiscordOptions;
use crate::error::{Error, Result};
use crate::experiment::{DressingChannel, DressingParams};
use crate::liouvillian::{SolveMethod, DEFAULT_KERNEL_TOL};
use crate::meanfield::MeanFieldSpec;
use crate::network::{Coupling, JumpKind, NetworkSpec, RateConvention};
use crate::spin::Spin;

/// Top-level document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkConfig>,
    #[serde(default)]
    pub solve: SolveConfig,
    #[serde(default)]
    pub measures: Vec<Measure>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub sweep: SweepSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meanfield: Option<MeanFieldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dressing: Option<DressingConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub spin: Spin,
    pub sites: usize,
    /// Defaults to all zeros.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omegas: Option<Vec<f64>>,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub couplings: Vec<CouplingConfig>,
    pub dissipation: DissipationConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_ref_label: Option<String>,
}

/// Either raw `(ux, uy)` or the constrained `u_ratio = ux/uy` with
/// `|ux + uy| + |ux − uy| = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub pair: (usize, usize),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ux: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uy: Option<f64>,
    #[serde(default)]
    pub uz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipationConfig {
    pub gain: Vec<f64>,
    pub damp: Vec<f64>,
    pub jump: JumpKind,
    #[serde(default)]
    pub rate_convention: RateConvention,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(default = "default_method")]
    pub method: SolveMethod,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Horizon for `evolve`; defaults to 50 over the smallest positive rate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

fn default_method() -> SolveMethod {
    SolveMethod::NullSpace
}

fn default_tol() -> f64 {
    DEFAULT_KERNEL_TOL
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            method: default_method(),
            tol: default_tol(),
            t_final: None,
            dt: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Smax,
    Phistar,
    Sprofile,
    Negativity,
    Concurrence,
    MutualInfo,
    Discord,
    MfArea,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::Smax => "smax",
            Measure::Phistar => "phistar",
            Measure::Sprofile => "sprofile",
            Measure::Negativity => "negativity",
            Measure::Concurrence => "concurrence",
            Measure::MutualInfo => "mutual_info",
            Measure::Discord => "discord",
            Measure::MfArea => "mf_area",
        }
    }

    /// Whether the measure needs the network steady state.
    pub fn needs_steady_state(self) -> bool {
        self != Measure::MfArea
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis1: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis2: Option<Axis>,
}

/// A swept parameter: every path in `paths` receives the same value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: String,
    pub paths: Vec<String>,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        // Weighted form keeps endpoints exact and symmetric grids hit 0 exactly.
        let n = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let i = i as f64;
                (self.start * (n - i) + self.stop * i) / n
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub format: OutputFormat,
    /// Site pair for the pair measures.
    #[serde(default = "default_pair")]
    pub pair: (usize, usize),
    /// Fill the `wall_ms` column; off by default so outputs are reproducible.
    #[serde(default)]
    pub record_wall_time: bool,
    #[serde(default)]
    pub discord: DiscordSettings,
    /// Fixed-point threshold for `mf_area`.
    #[serde(default = "default_tol_fp")]
    pub tol_fp: f64,
}

fn default_pair() -> (usize, usize) {
    (0, 1)
}

fn default_tol_fp() -> f64 {
    crate::meanfield::DEFAULT_TOL_FP
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            jobs: None,
            seed: 0,
            format: OutputFormat::Csv,
            pair: default_pair(),
            record_wall_time: false,
            discord: DiscordSettings::default(),
            tol_fp: default_tol_fp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscordSettings {
    pub restarts: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for DiscordSettings {
    fn default() -> Self {
        let d = DiscordOptions::default();
        DiscordSettings {
            restarts: d.restarts,
            tol: d.tol,
            max_iter: d.max_iter,
        }
    }
}

/// Laser-dressing block; all frequencies in rad/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DressingConfig {
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub delta_plus: f64,
    pub delta_minus: f64,
    pub channels: Vec<DressingChannel>,
    /// Reference rate for the dimensionless couplings, in rad/s.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_ref: Option<f64>,
}

impl DressingConfig {
    pub fn params(&self) -> DressingParams {
        DressingParams {
            omega_plus: self.omega_plus,
            omega_minus: self.omega_minus,
            delta_plus: self.delta_plus,
            delta_minus: self.delta_minus,
            channels: self.channels.clone(),
        }
    }
}

impl NetworkConfig {
    /// Resolve ratio couplings and defaults into a validated spec.
    pub fn to_spec(&self) -> Result<NetworkSpec> {
        let mut couplings = Vec::with_capacity(self.couplings.len());
        for (i, cc) in self.couplings.iter().enumerate() {
            let (k, l) = cc.pair;
            let coupling = match (cc.ux, cc.uy, cc.u_ratio) {
                (Some(ux), Some(uy), None) => Coupling::new(k, l, ux, uy, cc.uz),
                (None, None, Some(r)) => {
                    if r.is_nan() {
                        return Err(Error::validation(format!("network.couplings[{i}].u_ratio"), "is NaN"));
                    }
                    Coupling::from_ratio(k, l, r, cc.uz)
                }
                _ => {
                    return Err(Error::validation(
                        format!("network.couplings[{i}]"),
                        "give either both ux and uy, or u_ratio alone",
                    ))
                }
            };
            couplings.push(coupling);
        }
        let spec = NetworkSpec {
            spin: self.spin,
            sites: self.sites,
            omegas: self.omegas.clone().unwrap_or_else(|| vec![0.0; self.sites]),
            epsilon: self.epsilon,
            couplings,
            gains: self.dissipation.gain.clone(),
            damps: self.dissipation.damp.clone(),
            jump: self.dissipation.jump,
            rate_convention: self.dissipation.rate_convention,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl std::str::FromStr for Config {
    type Err = Error;

    /// Parse and validate a document.
    fn from_str(text: &str) -> Result<Config> {
        let config: Config = serde_json::from_str(text).map_err(parse_error)?;
        config.validate()?;
        Ok(config)
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        text.parse()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn network_spec(&self) -> Result<NetworkSpec> {
        match &self.network {
            Some(n) => n.to_spec(),
            None => Err(Error::validation("network", "block is required")),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(n) = &self.network {
            let spec = n.to_spec()?;
            let (k, l) = self.sweep.pair;
            let needs_pair = self.measures.iter().any(|m| m.needs_steady_state());
            if needs_pair && (k == l || k >= spec.sites || l >= spec.sites) {
                return Err(Error::validation(
                    "sweep.pair",
                    format!(
                        "({k}, {l}) is not a pair of distinct sites of a {}-site network",
                        spec.sites
                    ),
                ));
            }
        }
        for m in &self.measures {
            if m.needs_steady_state() && self.network.is_none() {
                return Err(Error::validation(
                    "network",
                    format!("block is required for measure {}", m.name()),
                ));
            }
            if *m == Measure::MfArea && self.meanfield.is_none() {
                return Err(Error::validation("meanfield", "block is required for measure mf_area"));
            }
        }
        if let Some(mf) = &self.meanfield {
            mf.validate()?;
        }
        if !(self.solve.tol > 0.0 && self.solve.tol < 1.0) {
            return Err(Error::validation(
                "solve.tol",
                format!("{} outside (0, 1)", self.solve.tol),
            ));
        }
        for (name, v) in [("solve.t_final", self.solve.t_final), ("solve.dt", self.solve.dt)] {
            if let Some(x) = v {
                if !(x > 0.0 && x.is_finite()) {
                    return Err(Error::validation(name, format!("{x} must be positive")));
                }
            }
        }
        if self.sweep.jobs == Some(0) {
            return Err(Error::validation("sweep.jobs", "must be at least 1"));
        }
        if self.grid.axis1.is_none() && self.grid.axis2.is_some() {
            return Err(Error::validation("grid.axis2", "requires grid.axis1"));
        }
        let raw = serde_json::to_value(self).expect("config serializes");
        for (label, axis) in [("grid.axis1", &self.grid.axis1), ("grid.axis2", &self.grid.axis2)] {
            let Some(axis) = axis else { continue };
            if axis.points == 0 {
                return Err(Error::validation(format!("{label}.points"), "must be at least 1"));
            }
            if !(axis.start.is_finite() && axis.stop.is_finite()) {
                return Err(Error::validation(label, "start and stop must be finite"));
            }
            if axis.paths.is_empty() {
                return Err(Error::validation(
                    format!("{label}.paths"),
                    "must list at least one path",
                ));
            }
            for (i, path) in axis.paths.iter().enumerate() {
                if FIXED_PATHS.contains(&path.as_str()) {
                    return Err(Error::validation(
                        format!("{label}.paths[{i}]"),
                        format!("{path} changes the output layout and cannot be swept"),
                    ));
                }
                let mut probe = raw.clone();
                set_path(&mut probe, path, axis.start)
                    .map_err(|reason| Error::validation(format!("{label}.paths[{i}]"), reason))?;
            }
        }
        Ok(())
    }

    /// The document with each `(path, value)` assignment applied.
    pub fn with_assignments(&self, assignments: &[(&str, f64)]) -> Result<Config> {
        let mut raw = serde_json::to_value(self).expect("config serializes");
        for (path, value) in assignments {
            set_path(&mut raw, path, *value).map_err(|reason| Error::validation(*path, reason))?;
        }
        let config: Config = serde_json::from_value(raw).map_err(|e| Error::validation("grid", e.to_string()))?;
        Ok(config)
    }
}

/// Paths whose change would alter the column layout.
const FIXED_PATHS: &[&str] = &["network.spin", "network.sites"];

/// Detuning `Δ₁₂ = ω₁ − ω₂`: sets `ω₁ = ω₂ + Δ`.
pub const DETUNING_PATH: &str = "network.detuning";

/// Mean-field anisotropy `u^x − u^y` at fixed `u^x + u^y`.
pub const MF_DIFF_PATH: &str = "meanfield.u_diff";

enum Segment<'a> {
    Key(&'a str),
    Index(usize),
}

fn segments(path: &str) -> std::result::Result<Vec<Segment<'_>>, String> {
    let mut out = Vec::new();
    for part in path.split('.') {
        let (key, mut rest) = match part.find('[') {
            Some(i) => (&part[..i], &part[i..]),
            None => (part, ""),
        };
        if key.is_empty() {
            return Err(format!("malformed path {path:?}"));
        }
        out.push(Segment::Key(key));
        while !rest.is_empty() {
            let close = rest.find(']').ok_or_else(|| format!("malformed path {path:?}"))?;
            let idx = rest[1..close]
                .parse::<usize>()
                .map_err(|_| format!("malformed index in {path:?}"))?;
            out.push(Segment::Index(idx));
            rest = &rest[close + 1..];
            if !rest.is_empty() && !rest.starts_with('[') {
                return Err(format!("malformed path {path:?}"));
            }
        }
    }
    Ok(out)
}

fn lookup<'v>(root: &'v mut Value, path: &str) -> std::result::Result<&'v mut Value, String> {
    let mut node = root;
    for seg in segments(path)? {
        node = match seg {
            Segment::Key(k) => node.get_mut(k),
            Segment::Index(i) => node.get_mut(i),
        }
        .ok_or_else(|| format!("{path} does not resolve to a field of this document"))?;
    }
    Ok(node)
}

/// Assign a number to the numeric field at `path`.
pub fn set_path(root: &mut Value, path: &str, value: f64) -> std::result::Result<(), String> {
    let number = serde_json::Number::from_f64(value).ok_or_else(|| format!("{value} is not a finite number"))?;
    if path == DETUNING_PATH {
        let omegas = root
            .get_mut("network")
            .ok_or("network.detuning needs a network block")?;
        let sites = omegas.get("sites").and_then(Value::as_u64).unwrap_or(0) as usize;
        if sites < 2 {
            return Err("network.detuning needs at least two sites".into());
        }
        let current = omegas.get("omegas").and_then(Value::as_array).cloned();
        let mut list: Vec<f64> = match current {
            Some(v) => v.iter().map(|x| x.as_f64().unwrap_or(0.0)).collect(),
            None => vec![0.0; sites],
        };
        list[0] = list[1] + value;
        omegas["omegas"] = serde_json::to_value(list).expect("numbers serialize");
        return Ok(());
    }
    if path == MF_DIFF_PATH {
        let mf = root
            .get_mut("meanfield")
            .ok_or("meanfield.u_diff needs a meanfield block")?;
        let ux = mf.get("ux").and_then(Value::as_f64).ok_or("meanfield.ux is missing")?;
        let uy = mf.get("uy").and_then(Value::as_f64).ok_or("meanfield.uy is missing")?;
        let sum = ux + uy;
        mf["ux"] = Value::from(0.5 * (sum + value));
        mf["uy"] = Value::from(0.5 * (sum - value));
        return Ok(());
    }
    let node = lookup(root, path)?;
    if !node.is_number() {
        return Err(format!("{path} is not a numeric field"));
    }
    *node = Value::Number(number);
    Ok(())
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}
