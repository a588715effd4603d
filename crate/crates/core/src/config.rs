//! Run configuration: which scenario, base parameters, sweep axes, output.
//!
//! Configs are JSON documents. Angle-valued entries accept plain radians or
//! multiples of π written as `"3pi/4"`, `"0.75pi"`, `"pi/8"` or `"2*pi"`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::micromaser;
use crate::scenario_a;
use crate::scenario_b;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Parses radians or a multiple of π.
pub fn parse_angle(text: &str) -> Result<f64, ConfigError> {
    let s: String = text
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect::<String>()
        .to_lowercase();
    let s = s.replace('π', "pi");
    let value = match s.find("pi") {
        None => s
            .parse::<f64>()
            .map_err(|_| bad(format!("not a number or angle: {text:?}")))?,
        Some(at) => {
            let coef = s[..at].trim_end_matches('*');
            let rest = &s[at + 2..];
            let coef = match coef {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c
                    .parse::<f64>()
                    .map_err(|_| bad(format!("bad multiple of pi: {text:?}")))?,
            };
            let denom = match rest {
                "" => 1.0,
                r => r
                    .strip_prefix('/')
                    .and_then(|d| d.parse::<f64>().ok())
                    .ok_or_else(|| bad(format!("bad angle: {text:?}")))?,
            };
            coef * std::f64::consts::PI / denom
        }
    };
    if !value.is_finite() {
        return Err(bad(format!("angle is not finite: {text:?}")));
    }
    Ok(value)
}

/// Number from a JSON value: numbers as-is, strings through [`parse_angle`].
pub fn value_to_f64(v: &Value) -> Result<f64, ConfigError> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| bad(format!("not representable: {n}"))),
        Value::String(s) => parse_angle(s),
        other => Err(bad(format!("expected a number, got {other}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    ScenarioA,
    ScenarioB,
    Micromaser,
}

impl ScenarioKind {
    pub fn id(self) -> &'static str {
        match self {
            ScenarioKind::ScenarioA => "scenario-a",
            ScenarioKind::ScenarioB => "scenario-b",
            ScenarioKind::Micromaser => "micromaser",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ScenarioKind {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "scenario-a" => Ok(Self::ScenarioA),
            "scenario-b" => Ok(Self::ScenarioB),
            "micromaser" => Ok(Self::Micromaser),
            _ => Err(bad(format!("unknown scenario {s:?}"))),
        }
    }
}

/// Parameters of one evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamSet {
    A(scenario_a::Params),
    B(scenario_b::Params),
    Micromaser(micromaser::Params),
}

impl ParamSet {
    /// `gt = π/4` without damping.
    pub fn default_for(kind: ScenarioKind) -> Self {
        match kind {
            ScenarioKind::ScenarioA => ParamSet::A(scenario_a::Params::equal(std::f64::consts::FRAC_PI_4, 0.0)),
            ScenarioKind::ScenarioB => ParamSet::B(scenario_b::Params::new(1.2, 0.0)),
            ScenarioKind::Micromaser => ParamSet::Micromaser(micromaser::Params::table1(0.0000807)),
        }
    }

    pub fn kind(&self) -> ScenarioKind {
        match self {
            ParamSet::A(_) => ScenarioKind::ScenarioA,
            ParamSet::B(_) => ScenarioKind::ScenarioB,
            ParamSet::Micromaser(_) => ScenarioKind::Micromaser,
        }
    }

    /// Settable names. `kappa_over_g` in scenario A sets both cavity rates.
    pub fn names(kind: ScenarioKind) -> &'static [&'static str] {
        match kind {
            ScenarioKind::ScenarioA => &["gt", "kappa1_over_g", "kappa2_over_g", "kappa_over_g", "fock_dim"],
            ScenarioKind::ScenarioB => &["gt", "kappa_over_g", "gap_gt", "fock_dim"],
            ScenarioKind::Micromaser => &["n_pump", "n_th", "gt", "kappa_over_g", "gamma_over_g", "fock_dim"],
        }
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<(), ConfigError> {
        if !value.is_finite() {
            return Err(bad(format!("{name} must be finite")));
        }
        if name == "fock_dim" {
            if value.fract() != 0.0 || !(2.0..=200.0).contains(&value) {
                return Err(bad(format!("fock_dim must be an integer in 2..=200, got {value}")));
            }
            self.set_fock_dim(value as usize);
            return Ok(());
        }
        let slot = match (self, name) {
            (ParamSet::A(p), "gt") => &mut p.gt,
            (ParamSet::A(p), "kappa1_over_g") => &mut p.kappa1_over_g,
            (ParamSet::A(p), "kappa2_over_g") => &mut p.kappa2_over_g,
            (ParamSet::A(p), "kappa_over_g") => {
                p.kappa1_over_g = value;
                &mut p.kappa2_over_g
            }
            (ParamSet::B(p), "gt") => &mut p.gt,
            (ParamSet::B(p), "kappa_over_g") => &mut p.kappa_over_g,
            (ParamSet::B(p), "gap_gt") => &mut p.gap_gt,
            (ParamSet::Micromaser(p), "n_pump") => &mut p.n_pump,
            (ParamSet::Micromaser(p), "n_th") => &mut p.n_th,
            (ParamSet::Micromaser(p), "gt") => &mut p.gt,
            (ParamSet::Micromaser(p), "kappa_over_g") => &mut p.kappa_over_g,
            (ParamSet::Micromaser(p), "gamma_over_g") => &mut p.gamma_over_g,
            (ps, _) => {
                return Err(bad(format!(
                    "unknown parameter {name:?} for {}; expected one of {}",
                    ps.kind(),
                    Self::names(ps.kind()).join(", ")
                )))
            }
        };
        *slot = value;
        Ok(())
    }

    pub fn set_fock_dim(&mut self, fock_dim: usize) {
        match self {
            ParamSet::A(p) => p.fock_dim = fock_dim,
            ParamSet::B(p) => p.fock_dim = fock_dim,
            ParamSet::Micromaser(p) => p.fock_dim = fock_dim,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let r = match self {
            ParamSet::A(p) => p.validate(),
            ParamSet::B(p) => p.validate(),
            ParamSet::Micromaser(p) => p.validate(),
        };
        r.map_err(|e| bad(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(bad(format!("unknown format {s:?}; expected csv or json"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Table1,
    Fig1,
}

impl FromStr for Preset {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "table1" => Ok(Preset::Table1),
            "fig1" => Ok(Preset::Fig1),
            _ => Err(bad(format!("unknown preset {s:?}; expected table1 or fig1"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub name: String,
    pub values: Vec<f64>,
}

impl SweepAxis {
    /// `name=v1,v2,...`, each value radians or a multiple of π.
    pub fn parse(spec: &str) -> Result<Self, ConfigError> {
        let (name, list) = spec
            .split_once('=')
            .ok_or_else(|| bad(format!("sweep must look like name=v1,v2: {spec:?}")))?;
        let values = list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(parse_angle)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            name: name.trim().to_string(),
            values,
        })
    }
}

/// Acceptance thresholds used when rows are checked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Absolute tolerance on each reference photon-statistics entry.
    pub table1: f64,
    /// Relative numeric-versus-closed-form concurrence gap, applied to rows
    /// with `κ/g <= secular_kappa_max`.
    pub secular_gap: f64,
    pub secular_kappa_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            table1: 0.02,
            secular_gap: 0.05,
            secular_kappa_max: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// On-disk layout of a config document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: ScenarioKind,
    #[serde(default)]
    params: serde_json::Map<String, Value>,
    #[serde(default)]
    sweep: Vec<RawAxis>,
    #[serde(default)]
    output: OutputSpec,
    #[serde(default)]
    preset: Option<Preset>,
    #[serde(default = "yes")]
    oracle: bool,
    #[serde(default = "yes")]
    both_routes: bool,
    #[serde(default)]
    fock_dim: Option<usize>,
    #[serde(default)]
    tolerances: Tolerances,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    name: String,
    values: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub base: ParamSet,
    pub sweep: Vec<SweepAxis>,
    pub output: OutputSpec,
    pub preset: Option<Preset>,
    /// Run the master-equation oracle for scenarios A and B.
    pub oracle: bool,
    /// Report the Wootters value of the closed-form state next to the
    /// formula in scenario B.
    pub both_routes: bool,
    pub fock_dim: Option<usize>,
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn new(kind: ScenarioKind) -> Self {
        Self {
            base: ParamSet::default_for(kind),
            sweep: Vec::new(),
            output: OutputSpec::default(),
            preset: None,
            oracle: true,
            both_routes: true,
            fock_dim: None,
            tolerances: Tolerances::default(),
        }
    }

    pub fn kind(&self) -> ScenarioKind {
        self.base.kind()
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| bad(format!("invalid config: {e}")))?;
        let mut cfg = RunConfig::new(raw.scenario);
        for (name, v) in &raw.params {
            cfg.base.set(name, value_to_f64(v)?)?;
        }
        cfg.sweep = raw
            .sweep
            .iter()
            .map(|a| {
                Ok(SweepAxis {
                    name: a.name.clone(),
                    values: a.values.iter().map(value_to_f64).collect::<Result<_, _>>()?,
                })
            })
            .collect::<Result<_, ConfigError>>()?;
        cfg.output = raw.output;
        cfg.preset = raw.preset;
        cfg.oracle = raw.oracle;
        cfg.both_routes = raw.both_routes;
        cfg.fock_dim = raw.fock_dim;
        cfg.tolerances = raw.tolerances;
        Ok(cfg)
    }

    /// Every parameter point, first sweep axis outermost.
    pub fn points(&self) -> Result<Vec<ParamSet>, ConfigError> {
        let mut base = self.base;
        if let Some(k) = self.fock_dim {
            base.set("fock_dim", k as f64)?;
        }
        let mut points = vec![base];
        for axis in &self.sweep {
            if axis.values.is_empty() {
                return Err(bad(format!("sweep axis {:?} has no values", axis.name)));
            }
            let mut next = Vec::with_capacity(points.len() * axis.values.len());
            for p in &points {
                for &v in &axis.values {
                    let mut q = *p;
                    q.set(&axis.name, v)?;
                    next.push(q);
                }
            }
            points = next;
        }
        for p in &points {
            p.validate()?;
        }
        Ok(points)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.preset.is_some() && self.kind() != ScenarioKind::Micromaser {
            return Err(bad("presets are only defined for the micromaser scenario"));
        }
        if self.preset.is_some() && !self.sweep.is_empty() {
            return Err(bad("a preset fixes its own sweep; remove the sweep axes"));
        }
        for t in [
            self.tolerances.table1,
            self.tolerances.secular_gap,
            self.tolerances.secular_kappa_max,
        ] {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(bad(format!("tolerances must be finite and >= 0, got {t}")));
            }
        }
        self.points().map(|_| ())
    }
}
