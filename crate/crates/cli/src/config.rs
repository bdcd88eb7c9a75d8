//! Scenario documents: parsing, overrides and validation.

use std::path::PathBuf;

use mckit::cir::CirModel;
use mckit::physics::{FlowField, SpacePoint};
use mckit::rxsignal::{NoiseModel, Segment};
use mckit::stochsim::{
    Behavior, FirstOrderReaction, InitGroup, MesoGrid, MesoProbe, Probe, Region, Species, Surface,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Concentration,
    Cir,
    Rmse,
    Isi,
    Correlation,
    Mobile,
    SimulateMicro,
    SimulateMeso,
    Fit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl TimeGrid {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_start >= 0.0 && self.t_end >= self.t_start) {
            return Err(format!("require 0 <= t_start <= t_end, got [{}, {}]", self.t_start, self.t_end));
        }
        if self.points == 0 {
            return Err("points must be >= 1".into());
        }
        if self.spacing == Spacing::Log && self.t_start <= 0.0 {
            return Err("log spacing requires t_start > 0".into());
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.t_start];
        }
        let n = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let f = i as f64 / n;
                match self.spacing {
                    Spacing::Linear => self.t_start + f * (self.t_end - self.t_start),
                    Spacing::Log => (self.t_start.ln() + f * (self.t_end / self.t_start).ln()).exp(),
                }
            })
            .collect()
    }
}

/// One evaluation point of a concentration scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentrationCurve {
    pub label: String,
    pub at: SpacePoint,
    #[serde(default)]
    pub velocity: SpacePoint,
    /// First-order degradation rate, 1/s.
    #[serde(default)]
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentrationParams {
    /// Released molecules.
    pub n: f64,
    pub diffusion: f64,
    #[serde(default)]
    pub source: SpacePoint,
    pub curves: Vec<ConcentrationCurve>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CirQuantity {
    #[default]
    Cir,
    AbsorbedFraction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CirCurve {
    pub label: String,
    pub model: CirModel,
    #[serde(default)]
    pub quantity: CirQuantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CirParams {
    pub curves: Vec<CirCurve>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RmseParams {
    pub n_tx: Vec<u64>,
    pub h_min: f64,
    pub h_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsiParams {
    pub model: CirModel,
    pub n_tx: f64,
    pub t_symb: f64,
    pub samples_per_symbol: usize,
    pub memory: usize,
    #[serde(default)]
    pub r_int: f64,
    pub symbols: Vec<f64>,
    #[serde(default)]
    pub noise: NoiseModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationParams {
    pub n_tx: u64,
    pub d0: f64,
    pub a_rx: f64,
    /// One curve per diffusion coefficient.
    pub diffusions: Vec<f64>,
    /// First observation time; defaults to the peak time `d0²/(6D)` of each curve.
    #[serde(default)]
    pub t1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MobileParams {
    pub diffusion: f64,
    pub d0: f64,
    pub a_rx: f64,
    pub n_tx: f64,
    /// One curve per ratio `D_tx/D = D_rx/D`.
    pub ratios: Vec<f64>,
    pub tau1: f64,
    /// Observation time after release; defaults to the peak time with static nodes.
    #[serde(default)]
    pub t: Option<f64>,
    /// Adds Monte Carlo columns from `realizations` samples.
    #[serde(default)]
    pub monte_carlo: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FlowConfig {
    None,
    Uniform { v: SpacePoint },
    Poiseuille { v0: f64, a_c: f64 },
}

impl FlowConfig {
    pub fn field(&self) -> FlowField {
        match *self {
            FlowConfig::None => FlowField::None,
            FlowConfig::Uniform { v } => FlowField::UniformConstant { v },
            FlowConfig::Poiseuille { v0, a_c } => FlowField::Poiseuille { v0, a_c },
        }
    }
}

fn flow_none() -> FlowConfig {
    FlowConfig::None
}

fn default_pipe() -> f64 {
    mckit::stochsim::DUMBBELL_PIPE
}

fn default_dumbbell_d() -> f64 {
    1e-10
}

fn default_molecules() -> usize {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvConfig {
    /// Built-in two-chamber geometry; molecules start uniformly in the left
    /// cube and the far face of the right cube is observed.
    Dumbbell {
        #[serde(default = "default_pipe")]
        pipe_length: f64,
        #[serde(default = "default_dumbbell_d")]
        diffusion: f64,
        #[serde(default = "default_molecules")]
        molecules: usize,
    },
    Custom {
        #[serde(default)]
        regions: Vec<Region>,
        #[serde(default)]
        surfaces: Vec<Surface>,
        #[serde(default)]
        default_behavior: Option<Behavior>,
        species: Vec<Species>,
        #[serde(default)]
        reactions: Vec<FirstOrderReaction>,
        #[serde(default = "flow_none")]
        flow: FlowConfig,
    },
}

fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MicroParams {
    pub environment: EnvConfig,
    #[serde(default)]
    pub init: Vec<InitGroup>,
    #[serde(default)]
    pub probes: Vec<Probe>,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "one_usize")]
    pub sample_every: usize,
    /// Normalization of probe values; defaults to the number of released molecules.
    #[serde(default)]
    pub n_tx: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MesoInit {
    pub species: usize,
    pub subvolume: usize,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MesoParams {
    pub grid: MesoGrid,
    pub init: Vec<MesoInit>,
    pub probes: Vec<MesoProbe>,
    #[serde(default)]
    pub n_tx: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitParams {
    /// CSV trace with a header row and `t, concentration` columns.
    #[serde(default)]
    pub trace: Option<PathBuf>,
    /// Inline `(t, concentration)` samples, used when `trace` is absent.
    #[serde(default)]
    pub samples: Vec<[f64; 2]>,
    pub segments: Vec<Segment>,
    #[serde(default)]
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    Concentration(ConcentrationParams),
    Cir(CirParams),
    Rmse(RmseParams),
    Isi(IsiParams),
    Correlation(CorrelationParams),
    Mobile(MobileParams),
    SimulateMicro(MicroParams),
    SimulateMeso(MesoParams),
    Fit(FitParams),
}

fn one() -> u64 {
    1
}

/// Raw top-level document before the kind-specific parameters are typed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default)]
    name: String,
    kind: Kind,
    #[serde(default = "one")]
    seed: u64,
    #[serde(default = "one_usize")]
    realizations: usize,
    #[serde(default)]
    time: Option<TimeGrid>,
    params: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub kind: Kind,
    pub seed: u64,
    pub realizations: usize,
    pub time: Option<TimeGrid>,
    pub params: Params,
}

fn typed<T: DeserializeOwned>(value: Value, prefix: &str) -> Result<T, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let location = if path == "." { prefix.to_string() } else { format!("{prefix}.{path}") };
        CliError::Validation { location, message: e.into_inner().to_string() }
    })
}

/// Sets `path` (dot separated) in `doc` to `raw`, parsed as JSON when possible.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (path, raw) = assignment.split_once('=').ok_or_else(|| CliError::Validation {
        location: format!("--set {assignment}"),
        message: "expected key=value".into(),
    })?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = doc;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        let last = i + 1 == keys.len();
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert(key.to_string(), value);
                    return Ok(());
                }
                map.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = key.parse().map_err(|_| CliError::Validation {
                    location: format!("--set {path}"),
                    message: format!("`{key}` is not an array index"),
                })?;
                let len = items.len();
                let slot = items.get_mut(idx).ok_or_else(|| CliError::Validation {
                    location: format!("--set {path}"),
                    message: format!("index {idx} out of range (length {len})"),
                })?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => {
                return Err(CliError::Validation {
                    location: format!("--set {path}"),
                    message: format!("`{key}` does not refer into an object or array"),
                })
            }
        };
    }
    Ok(())
}

impl Scenario {
    /// Parses a JSON document, applying `key=value` overrides first.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let mut doc: Value = serde_json::from_str(text).map_err(|e| CliError::Validation {
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        Self::from_value(doc)
    }

    pub fn from_value(doc: Value) -> Result<Self, CliError> {
        let raw: RawScenario = typed(doc, "scenario")?;
        let p = raw.params;
        let params = match raw.kind {
            Kind::Concentration => Params::Concentration(typed(p, "params")?),
            Kind::Cir => Params::Cir(typed(p, "params")?),
            Kind::Rmse => Params::Rmse(typed(p, "params")?),
            Kind::Isi => Params::Isi(typed(p, "params")?),
            Kind::Correlation => Params::Correlation(typed(p, "params")?),
            Kind::Mobile => Params::Mobile(typed(p, "params")?),
            Kind::SimulateMicro => Params::SimulateMicro(typed(p, "params")?),
            Kind::SimulateMeso => Params::SimulateMeso(typed(p, "params")?),
            Kind::Fit => Params::Fit(typed(p, "params")?),
        };
        let s = Scenario {
            name: raw.name,
            kind: raw.kind,
            seed: raw.seed,
            realizations: raw.realizations,
            time: raw.time,
            params,
        };
        s.validate()?;
        Ok(s)
    }

    fn needs_time(&self) -> bool {
        matches!(
            self.kind,
            Kind::Concentration | Kind::Cir | Kind::Correlation | Kind::Mobile | Kind::SimulateMeso
        )
    }

    /// Structural checks that do not need the numeric models.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |location: &str, message: String| CliError::Validation { location: location.into(), message };
        match (&self.time, self.needs_time()) {
            (Some(t), _) => t.validate().map_err(|m| bad("time", m))?,
            (None, true) => return Err(bad("time", format!("kind {:?} requires a time grid", self.kind))),
            (None, false) => {}
        }
        if self.realizations == 0 {
            return Err(bad("realizations", "must be >= 1".into()));
        }
        let non_empty = |n: usize, loc: &str| if n == 0 { Err(bad(loc, "must not be empty".into())) } else { Ok(()) };
        match &self.params {
            Params::Concentration(p) => non_empty(p.curves.len(), "params.curves")?,
            Params::Cir(p) => non_empty(p.curves.len(), "params.curves")?,
            Params::Rmse(p) => {
                non_empty(p.n_tx.len(), "params.n_tx")?;
                if !(p.h_min > 0.0 && p.h_max >= p.h_min && p.h_max < 1.0) || p.points < 2 {
                    return Err(bad("params", "require 0 < h_min <= h_max < 1 and points >= 2".into()));
                }
            }
            Params::Isi(p) => non_empty(p.symbols.len(), "params.symbols")?,
            Params::Correlation(p) => {
                non_empty(p.diffusions.len(), "params.diffusions")?;
                if self.realizations < 1000 {
                    return Err(bad("realizations", "correlation estimates need >= 1000 realizations".into()));
                }
            }
            Params::Mobile(p) => {
                non_empty(p.ratios.len(), "params.ratios")?;
                if p.monte_carlo && self.realizations < 100 {
                    return Err(bad("realizations", "Monte Carlo columns need >= 100 realizations".into()));
                }
            }
            Params::SimulateMicro(p) => {
                if let EnvConfig::Custom { .. } = p.environment {
                    non_empty(p.init.len(), "params.init")?;
                    non_empty(p.probes.len(), "params.probes")?;
                }
            }
            Params::SimulateMeso(p) => non_empty(p.probes.len(), "params.probes")?,
            Params::Fit(p) => {
                non_empty(p.segments.len(), "params.segments")?;
                if p.trace.is_none() && p.samples.is_empty() {
                    return Err(bad("params", "either trace or samples is required".into()));
                }
            }
        }
        Ok(())
    }

    /// Canonical JSON form; parsing it yields an equal scenario.
    pub fn to_value(&self) -> Value {
        let raw = RawScenario {
            name: self.name.clone(),
            kind: self.kind,
            seed: self.seed,
            realizations: self.realizations,
            time: self.time,
            params: serde_json::to_value(&self.params).expect("params serialize"),
        };
        serde_json::to_value(raw).expect("scenario serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("scenario serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONC: &str = r#"{
        "kind": "concentration",
        "time": {"t_start": 1e-6, "t_end": 1e-4, "points": 5},
        "params": {"n": 1e4, "diffusion": 4.5e-10,
                   "curves": [{"label": "a", "at": {"x": 3e-7, "y": 0, "z": 0}}]}
    }"#;

    #[test]
    fn parses_with_defaults() {
        let s = Scenario::parse(CONC, &[]).unwrap();
        assert_eq!(s.seed, 1);
        assert_eq!(s.time.unwrap().values().len(), 5);
        let back = Scenario::from_value(s.to_value()).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn unknown_key_is_echoed() {
        let text = CONC.replace("\"diffusion\"", "\"diffusoin\"");
        let err = Scenario::parse(&text, &[]).unwrap_err();
        assert!(err.to_string().contains("diffusoin"), "{err}");
        assert_eq!(err.exit_code(), 2);
        let text = CONC.replace("\"kind\"", "\"seed\": 3, \"extra\": 1, \"kind\"");
        assert!(Scenario::parse(&text, &[]).unwrap_err().to_string().contains("extra"));
    }

    #[test]
    fn overrides() {
        let s = Scenario::parse(CONC, &["params.diffusion=1e-9".into(), "params.curves.0.label=b".into()]).unwrap();
        let Params::Concentration(p) = &s.params else { panic!() };
        assert_eq!(p.diffusion, 1e-9);
        assert_eq!(p.curves[0].label, "b");
        assert!(Scenario::parse(CONC, &["params.curves.4.label=b".into()]).is_err());
        assert!(Scenario::parse(CONC, &["params.oops=1".into()]).is_err());
        assert!(Scenario::parse(CONC, &["nonsense".into()]).is_err());
    }

    #[test]
    fn grid_values() {
        let g = TimeGrid { t_start: 1e-3, t_end: 1e-1, points: 3, spacing: Spacing::Log };
        let v = g.values();
        assert!((v[1] - 1e-2).abs() < 1e-15 && v[2] == 1e-1 || (v[2] - 1e-1).abs() < 1e-16);
        assert!(TimeGrid { t_start: 0.0, t_end: 1.0, points: 3, spacing: Spacing::Log }.validate().is_err());
        assert!(TimeGrid { t_start: 2.0, t_end: 1.0, points: 3, spacing: Spacing::Linear }.validate().is_err());
    }

    #[test]
    fn missing_time_grid() {
        let text = r#"{"kind":"cir","params":{"curves":[]}}"#;
        assert_eq!(Scenario::parse(text, &[]).unwrap_err().exit_code(), 2);
    }
}
