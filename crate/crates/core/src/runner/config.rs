use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{ModelKind, ModelSpec, Ordering, MAX_UNIFORM_ORDER};
use crate::kraus::PumpParameters;
use crate::steady::DEFAULT_TRUNCATION_CAP;

/// A model name with its options. Accepts a bare string or an object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: ModelKind,
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default)]
    pub ordering: Ordering,
    #[serde(default = "default_uniform_order")]
    pub uniform_order: usize,
    #[serde(default = "default_weak_order")]
    pub weak_order: usize,
    /// Heuristic saturation parameter; 4(gτ̄)² when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

fn default_q() -> f64 {
    0.5
}
fn default_uniform_order() -> usize {
    1
}
fn default_weak_order() -> usize {
    3
}

impl ModelConfig {
    pub fn named(name: ModelKind) -> Self {
        Self {
            name,
            q: default_q(),
            ordering: Ordering::default(),
            uniform_order: default_uniform_order(),
            weak_order: default_weak_order(),
            beta: None,
        }
    }

    /// Label used in output rows.
    pub fn label(&self) -> String {
        self.name.name().to_string()
    }

    pub fn spec(&self, params: PumpParameters) -> Result<ModelSpec> {
        let params = PumpParameters::with_q(params.g, params.tau_bar, params.r, self.q)?;
        let mut spec = ModelSpec::new(self.name, params);
        spec.ordering = self.ordering;
        spec.uniform_order = self.uniform_order;
        spec.weak_order = self.weak_order;
        spec.beta = self.beta;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::Config(format!("q must lie in (0, 1), got {}", self.q)));
        }
        if self.uniform_order > MAX_UNIFORM_ORDER {
            return Err(Error::Config(format!(
                "uniform_order {} exceeds {MAX_UNIFORM_ORDER}",
                self.uniform_order
            )));
        }
        if self.weak_order == 0 {
            return Err(Error::Config("weak_order must be at least 1".into()));
        }
        if let Some(b) = self.beta {
            if !(b.is_finite() && b >= 0.0) {
                return Err(Error::Config(format!("beta must be non-negative, got {b}")));
            }
        }
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ModelInput {
    Name(ModelKind),
    Full(ModelConfig),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ModelsInput {
    One(ModelInput),
    Many(Vec<ModelInput>),
}

/// Accepts one model or a list, each as a bare name or a full object.
fn de_models<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<ModelConfig>, D::Error> {
    let raw = match ModelsInput::deserialize(d)? {
        ModelsInput::One(m) => vec![m],
        ModelsInput::Many(v) => v,
    };
    Ok(raw
        .into_iter()
        .map(|m| match m {
            ModelInput::Name(k) => ModelConfig::named(k),
            ModelInput::Full(c) => c,
        })
        .collect())
}

/// Pump values A/κ: a list, a range object, or "START:STOP:STEPS".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PumpSpec {
    List(Vec<f64>),
    Range { start: f64, stop: f64, steps: usize },
    Text(String),
}

impl PumpSpec {
    /// Expanded pump values. A range includes both ends.
    pub fn values(&self) -> Result<Vec<f64>> {
        let vals = match self {
            PumpSpec::List(v) => v.clone(),
            PumpSpec::Range { start, stop, steps } => linspace(*start, *stop, *steps)?,
            PumpSpec::Text(s) => s.parse::<PumpSpec>()?.values()?,
        };
        if vals.is_empty() {
            return Err(Error::Config("no pump values".into()));
        }
        if let Some(v) = vals.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Config(format!("pump values must be non-negative, got {v}")));
        }
        Ok(vals)
    }
}

fn linspace(start: f64, stop: f64, steps: usize) -> Result<Vec<f64>> {
    match steps {
        0 => Err(Error::Config("pump range needs at least one step".into())),
        1 => Ok(vec![start]),
        _ => Ok((0..steps)
            .map(|k| start + (stop - start) * k as f64 / (steps - 1) as f64)
            .collect()),
    }
}

impl FromStr for PumpSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Config(format!("pump range `{s}` is not START:STOP:STEPS"));
        match parts.as_slice() {
            [single] => Ok(PumpSpec::List(vec![single.trim().parse().map_err(|_| bad())?])),
            [a, b, n] => Ok(PumpSpec::Range {
                start: a.trim().parse().map_err(|_| bad())?,
                stop: b.trim().parse().map_err(|_| bad())?,
                steps: n.trim().parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

/// Fock-space truncation: "auto" or {"n_max": N}.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    #[default]
    Auto,
    #[serde(untagged)]
    Explicit { n_max: usize },
}

/// Photon-number cutoff: "auto" (⌊(1/5)(gτ̄)⁻²⌋ for the weak model),
/// "off", or {"n_cut": N} applied to every model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cutoff {
    #[default]
    Auto,
    Off,
    #[serde(untagged)]
    Explicit { n_cut: usize },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    /// Detailed balance (all five models are phase insensitive).
    #[default]
    Recurrence,
    /// Null vector of the assembled superoperator.
    Nullspace,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    PhotonStats,
    Moments,
    Linewidth,
    Compare,
}

/// Subcommands of the runner.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Steady,
    Sweep,
    Compare,
    Linewidth,
}

impl Command {
    pub fn output(self) -> OutputKind {
        match self {
            Command::Steady => OutputKind::PhotonStats,
            Command::Sweep => OutputKind::Moments,
            Command::Compare => OutputKind::Compare,
            Command::Linewidth => OutputKind::Linewidth,
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Steady => "steady",
            Command::Sweep => "sweep",
            Command::Compare => "compare",
            Command::Linewidth => "linewidth",
        })
    }
}

/// A complete run description. Rates are in units of κ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(alias = "model", deserialize_with = "de_models")]
    pub models: Vec<ModelConfig>,
    pub g_tau_bar: f64,
    pub pump: PumpSpec,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default)]
    pub truncation: Truncation,
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
    #[serde(default = "default_cap")]
    pub truncation_cap: usize,
    #[serde(default)]
    pub cutoff: Cutoff,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<OutputKind>,
    /// Worker threads for sweeps; all cores when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

fn default_kappa() -> f64 {
    1.0
}
fn default_tail_tol() -> f64 {
    1e-10
}
fn default_cap() -> usize {
    DEFAULT_TRUNCATION_CAP
}
fn default_outputs() -> Vec<OutputKind> {
    vec![OutputKind::PhotonStats, OutputKind::Moments]
}

impl RunConfig {
    pub fn new(models: Vec<ModelKind>, g_tau_bar: f64, pump: PumpSpec) -> Self {
        Self {
            models: models.into_iter().map(ModelConfig::named).collect(),
            g_tau_bar,
            pump,
            kappa: default_kappa(),
            truncation: Truncation::Auto,
            tail_tol: default_tail_tol(),
            truncation_cap: default_cap(),
            cutoff: Cutoff::Auto,
            solver: Solver::Recurrence,
            outputs: default_outputs(),
            workers: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config from a file, or from standard input when `path` is "-".
    pub fn load(path: &Path) -> Result<Self> {
        let text = if path.as_os_str() == "-" {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Error::Config(format!("reading stdin: {e}")))?;
            s
        } else {
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("reading {}: {e}", path.display())))?
        };
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::Config("no model selected".into()));
        }
        if !(self.g_tau_bar.is_finite() && self.g_tau_bar > 0.0) {
            return Err(Error::Config(format!("g_tau_bar must be positive, got {}", self.g_tau_bar)));
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::Config(format!("kappa must be positive, got {}", self.kappa)));
        }
        if !(self.tail_tol > 0.0) {
            return Err(Error::Config(format!("tail_tol must be positive, got {}", self.tail_tol)));
        }
        if let Truncation::Explicit { n_max: 0 } = self.truncation {
            return Err(Error::Config("n_max must be at least 1".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        self.pump.values()?;
        self.models.iter().try_for_each(ModelConfig::validate)
    }

    /// Copy with the pump list expanded, as echoed in JSON output.
    pub fn resolved(&self) -> Result<Self> {
        let mut out = self.clone();
        out.pump = PumpSpec::List(self.pump.values()?);
        Ok(out)
    }

    pub fn params(&self, pump: f64) -> Result<PumpParameters> {
        PumpParameters::from_pump(pump, self.kappa, self.g_tau_bar)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg = RunConfig::from_json(r#"{"model": ["exact"], "g_tau_bar": 0.03, "pump": "0:2:5"}"#).unwrap();
        assert_eq!(cfg.models[0].name, ModelKind::Exact);
        assert_eq!(cfg.pump.values().unwrap(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(cfg.truncation, Truncation::Auto);
        assert_eq!(cfg.cutoff, Cutoff::Auto);
    }

    #[test]
    fn parses_full_config() {
        let text = r#"{
            "models": [{"name": "heuristic", "ordering": "a_dag_a", "beta": 0.01},
                       {"name": "uniform_lindblad", "uniform_order": 2}],
            "g_tau_bar": 0.15,
            "pump": {"start": 1, "stop": 3, "steps": 3},
            "kappa": 2.0,
            "truncation": {"n_max": 44},
            "cutoff": "off",
            "solver": "nullspace",
            "outputs": ["photon_stats", "linewidth"],
            "workers": 2
        }"#;
        let cfg = RunConfig::from_json(text).unwrap();
        assert_eq!(cfg.models[0].ordering, Ordering::ADagA);
        assert_eq!(cfg.truncation, Truncation::Explicit { n_max: 44 });
        assert_eq!(cfg.cutoff, Cutoff::Off);
        assert_eq!(cfg.solver, Solver::Nullspace);
        let again = RunConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            r#"{"models": [], "g_tau_bar": 0.1, "pump": [1]}"#,
            r#"{"models": ["exact"], "g_tau_bar": -0.1, "pump": [1]}"#,
            r#"{"models": ["exact"], "g_tau_bar": 0.1, "pump": [-1]}"#,
            r#"{"models": ["laser"], "g_tau_bar": 0.1, "pump": [1]}"#,
            r#"{"models": [{"name": "uniform_lindblad", "uniform_order": 3}], "g_tau_bar": 0.1, "pump": [1]}"#,
            r#"{"models": ["exact"], "g_tau_bar": 0.1, "pump": "1:2"}"#,
            r#"{"models": ["exact"], "g_tau_bar": 0.1, "pump": [1], "colour": 3}"#,
        ] {
            assert!(matches!(RunConfig::from_json(text), Err(Error::Config(_))), "{text}");
        }
    }
}
