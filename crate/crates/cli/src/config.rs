//! Scenario files: TOML with a fixed set of sections and keys.
//!
//! ```toml
//! [run]
//! scenario = "pod"            # pod | er | exclusivity | marginal | oracle-compare
//! output = "pod.csv"          # "-" or absent: standard output
//! seed = 0
//! perturb = 0.0               # relative spread of the seeded parameter perturbation
//! structure = "alternate"     # alternate | jacobi | identity
//! map_output = "map.txt"      # optional: write the structure map
//!
//! [model]
//! m1 = 1.0
//! potential = "harmonic"      # free | harmonic
//! omega = 1.0
//! coupling_sign = "plus"      # plus | minus
//!
//! [bath]                      # either an Ohmic spectral density ...
//! n_modes = 8
//! gamma = 0.2
//! cutoff = 5.0
//! scheme = "linear"           # linear | log
//! mass = 1.0
//! # ... or explicit modes:
//! # modes = [{ mass = 1.0, omega = 1.0, coupling = 0.3 }]
//!
//! [initial]
//! kind = "coherent"           # coherent | cat
//! x = 1.0
//! p = 0.0
//! separation = 2.0            # cat only
//! width_omega = 1.0
//! temperature = 0.0
//! purified = false
//!
//! [times]
//! t_max = 10.0
//! points = 50
//!
//! [oracle]
//! cutoffs = [24, 14]
//! step = 6
//! ```

use std::fmt;

use qbm_core::experiments::{
    uniform_times, InitialState, OracleSettings, ParticleState, ScenarioConfig, StructureKind,
};
use qbm_core::model::discretize_bath;
use qbm_core::{BathMode, BathSpec, CouplingSign, GridScheme, ModelParams, Potential};
use serde::Deserialize;

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    /// Malformed text or an unknown key.
    Parse { line: Option<usize>, message: String },
    /// Well-formed but physically invalid.
    Domain(qbm_core::Error),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse {
                line: Some(line),
                message,
            } => write!(f, "config line {line}: {message}"),
            ConfigError::Parse { line: None, message } => write!(f, "config: {message}"),
            ConfigError::Domain(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl From<qbm_core::Error> for ConfigError {
    fn from(e: qbm_core::Error) -> Self {
        ConfigError::Domain(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Pod,
    Er,
    Exclusivity,
    Marginal,
    OracleCompare,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Pod => "pod",
            Scenario::Er => "er",
            Scenario::Exclusivity => "exclusivity",
            Scenario::Marginal => "marginal",
            Scenario::OracleCompare => "oracle-compare",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
enum StructureName {
    #[default]
    Alternate,
    Jacobi,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
enum PotentialName {
    Free,
    #[default]
    Harmonic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
enum SignName {
    #[default]
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
enum SchemeName {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
enum KindName {
    #[default]
    Coherent,
    Cat,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    scenario: Scenario,
    output: Option<String>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    perturb: f64,
    #[serde(default)]
    structure: StructureName,
    map_output: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    #[serde(default = "one")]
    m1: f64,
    #[serde(default)]
    potential: PotentialName,
    #[serde(default = "one")]
    omega: f64,
    #[serde(default)]
    coupling_sign: SignName,
}

impl Default for RawModel {
    fn default() -> Self {
        Self {
            m1: 1.0,
            potential: PotentialName::default(),
            omega: 1.0,
            coupling_sign: SignName::default(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMode {
    #[serde(default = "one")]
    mass: f64,
    omega: f64,
    coupling: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBath {
    n_modes: Option<usize>,
    gamma: Option<f64>,
    cutoff: Option<f64>,
    #[serde(default)]
    scheme: SchemeName,
    #[serde(default = "one")]
    mass: f64,
    modes: Option<Vec<RawMode>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    #[serde(default)]
    kind: KindName,
    #[serde(default = "one")]
    x: f64,
    #[serde(default)]
    p: f64,
    #[serde(default = "two")]
    separation: f64,
    #[serde(default = "one")]
    width_omega: f64,
    #[serde(default)]
    temperature: f64,
    #[serde(default)]
    purified: bool,
}

impl Default for RawInitial {
    fn default() -> Self {
        Self {
            kind: KindName::default(),
            x: 1.0,
            p: 0.0,
            separation: 2.0,
            width_omega: 1.0,
            temperature: 0.0,
            purified: false,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTimes {
    t_max: f64,
    points: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOracle {
    cutoffs: Vec<usize>,
    #[serde(default = "ten")]
    step: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    run: RawRun,
    #[serde(default)]
    model: RawModel,
    #[serde(default)]
    bath: RawBath,
    #[serde(default)]
    initial: RawInitial,
    times: RawTimes,
    oracle: Option<RawOracle>,
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

fn ten() -> usize {
    10
}

/// A validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    /// `None` writes to standard output.
    pub output: Option<String>,
    pub map_output: Option<String>,
    pub seed: u64,
    pub perturb: f64,
    pub scenario_config: ScenarioConfig,
    pub oracle: Option<OracleSettings>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn parse_error(text: &str, err: toml::de::Error) -> ConfigError {
    ConfigError::Parse {
        line: err.span().map(|s| line_of(text, s.start)),
        message: err.message().to_string(),
    }
}

/// Parses and validates a scenario file, applying `overrides` of the form
/// `section.key=value` on top of it.
pub fn parse_config_with(text: &str, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut table: toml::Table = toml::from_str(text).map_err(|e| parse_error(text, e))?;
    for entry in overrides {
        apply_override(&mut table, entry)?;
    }
    let raw: RawConfig = if overrides.is_empty() {
        toml::from_str(text).map_err(|e| parse_error(text, e))?
    } else {
        RawConfig::deserialize(toml::Value::Table(table)).map_err(|e| ConfigError::Parse {
            line: None,
            message: e.message().to_string(),
        })?
    };
    build(raw)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_with(text, &[])
}

fn apply_override(table: &mut toml::Table, entry: &str) -> Result<(), ConfigError> {
    let bad = |message: String| ConfigError::Parse { line: None, message };
    let (key, value) = entry
        .split_once('=')
        .ok_or_else(|| bad(format!("override `{entry}` is not of the form key=value")))?;
    let (section, field) = key
        .trim()
        .split_once('.')
        .ok_or_else(|| bad(format!("override key `{key}` must be `section.key`")))?;
    let value = value.trim();
    // bare words that are not TOML literals are taken as strings
    let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    let slot = table
        .entry(section.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    match slot {
        toml::Value::Table(t) => {
            t.insert(field.to_string(), parsed);
            Ok(())
        }
        _ => Err(bad(format!("`{section}` is not a section"))),
    }
}

fn domain(field: &str, reason: &str) -> ConfigError {
    ConfigError::Domain(qbm_core::Error::Domain {
        field: field.to_string(),
        reason: reason.to_string(),
    })
}

fn build(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let potential = match raw.model.potential {
        PotentialName::Free => Potential::Free,
        PotentialName::Harmonic => Potential::Harmonic {
            omega: raw.model.omega,
        },
    };
    let bath = bath_modes(&raw.bath)?;
    let model = ModelParams {
        m1: raw.model.m1,
        potential,
        bath,
        coupling_sign: match raw.model.coupling_sign {
            SignName::Plus => CouplingSign::Plus,
            SignName::Minus => CouplingSign::Minus,
        },
    };
    model.validate()?;
    let init = &raw.initial;
    let initial = InitialState {
        kind: match init.kind {
            KindName::Coherent => ParticleState::Coherent,
            KindName::Cat => ParticleState::Cat {
                separation: init.separation,
            },
        },
        x: init.x,
        p: init.p,
        width_omega: init.width_omega,
        temperature: init.temperature,
    };
    if !(raw.times.t_max > 0.0 && raw.times.t_max.is_finite()) {
        return Err(domain("times.t_max", "must be positive"));
    }
    if raw.times.points < 2 {
        return Err(domain("times.points", "need at least two points"));
    }
    if !(raw.run.perturb >= 0.0 && raw.run.perturb < 1.0) {
        return Err(domain("run.perturb", "must lie in [0, 1)"));
    }
    let scenario_config = ScenarioConfig {
        model,
        initial,
        times: uniform_times(raw.times.t_max, raw.times.points),
        purified: init.purified,
        structure: match raw.run.structure {
            StructureName::Alternate => StructureKind::Alternate,
            StructureName::Jacobi => StructureKind::AlternateJacobi,
            StructureName::Identity => StructureKind::Identity,
        },
    };
    scenario_config.validate()?;
    let oracle = raw.oracle.map(|o| OracleSettings {
        cutoffs: o.cutoffs,
        step: o.step,
    });
    if raw.run.scenario == Scenario::OracleCompare && oracle.is_none() {
        return Err(domain("oracle", "oracle-compare needs an [oracle] section"));
    }
    Ok(RunConfig {
        scenario: raw.run.scenario,
        output: raw.run.output.filter(|o| o != "-"),
        map_output: raw.run.map_output,
        seed: raw.run.seed,
        perturb: raw.run.perturb,
        scenario_config,
        oracle,
    })
}

fn bath_modes(raw: &RawBath) -> Result<Vec<BathMode>, ConfigError> {
    let spectral = raw.n_modes.is_some() || raw.gamma.is_some() || raw.cutoff.is_some();
    match (&raw.modes, spectral) {
        (Some(_), true) => Err(domain(
            "bath",
            "give either explicit modes or n_modes/gamma/cutoff, not both",
        )),
        (Some(modes), false) => Ok(modes
            .iter()
            .map(|m| BathMode {
                mass: m.mass,
                omega: m.omega,
                coupling: m.coupling,
            })
            .collect()),
        (None, _) => {
            let spec = BathSpec {
                n_modes: raw.n_modes.ok_or_else(|| domain("bath.n_modes", "missing"))?,
                gamma: raw.gamma.ok_or_else(|| domain("bath.gamma", "missing"))?,
                cutoff: raw.cutoff.ok_or_else(|| domain("bath.cutoff", "missing"))?,
                scheme: match raw.scheme {
                    SchemeName::Linear => GridScheme::LinearGrid,
                    SchemeName::Log => GridScheme::LogGrid,
                },
            };
            Ok(discretize_bath(&spec, raw.mass)?)
        }
    }
}
