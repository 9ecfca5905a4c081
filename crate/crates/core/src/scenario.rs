//! Named, reproducible experiments and their JSON reports.
//!
//! Each scenario computes its states and numbers, then evaluates a list of
//! named checks (measured error against a fixed tolerance). A run succeeds
//! only when every check passes. Reports are byte-for-byte reproducible:
//! floats are rounded to 15 significant digits, object keys are sorted and
//! sampling uses a seeded ChaCha generator.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::cloning::{
    clone_input, clone_output, ideal_clone_expansion, no_cloning_gap, superposed_input, wrong_clone_demo, BLANK,
    HERE, THERE,
};
use crate::density::{
    density_product, density_symmetrized, disjoint_support, make_box_eigenstate, restricted_density, sig15,
    DensityProfile, GridSpec, WaveFunctionGrid, DISJOINT_THRESHOLD,
};
use crate::entanglement::{
    measure, outcome_table, photon_pair_naive, photon_pair_symmetrized, schmidt, seeded_rng, BipartiteSplit,
    MeasurementRecord, Outcome, OutcomeTable, HORIZONTAL, MOMENTUM_1, MOMENTUM_2, VERTICAL,
};
use crate::hilbert::{
    exchange_eigenvalue, factorize_location, join_location, symmetrize_labels, BasisLabel, NParticleState,
    ParticleStatistics,
};

/// Slack on `a^2 + b^2 = 1` for amplitudes typed on a command line; the pair
/// is renormalized before use.
pub const CLI_AMPLITUDE_SLACK: f64 = 1e-6;

const PSI: &str = "psi";
const PHI: &str = "phi";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    NoCloning,
    WrongClone,
    PhotonPair,
    Densities,
    DisjointWells,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::NoCloning,
        ScenarioKind::WrongClone,
        ScenarioKind::PhotonPair,
        ScenarioKind::Densities,
        ScenarioKind::DisjointWells,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::NoCloning => "no-cloning",
            ScenarioKind::WrongClone => "wrong-clone",
            ScenarioKind::PhotonPair => "photon-pair",
            ScenarioKind::Densities => "densities",
            ScenarioKind::DisjointWells => "disjoint-wells",
        }
    }

    fn produces_density(self) -> bool {
        matches!(self, ScenarioKind::Densities | ScenarioKind::DisjointWells)
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = ScenarioKind::ALL.iter().map(|k| k.name()).collect();
                format!("unknown scenario `{s}` (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(format!("unknown format `{other}` (expected json|csv)")),
        }
    }
}

/// One infinite well: `[left, right]` with quantum number `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WellSpec {
    pub left: f64,
    pub right: f64,
    pub n: u32,
}

impl FromStr for WellSpec {
    type Err = String;

    /// `left,right,n`
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [left, right, n] = parts.as_slice() else {
            return Err(format!("well `{s}` must be `left,right,n`"));
        };
        let num = |v: &str| v.parse::<f64>().map_err(|e| format!("well `{s}`: {e}"));
        Ok(WellSpec {
            left: num(left)?,
            right: num(right)?,
            n: n.parse().map_err(|e| format!("well `{s}`: {e}"))?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid value for `{key}`: {message}")]
    Value { key: String, message: String },
    #[error("no scenario given")]
    MissingScenario,
    #[error("{0}")]
    Invalid(String),
}

/// A partially specified configuration; one layer of file, flags or env.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigLayer {
    pub scenario: Option<ScenarioKind>,
    pub statistics: Option<ParticleStatistics>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub grid_min: Option<f64>,
    pub grid_max: Option<f64>,
    pub grid_points: Option<usize>,
    pub wells: Vec<WellSpec>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    raw.parse().map_err(|e: T::Err| ConfigError::Value {
        key: key.to_owned(),
        message: e.to_string(),
    })
}

impl ConfigLayer {
    /// Flat `key = value` text; `#` starts a comment; `well` may repeat.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut layer = ConfigLayer::default();
        for (index, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: index + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            layer.set(key.trim(), value.trim()).map_err(|e| match e {
                ConfigError::Invalid(message) => ConfigError::Syntax {
                    line: index + 1,
                    message,
                },
                other => other,
            })?;
        }
        Ok(layer)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = key.replace('_', "-");
        match key.as_str() {
            "scenario" => self.scenario = Some(parse_value(&key, value)?),
            "statistics" => self.statistics = Some(parse_value(&key, value)?),
            "a" => self.a = Some(parse_value(&key, value)?),
            "b" => self.b = Some(parse_value(&key, value)?),
            "grid-min" => self.grid_min = Some(parse_value(&key, value)?),
            "grid-max" => self.grid_max = Some(parse_value(&key, value)?),
            "grid-points" => self.grid_points = Some(parse_value(&key, value)?),
            "well" => self.wells.push(parse_value(&key, value)?),
            "seed" => self.seed = Some(parse_value(&key, value)?),
            "output" => self.output = Some(PathBuf::from(value)),
            "format" => self.format = Some(parse_value(&key, value)?),
            other => return Err(ConfigError::Invalid(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Fields set in `over` win; wells are replaced wholesale when `over`
    /// lists any.
    pub fn overridden_by(self, over: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            scenario: over.scenario.or(self.scenario),
            statistics: over.statistics.or(self.statistics),
            a: over.a.or(self.a),
            b: over.b.or(self.b),
            grid_min: over.grid_min.or(self.grid_min),
            grid_max: over.grid_max.or(self.grid_max),
            grid_points: over.grid_points.or(self.grid_points),
            wells: if over.wells.is_empty() { self.wells } else { over.wells },
            seed: over.seed.or(self.seed),
            output: over.output.or(self.output),
            format: over.format.or(self.format),
        }
    }

    /// Fills defaults and validates. `seed_fallback` is used when neither
    /// layer sets a seed (the CLI passes `SYMKET_SEED` here).
    pub fn resolve(self, seed_fallback: Option<u64>) -> Result<ScenarioConfig, ConfigError> {
        let scenario = self.scenario.ok_or(ConfigError::MissingScenario)?;
        let format = self.format.unwrap_or_default();
        if format == OutputFormat::Csv && !scenario.produces_density() {
            return Err(ConfigError::Invalid(format!(
                "scenario `{scenario}` has no density profile to write as CSV"
            )));
        }
        if format == OutputFormat::Csv && self.output.is_none() {
            return Err(ConfigError::Invalid("--format csv needs --output".into()));
        }

        let (a, b) = match scenario {
            ScenarioKind::NoCloning => {
                let a = self.a.unwrap_or(FRAC_1_SQRT_2);
                let b = self.b.unwrap_or(FRAC_1_SQRT_2);
                let weight = a * a + b * b;
                if !weight.is_finite() || (weight - 1.0).abs() > CLI_AMPLITUDE_SLACK {
                    return Err(ConfigError::Invalid(format!(
                        "amplitudes must satisfy a^2 + b^2 = 1 (got {weight})"
                    )));
                }
                (a, b)
            }
            _ => (self.a.unwrap_or(FRAC_1_SQRT_2), self.b.unwrap_or(FRAC_1_SQRT_2)),
        };

        let (default_grid, default_wells) = match scenario {
            ScenarioKind::DisjointWells => (
                GridConfig { x_min: 0.0, x_max: 3.0, points: 3001 },
                vec![WellSpec { left: 0.0, right: 1.0, n: 1 }, WellSpec { left: 2.0, right: 3.0, n: 1 }],
            ),
            _ => (
                GridConfig { x_min: 0.0, x_max: 1.0, points: 1001 },
                vec![WellSpec { left: 0.0, right: 1.0, n: 1 }, WellSpec { left: 0.0, right: 1.0, n: 2 }],
            ),
        };
        let grid = GridConfig {
            x_min: self.grid_min.unwrap_or(default_grid.x_min),
            x_max: self.grid_max.unwrap_or(default_grid.x_max),
            points: self.grid_points.unwrap_or(default_grid.points),
        };
        let wells = if self.wells.is_empty() { default_wells } else { self.wells };
        if scenario.produces_density() {
            GridSpec::spanning(grid.x_min, grid.x_max, grid.points)
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
            if wells.len() != 2 {
                return Err(ConfigError::Invalid(format!(
                    "scenario `{scenario}` needs exactly two wells, got {}",
                    wells.len()
                )));
            }
        }

        Ok(ScenarioConfig {
            scenario,
            statistics: self.statistics.unwrap_or(ParticleStatistics::Boson),
            a,
            b,
            grid,
            wells,
            seed: self.seed.or(seed_fallback).unwrap_or(0),
            output: self.output,
            format,
        })
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub statistics: ParticleStatistics,
    pub a: f64,
    pub b: f64,
    pub grid: GridConfig,
    pub wells: Vec<WellSpec>,
    pub seed: u64,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[serde(skip)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub error: f64,
    pub tolerance: f64,
}

impl Check {
    /// Passes when `error < tolerance`.
    fn below(name: &str, error: f64, tolerance: f64) -> Self {
        Check {
            name: name.to_owned(),
            pass: error < tolerance,
            error,
            tolerance,
        }
    }

    /// A yes/no property; `error` is 0 or 1.
    fn holds(name: &str, ok: bool) -> Self {
        Check {
            name: name.to_owned(),
            pass: ok,
            error: if ok { 0.0 } else { 1.0 },
            tolerance: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub scenario: ScenarioKind,
    pub inputs: Value,
    pub states: BTreeMap<String, NParticleState>,
    pub results: Value,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_value(&self) -> Value {
        let states: serde_json::Map<String, Value> = self
            .states
            .iter()
            .map(|(name, s)| (name.clone(), state_json(s)))
            .collect();
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| {
                json!({
                    "name": c.name,
                    "pass": c.pass,
                    "error": round15(c.error),
                    "tolerance": round15(c.tolerance),
                })
            })
            .collect();
        json!({
            "scenario": self.scenario.name(),
            "inputs": round_tree(self.inputs.clone()),
            "states": states,
            "results": round_tree(self.results.clone()),
            "checks": checks,
            "passed": self.passed(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.to_value()).expect("report serializes");
        text.push('\n');
        text
    }
}

/// A finished run: the report plus the density CSV for density scenarios.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub report: Report,
    pub profile: Option<DensityProfile>,
}

/// Rounds to 15 significant digits; `-0` becomes `0`.
fn round15(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    let r: f64 = sig15(x).parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn round_tree(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            n.as_f64().map(|x| json!(round15(x))).unwrap_or(Value::Number(n))
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_tree).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_tree(v))).collect()),
        other => other,
    }
}

/// Canonical amplitude list: configurations in order, global phase fixed.
fn state_json(state: &NParticleState) -> Value {
    let canonical = state.canonical().unwrap_or_else(|_| state.clone());
    Value::Array(
        canonical
            .terms()
            .map(|(config, amp)| {
                json!({
                    "labels": config.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
                    "re": round15(amp.re),
                    "im": round15(amp.im),
                })
            })
            .collect(),
    )
}

fn table_json(table: &OutcomeTable) -> Value {
    let probabilities: serde_json::Map<String, Value> =
        table.entries.iter().map(|(o, p)| (o.clone(), json!(p))).collect();
    json!({ "location": table.location, "probabilities": probabilities, "deficit": table.deficit })
}

fn record_json(record: &MeasurementRecord) -> Value {
    json!({
        "location": record.location,
        "outcome": record.outcome.label().unwrap_or("unlisted"),
        "probability": record.probability,
    })
}

pub fn run_scenario(config: &ScenarioConfig) -> crate::Result<ScenarioOutcome> {
    let mut inputs = serde_json::to_value(config).expect("config serializes");
    if let Value::Object(map) = &mut inputs {
        if !config.scenario.produces_density() {
            map.remove("grid");
            map.remove("wells");
        }
        if config.scenario != ScenarioKind::NoCloning {
            map.remove("a");
            map.remove("b");
        }
    }
    let (states, results, checks, profile) = match config.scenario {
        ScenarioKind::NoCloning => no_cloning(config)?,
        ScenarioKind::WrongClone => wrong_clone(config)?,
        ScenarioKind::PhotonPair => photon_pair(config)?,
        ScenarioKind::Densities => densities(config)?,
        ScenarioKind::DisjointWells => disjoint_wells(config)?,
    };
    Ok(ScenarioOutcome {
        report: Report {
            scenario: config.scenario,
            inputs,
            states,
            results,
            checks,
        },
        profile,
    })
}

type Parts = (BTreeMap<String, NParticleState>, Value, Vec<Check>, Option<DensityProfile>);

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn no_cloning(config: &ScenarioConfig) -> crate::Result<Parts> {
    let stats = config.statistics;
    let scale = (config.a * config.a + config.b * config.b).sqrt();
    let (a, b) = (config.a / scale, config.b / scale);
    let verdict = no_cloning_gap(c(a), c(b), PSI, PHI, stats)?;
    let expansion = ideal_clone_expansion(c(a), c(b), PSI, PHI, stats)?;
    let expected_linear = NParticleState::linear_combination(
        2,
        [(c(a), &clone_output(PSI, stats)?), (c(b), &clone_output(PHI, stats)?)],
    )?;
    let other = match stats {
        ParticleStatistics::Boson => ParticleStatistics::Fermion,
        ParticleStatistics::Fermion => ParticleStatistics::Boson,
    };
    let mirror = no_cloning_gap(c(a), c(b), PSI, PHI, other)?;
    let formula = (a.powi(3) + b.powi(3)).abs();
    let vanishing = a.abs().min(b.abs()) < 1e-9;

    let checks = vec![
        Check::below("ideal-normalized", (verdict.ideal_state.norm() - 1.0).abs(), 1e-12),
        Check::below("ideal-matches-expansion", verdict.ideal_state.distance(&expansion)?, 1e-12),
        Check::below("linear-extension", verdict.linear_state.distance(&expected_linear)?, 1e-12),
        Check::below("fidelity-formula", (verdict.fidelity - formula).abs(), 1e-10),
        Check::holds(
            if vanishing { "basis-state-cloned" } else { "superposition-not-cloned" },
            verdict.is_clone == vanishing,
        ),
        Check::holds(
            "statistics-independent",
            mirror.is_clone == verdict.is_clone && (mirror.fidelity - verdict.fidelity).abs() < 1e-12,
        ),
    ];
    let mut states = BTreeMap::new();
    states.insert("input".into(), superposed_input(c(a), c(b), PSI, PHI, stats)?);
    states.insert("ideal".into(), verdict.ideal_state.clone());
    states.insert("linear".into(), verdict.linear_state.clone());
    let results = json!({
        "a": a,
        "b": b,
        "fidelity": verdict.fidelity,
        "fidelity_formula": formula,
        "is_clone": verdict.is_clone,
    });
    Ok((states, results, checks, None))
}

fn wrong_clone(config: &ScenarioConfig) -> crate::Result<Parts> {
    let stats = config.statistics;
    let demo = wrong_clone_demo(PHI, stats)?;
    let blank_pair = demo.wrong.amplitude(&[
        BasisLabel::located(BLANK, THERE)?,
        BasisLabel::located(BLANK, HERE)?,
    ]);
    let before = clone_input(PHI, stats)?;
    let separation = factorize_location(&demo.ideal)
        .and_then(|(internal, location)| join_location(&internal, &location))
        .and_then(|joined| joined.distance(&demo.ideal));
    let before_rank = match factorize_location(&before) {
        Err(crate::Error::NotSeparable { rank }) => rank,
        _ => 1,
    };
    let gap = demo.wrong.ray_distance(&demo.ideal)?;

    let checks = vec![
        Check::below("wrong-fidelity-half", (demo.fidelity - 0.5).abs(), 1e-12),
        Check::below("blank-pair-amplitude", (blank_pair.norm() - FRAC_1_SQRT_2).abs(), 1e-12),
        Check::holds("wrong-is-not-a-clone", gap > 1e-6),
        Check::below("clone-target-separates", separation.unwrap_or(f64::INFINITY), 1e-12),
        Check::holds("pre-clone-not-separable", before_rank > 1),
    ];
    let mut states = BTreeMap::new();
    states.insert("before".into(), before);
    states.insert("ideal".into(), demo.ideal.clone());
    states.insert("wrong".into(), demo.wrong.clone());
    let results = json!({
        "fidelity": demo.fidelity,
        "blank_pair_amplitude": blank_pair.re,
        "pre_clone_location_rank": before_rank,
    });
    Ok((states, results, checks, None))
}

fn photon_pair(config: &ScenarioConfig) -> crate::Result<Parts> {
    const HV: [&str; 2] = [HORIZONTAL, VERTICAL];
    let naive = photon_pair_naive();
    let sym = photon_pair_symmetrized();

    let mut marginal_gap: f64 = 0.0;
    let mut tables = Vec::new();
    for momentum in [MOMENTUM_1, MOMENTUM_2] {
        let tn = outcome_table(&naive, momentum, &HV)?;
        let ts = outcome_table(&sym, momentum, &HV)?;
        for ((_, pn), (_, ps)) in tn.entries.iter().zip(&ts.entries) {
            marginal_gap = marginal_gap.max((pn - ps).abs());
        }
        tables.push(json!({ "naive": table_json(&tn), "symmetrized": table_json(&ts) }));
    }
    let completeness = (outcome_table(&sym, MOMENTUM_1, &HV)?.total() - 1.0).abs();

    let mut rng = seeded_rng(config.seed);
    let first = measure(&sym, MOMENTUM_1, &HV, &mut rng)?;
    let second = measure(&first.post_state, MOMENTUM_2, &HV, &mut rng)?;
    let repeat = measure(&second.post_state, MOMENTUM_1, &HV, &mut rng)?;

    let collapse_error = match &first.outcome {
        Outcome::Internal(p) => {
            let expected = symmetrize_labels(
                &BasisLabel::located(p.as_str(), MOMENTUM_1)?,
                &BasisLabel::located(p.as_str(), MOMENTUM_2)?,
                ParticleStatistics::Boson,
            )?;
            first.post_state.ray_distance(&expected)?
        }
        Outcome::Unlisted => f64::INFINITY,
    };

    let spectrum = |s: &NParticleState, split| schmidt(s, split).map(|r| json!({ "coefficients": r.coefficients, "rank": r.rank }));
    let checks = vec![
        Check::holds("symmetrized-exchange-even", exchange_eigenvalue(&sym, 0, 1, 1e-12)? == Some(1.0)),
        Check::holds("naive-not-exchange-eigenstate", exchange_eigenvalue(&naive, 0, 1, 1e-12)?.is_none()),
        Check::below("born-completeness", completeness, 1e-12),
        Check::below("marginals-agree", marginal_gap, 1e-12),
        Check::below("first-outcome-probability", (first.probability - 0.5).abs(), 1e-12),
        Check::below("collapse-symmetrized", collapse_error, 1e-12),
        Check::holds(
            "second-measurement-agrees",
            second.outcome == first.outcome && (second.probability - 1.0).abs() < 1e-12,
        ),
        Check::holds(
            "repeat-measurement-agrees",
            repeat.outcome == first.outcome && (repeat.probability - 1.0).abs() < 1e-12,
        ),
    ];
    let mut states = BTreeMap::new();
    states.insert("naive".into(), naive.clone());
    states.insert("symmetrized".into(), sym.clone());
    states.insert("after_first".into(), first.post_state.clone());
    states.insert("after_second".into(), second.post_state.clone());
    let results = json!({
        "marginals": tables,
        "trace": [record_json(&first), record_json(&second), record_json(&repeat)],
        "schmidt": {
            "naive_particles": spectrum(&naive, BipartiteSplit::ParticleSlots)?,
            "symmetrized_particles": spectrum(&sym, BipartiteSplit::ParticleSlots)?,
            "symmetrized_internal_location": spectrum(&sym, BipartiteSplit::InternalLocation)?,
        },
    });
    Ok((states, results, checks, None))
}

fn orbitals(config: &ScenarioConfig) -> crate::Result<(GridSpec, WaveFunctionGrid, WaveFunctionGrid)> {
    let g = GridSpec::spanning(config.grid.x_min, config.grid.x_max, config.grid.points)?;
    let w = |s: &WellSpec| make_box_eigenstate(s.n, s.left, s.right, &g);
    Ok((g, w(&config.wells[0])?, w(&config.wells[1])?))
}

fn densities(config: &ScenarioConfig) -> crate::Result<Parts> {
    let (_, phi, psi) = orbitals(config)?;
    let stats = config.statistics;
    let rho1 = density_symmetrized(&phi, &psi, stats, 1)?;
    let rho2 = density_symmetrized(&phi, &psi, stats, 2)?;
    let flipped = density_symmetrized(&phi, &psi, ParticleStatistics::Boson, 1)?
        .max_abs_diff(&density_symmetrized(&phi, &psi, ParticleStatistics::Fermion, 1)?)?;
    let identity_error = phi
        .samples()
        .iter()
        .zip(psi.samples())
        .zip(&rho1.values)
        .map(|((f, g), r)| (r - 0.5 * (f.norm_sqr() + g.norm_sqr())).abs())
        .fold(0.0, f64::max);
    let p1 = density_product(&phi, &psi, 1)?;
    let p2 = density_product(&phi, &psi, 2)?;

    let checks = vec![
        Check::below("average-identity", identity_error, 1e-12),
        Check::below("density-normalized", (rho1.integral() - 1.0).abs(), 1e-8),
        Check::below("particles-agree", rho1.max_abs_diff(&rho2)?, 1e-15),
        Check::below("statistics-indifferent", flipped, 1e-15),
    ];
    let results = json!({
        "integral": rho1.integral(),
        "overlap": phi.inner(&psi)?.norm(),
        "disjoint": disjoint_support(&phi, &psi, DISJOINT_THRESHOLD)?,
        "product_integrals": [p1.integral(), p2.integral()],
        "product_difference": p1.max_abs_diff(&p2)?,
    });
    Ok((BTreeMap::new(), results, checks, Some(rho1)))
}

fn disjoint_wells(config: &ScenarioConfig) -> crate::Result<Parts> {
    let (g, phi, psi) = orbitals(config)?;
    let stats = config.statistics;
    let left = &config.wells[0];
    let right = &config.wells[1];
    let left_region = g.index_range(left.left, left.right);
    let right_region = g.index_range(right.left, right.right);

    // Overlapping wells are a legitimate run whose reduction checks fail.
    let reduce = |region: &std::ops::Range<usize>, wave: &WaveFunctionGrid| -> crate::Result<(DensityProfile, f64)> {
        let rho = restricted_density(&phi, &psi, stats, region.clone())?;
        let error = rho.max_abs_diff(&DensityProfile::of_wave(wave).restrict(region))?;
        Ok((rho, error))
    };
    let left_result = reduce(&left_region, &phi);
    let right_result = reduce(&right_region, &psi);
    let error_of = |r: &crate::Result<(DensityProfile, f64)>| r.as_ref().map(|(_, e)| *e).unwrap_or(f64::INFINITY);
    let failure = |r: &crate::Result<(DensityProfile, f64)>| r.as_ref().err().map(|e| e.to_string());
    let h = c(FRAC_1_SQRT_2);
    let spread = phi.superpose(h, &psi, h)?;

    let checks = vec![
        Check::holds("supports-disjoint", disjoint_support(&phi, &psi, DISJOINT_THRESHOLD)?),
        Check::below("left-well-reduction", error_of(&left_result), 1e-8),
        Check::below("right-well-reduction", error_of(&right_result), 1e-8),
        Check::holds("spanning-orbital-overlaps", !disjoint_support(&spread, &psi, DISJOINT_THRESHOLD)?),
    ];
    let results = json!({
        "left_region": [left_region.start, left_region.end],
        "right_region": [right_region.start, right_region.end],
        "left_error": error_of(&left_result),
        "right_error": error_of(&right_result),
        "left_failure": failure(&left_result),
        "right_failure": failure(&right_result),
    });
    let rho_left = left_result.ok().map(|(rho, _)| rho);
    Ok((BTreeMap::new(), results, checks, rho_left))
}

/// Writes `contents` to `path` through a temp file in the same directory, so
/// the target is either absent or complete.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolved(text: &str) -> ScenarioConfig {
        ConfigLayer::parse(text).unwrap().resolve(None).unwrap()
    }

    #[test]
    fn parses_flat_config_with_comments() {
        let layer = ConfigLayer::parse(
            "# sample\nscenario = disjoint-wells\nstatistics=fermion  # trailing\nwell = 0,1,1\nwell = 2,3,2\ngrid_points = 301\n",
        )
        .unwrap();
        assert_eq!(layer.scenario, Some(ScenarioKind::DisjointWells));
        assert_eq!(layer.statistics, Some(ParticleStatistics::Fermion));
        assert_eq!(layer.wells.len(), 2);
        assert_eq!(layer.wells[1], WellSpec { left: 2.0, right: 3.0, n: 2 });
        assert_eq!(layer.grid_points, Some(301));
    }

    #[test]
    fn config_syntax_errors() {
        assert!(matches!(ConfigLayer::parse("scenario"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(ConfigLayer::parse("\ncolour = red"), Err(ConfigError::Syntax { line: 2, .. })));
        assert!(matches!(ConfigLayer::parse("seed = x"), Err(ConfigError::Value { .. })));
        assert!(matches!(ConfigLayer::parse("well = 1,2"), Err(ConfigError::Value { .. })));
    }

    #[test]
    fn flags_override_file() {
        let file = ConfigLayer::parse("scenario = no-cloning\na = 0.6\nb = 0.8\nseed = 3\nwell = 0,1,1").unwrap();
        let flags = ConfigLayer {
            a: Some(0.8),
            b: Some(0.6),
            ..Default::default()
        };
        let merged = file.overridden_by(flags);
        assert_eq!((merged.a, merged.b, merged.seed), (Some(0.8), Some(0.6), Some(3)));
        assert_eq!(merged.wells.len(), 1);
    }

    #[test]
    fn seed_fallback_only_when_unset() {
        let layer = ConfigLayer::parse("scenario = photon-pair").unwrap();
        assert_eq!(layer.clone().resolve(Some(9)).unwrap().seed, 9);
        let seeded = ConfigLayer::parse("scenario = photon-pair\nseed = 4").unwrap();
        assert_eq!(seeded.resolve(Some(9)).unwrap().seed, 4);
        assert_eq!(layer.resolve(None).unwrap().seed, 0);
    }

    #[test]
    fn resolve_rejects_invalid_configs() {
        let bad = |t: &str| ConfigLayer::parse(t).unwrap().resolve(None).is_err();
        assert!(bad(""));
        assert!(bad("scenario = no-cloning\na = 0.9\nb = 0.9"));
        assert!(bad("scenario = photon-pair\nformat = csv\noutput = x.csv"));
        assert!(bad("scenario = densities\nformat = csv"));
        assert!(bad("scenario = densities\nwell = 0,1,1"));
        assert!(bad("scenario = densities\ngrid-points = 1"));
    }

    #[test]
    fn every_scenario_passes_with_defaults() {
        for kind in ScenarioKind::ALL {
            for stats in ParticleStatistics::ALL {
                let mut config = resolved(&format!("scenario = {kind}"));
                config.statistics = stats;
                let outcome = run_scenario(&config).unwrap();
                let failed: Vec<_> = outcome.report.checks.iter().filter(|c| !c.pass).collect();
                assert!(failed.is_empty(), "{kind}/{stats}: {failed:?}");
                assert_eq!(outcome.profile.is_some(), kind.produces_density());
            }
        }
    }

    #[test]
    fn no_cloning_basis_state() {
        let report = run_scenario(&resolved("scenario = no-cloning\na = 1\nb = 0")).unwrap().report;
        assert!(report.passed());
        assert!(report.check("basis-state-cloned").is_some());
        assert_eq!(report.results["is_clone"], json!(true));
    }

    #[test]
    fn cli_precision_amplitudes_are_renormalized() {
        let report = run_scenario(&resolved("scenario = no-cloning\na = 0.70710678\nb = 0.70710678"))
            .unwrap()
            .report;
        assert!(report.passed());
        let f = report.results["fidelity"].as_f64().unwrap();
        assert!((f - FRAC_1_SQRT_2).abs() < 1e-7);
    }

    #[test]
    fn reports_are_deterministic() {
        let config = resolved("scenario = photon-pair\nseed = 7");
        let a = run_scenario(&config).unwrap().report.to_json();
        let b = run_scenario(&config).unwrap().report.to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn rounding_is_fifteen_digits() {
        assert_eq!(round15(0.1 + 0.2), 0.3);
        assert_eq!(round15(-0.0), 0.0);
        assert_eq!(round15(1.0 / 3.0).to_string(), "0.333333333333333");
    }

    #[test]
    fn atomic_write_replaces_target() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        write_atomic(&path, "one").unwrap();
        write_atomic(&path, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
