use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bilinear::{ConstantOptions, ProfileFamily, ScanRanges};
use crate::duhamel::{DataSpec, PicardOptions, DEFAULT_BILINEAR_CONSTANT, DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::self_similar::SearchOptions;
use crate::spectral::DEFAULT_BOX_LENGTH;

/// Largest sample and trial counts accepted from a config file.
pub const MAX_SAMPLES: usize = 1 << 32;
pub const MAX_TRIALS: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Command {
    Schedule,
    Simulate,
    VerifyKernel,
    EstimateConstant,
    SelfsimilarSearch,
    Continuity,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Schedule,
        Command::Simulate,
        Command::VerifyKernel,
        Command::EstimateConstant,
        Command::SelfsimilarSearch,
        Command::Continuity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Schedule => "schedule",
            Command::Simulate => "simulate",
            Command::VerifyKernel => "verify-kernel",
            Command::EstimateConstant => "estimate-constant",
            Command::SelfsimilarSearch => "selfsimilar-search",
            Command::Continuity => "continuity",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Command::ALL.iter().map(|c| c.as_str()).collect();
                Error::Config(format!("command: unknown `{s}`, expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleParams {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "C")]
    pub c: f64,
    /// Overrides `T`; the checks then report whether the guarantees survive.
    pub horizon: Option<f64>,
}

impl Default for ScheduleParams {
    fn default() -> Self {
        Self {
            k: 0.1,
            c: DEFAULT_BILINEAR_CONSTANT,
            horizon: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateParams {
    pub n: usize,
    pub box_length: f64,
    #[serde(rename = "M")]
    pub intervals: usize,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub tol: f64,
    pub k_max: usize,
    /// Research mode: run on `[0, horizon]` instead of the schedule's `T`.
    pub horizon: Option<f64>,
    pub data: DataSpec,
    /// Rescales nonzero data to this norm.
    pub data_norm: Option<f64>,
    /// Integral-equation residual counted as converged.
    pub residual_tolerance: f64,
    pub oracle: bool,
    /// Oracle step as a fraction of the CFL bound.
    pub cfl_fraction: f64,
    pub energy_drift_tolerance: f64,
    pub snapshots: bool,
}

impl Default for SimulateParams {
    fn default() -> Self {
        Self {
            n: 64,
            box_length: DEFAULT_BOX_LENGTH,
            intervals: 64,
            k: 0.1,
            c: DEFAULT_BILINEAR_CONSTANT,
            tol: DEFAULT_TOLERANCE,
            k_max: DEFAULT_MAX_ITERATIONS,
            horizon: None,
            data: default_random_data(),
            data_norm: Some(0.05),
            residual_tolerance: 1e-8,
            oracle: true,
            cfl_fraction: 0.5,
            energy_drift_tolerance: 1e-6,
            snapshots: true,
        }
    }
}

impl SimulateParams {
    pub fn picard_options(&self) -> PicardOptions {
        PicardOptions {
            intervals: self.intervals,
            max_iterations: self.k_max,
            tolerance: self.tol,
            horizon: self.horizon,
        }
    }
}

fn default_random_data() -> DataSpec {
    DataSpec::Random {
        wavenumber: 1.0,
        with_velocity: true,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelParams {
    pub samples: usize,
    /// Points per axis of the `(|ξ|, τ/|ξ|, angle)` lattice.
    pub lattice: usize,
    pub ranges: ScanRanges,
    /// Allowed excess of the quotient over `½`.
    pub tolerance: f64,
    pub identity_tolerance: f64,
    pub jacobian_tolerance: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            lattice: 64,
            ranges: ScanRanges::default(),
            tolerance: 1e-12,
            identity_tolerance: 1e-10,
            jacobian_tolerance: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantParams {
    pub trials: usize,
    pub n: usize,
    pub box_length: f64,
    pub window: f64,
    pub dt: f64,
    pub family: ProfileFamily,
    /// Constant used by the schedule; checked against twice the estimate.
    pub schedule_constant: f64,
}

impl Default for ConstantParams {
    fn default() -> Self {
        let o = ConstantOptions::default();
        Self {
            trials: o.trials,
            n: o.n,
            box_length: o.box_length,
            window: o.window,
            dt: o.dt,
            family: o.family,
            schedule_constant: DEFAULT_BILINEAR_CONSTANT,
        }
    }
}

impl ConstantParams {
    pub fn options(&self, seed: u64) -> ConstantOptions {
        ConstantOptions {
            trials: self.trials,
            n: self.n,
            box_length: self.box_length,
            window: self.window,
            dt: self.dt,
            seed,
            family: self.family,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchParams {
    pub runs: usize,
    pub options: SearchOptions,
    /// Also audit the reference profiles (identities and hand values).
    pub identities: bool,
    pub identity_tolerance: f64,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            runs: 32,
            options: SearchOptions::default(),
            identities: true,
            identity_tolerance: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuityParams {
    pub n: usize,
    pub box_length: f64,
    #[serde(rename = "M")]
    pub intervals: usize,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub tol: f64,
    pub k_max: usize,
    pub data: DataSpec,
    pub data_norm: Option<f64>,
    /// Drawn with `seed + 1`.
    pub perturbation: DataSpec,
    pub epsilons: Vec<f64>,
    pub slack: f64,
}

impl Default for ContinuityParams {
    fn default() -> Self {
        Self {
            n: 64,
            box_length: DEFAULT_BOX_LENGTH,
            intervals: 64,
            k: 0.1,
            c: DEFAULT_BILINEAR_CONSTANT,
            tol: DEFAULT_TOLERANCE,
            k_max: DEFAULT_MAX_ITERATIONS,
            data: default_random_data(),
            data_norm: Some(0.05),
            perturbation: default_random_data(),
            epsilons: vec![1e-2, 1e-3],
            slack: crate::duhamel::CONTINUITY_SLACK,
        }
    }
}

impl ContinuityParams {
    pub fn picard_options(&self) -> PicardOptions {
        PicardOptions {
            intervals: self.intervals,
            max_iterations: self.k_max,
            tolerance: self.tol,
            horizon: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Experiment {
    Schedule(ScheduleParams),
    Simulate(SimulateParams),
    VerifyKernel(KernelParams),
    EstimateConstant(ConstantParams),
    SelfsimilarSearch(SearchParams),
    Continuity(ContinuityParams),
}

impl Experiment {
    pub fn default_for(command: Command) -> Self {
        match command {
            Command::Schedule => Experiment::Schedule(Default::default()),
            Command::Simulate => Experiment::Simulate(Default::default()),
            Command::VerifyKernel => Experiment::VerifyKernel(Default::default()),
            Command::EstimateConstant => Experiment::EstimateConstant(Default::default()),
            Command::SelfsimilarSearch => Experiment::SelfsimilarSearch(Default::default()),
            Command::Continuity => Experiment::Continuity(Default::default()),
        }
    }

    pub fn command(&self) -> Command {
        match self {
            Experiment::Schedule(_) => Command::Schedule,
            Experiment::Simulate(_) => Command::Simulate,
            Experiment::VerifyKernel(_) => Command::VerifyKernel,
            Experiment::EstimateConstant(_) => Command::EstimateConstant,
            Experiment::SelfsimilarSearch(_) => Command::SelfsimilarSearch,
            Experiment::Continuity(_) => Command::Continuity,
        }
    }

    fn from_value(command: Command, parameters: Value) -> Result<Self> {
        let parameters = match parameters {
            Value::Null => Value::Object(Default::default()),
            v => v,
        };
        Ok(match command {
            Command::Schedule => Experiment::Schedule(parse_params(parameters)?),
            Command::Simulate => Experiment::Simulate(parse_params(parameters)?),
            Command::VerifyKernel => Experiment::VerifyKernel(parse_params(parameters)?),
            Command::EstimateConstant => Experiment::EstimateConstant(parse_params(parameters)?),
            Command::SelfsimilarSearch => Experiment::SelfsimilarSearch(parse_params(parameters)?),
            Command::Continuity => Experiment::Continuity(parse_params(parameters)?),
        })
    }

    fn to_value(&self) -> Value {
        let v = match self {
            Experiment::Schedule(p) => serde_json::to_value(p),
            Experiment::Simulate(p) => serde_json::to_value(p),
            Experiment::VerifyKernel(p) => serde_json::to_value(p),
            Experiment::EstimateConstant(p) => serde_json::to_value(p),
            Experiment::SelfsimilarSearch(p) => serde_json::to_value(p),
            Experiment::Continuity(p) => serde_json::to_value(p),
        };
        v.expect("parameters serialize")
    }

    /// Whether the experiment draws random numbers and so needs a seed.
    pub fn is_randomized(&self) -> bool {
        let random = |d: &DataSpec| matches!(d, DataSpec::Random { .. });
        match self {
            Experiment::Schedule(_) => false,
            Experiment::Simulate(p) => random(&p.data),
            Experiment::VerifyKernel(_) | Experiment::EstimateConstant(_) | Experiment::SelfsimilarSearch(_) => true,
            Experiment::Continuity(p) => random(&p.data) || random(&p.perturbation),
        }
    }
}

fn parse_params<T: DeserializeOwned>(value: Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            Error::Config(format!("parameters: {inner}"))
        } else {
            Error::Config(format!("parameters.{path}: {inner}"))
        }
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: String,
    #[serde(default)]
    parameters: Value,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    output: Option<PathBuf>,
}

/// A command with fully resolved parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            experiment: Experiment::default_for(command),
            seed: None,
            output: None,
        }
    }

    pub fn command(&self) -> Command {
        self.experiment.command()
    }

    /// Parses and validates; errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let config = Self::parse(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Parses without the semantic checks of [`RunConfig::validate`].
    pub fn parse(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let raw: RawConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config(format!("{path}: {}", e.into_inner()))
        })?;
        de.end().map_err(|e| Error::Config(format!("trailing input: {e}")))?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let command: Command = raw.command.parse()?;
        Ok(Self {
            experiment: Experiment::from_value(command, raw.parameters)?,
            seed: raw.seed,
            output: raw.output,
        })
    }

    fn to_raw(&self) -> RawConfig {
        RawConfig {
            command: self.command().as_str().into(),
            parameters: self.experiment.to_value(),
            seed: self.seed,
            output: self.output.clone(),
        }
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self.to_raw()).expect("config serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("config serializes")
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output
            .clone()
            .unwrap_or_else(|| PathBuf::from("cmcwave-out").join(self.command().as_str()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiment.is_randomized() && self.seed.is_none() {
            return Err(Error::Config(format!(
                "seed: required for the randomized command `{}`",
                self.command()
            )));
        }
        validate_experiment(&self.experiment).map_err(|e| match e {
            Error::InvalidParameter { name, reason } => Error::Config(format!("parameters.{name}: {reason}")),
            other => Error::Config(format!("parameters: {other}")),
        })
    }
}

impl Serialize for RunConfig {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_raw().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RunConfig {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawConfig::deserialize(deserializer)?;
        Self::from_raw(raw).map_err(serde::de::Error::custom)
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive and finite, got {v}")))
    }
}

fn grid_size(n: usize, box_length: f64) -> Result<()> {
    crate::spectral::Grid::validate_shape(n, box_length).map_err(|e| match e {
        Error::InvalidGrid(reason) => Error::param("n", reason),
        other => other,
    })
}

fn count(name: &str, v: usize, max: usize) -> Result<()> {
    if v == 0 || v > max {
        return Err(Error::param(name, format!("must be in [1, {max}], got {v}")));
    }
    Ok(())
}

fn validate_experiment(experiment: &Experiment) -> Result<()> {
    match experiment {
        Experiment::Schedule(p) => {
            positive("K", p.k)?;
            positive("C", p.c)?;
            if let Some(t) = p.horizon {
                positive("horizon", t)?;
            }
        }
        Experiment::Simulate(p) => {
            grid_size(p.n, p.box_length)?;
            positive("K", p.k)?;
            positive("C", p.c)?;
            count("M", p.intervals, MAX_TRIALS)?;
            p.picard_options().validate()?;
            p.data.validate()?;
            if let Some(d) = p.data_norm {
                if !(d.is_finite() && d >= 0.0) {
                    return Err(Error::param("data_norm", "must be nonnegative"));
                }
            }
            positive("residual_tolerance", p.residual_tolerance)?;
            positive("energy_drift_tolerance", p.energy_drift_tolerance)?;
            if !(p.cfl_fraction > 0.0 && p.cfl_fraction <= 1.0) {
                return Err(Error::param("cfl_fraction", "must be in (0, 1]"));
            }
        }
        Experiment::VerifyKernel(p) => {
            count("samples", p.samples, MAX_SAMPLES)?;
            if !(2..=1024).contains(&p.lattice) {
                return Err(Error::param("lattice", "must be in [2, 1024]"));
            }
            for (name, r) in [("ranges.xi_norm", p.ranges.xi_norm), ("ranges.tau_excess", p.ranges.tau_excess)] {
                if !(r[0] > 0.0 && r[1] >= r[0] && r[1].is_finite()) {
                    return Err(Error::param(name, format!("need 0 < lo ≤ hi, got {r:?}")));
                }
            }
            for (name, v) in [
                ("tolerance", p.tolerance),
                ("identity_tolerance", p.identity_tolerance),
                ("jacobian_tolerance", p.jacobian_tolerance),
            ] {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::param(name, "must be nonnegative"));
                }
            }
        }
        Experiment::EstimateConstant(p) => {
            count("trials", p.trials, MAX_TRIALS)?;
            count("family.bumps", p.family.bumps, 64)?;
            grid_size(p.n, p.box_length)?;
            positive("schedule_constant", p.schedule_constant)?;
            p.options(0).validate()?;
        }
        Experiment::SelfsimilarSearch(p) => {
            count("runs", p.runs, MAX_TRIALS)?;
            p.options.validate()?;
            positive("identity_tolerance", p.identity_tolerance)?;
        }
        Experiment::Continuity(p) => {
            grid_size(p.n, p.box_length)?;
            positive("K", p.k)?;
            positive("C", p.c)?;
            count("M", p.intervals, MAX_TRIALS)?;
            p.picard_options().validate()?;
            p.data.validate()?;
            p.perturbation.validate()?;
            if p.epsilons.is_empty() || p.epsilons.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
                return Err(Error::param("epsilons", "need at least one nonnegative value"));
            }
            if let Some(d) = p.data_norm {
                if !(d.is_finite() && d >= 0.0) {
                    return Err(Error::param("data_norm", "must be nonnegative"));
                }
            }
            if !(p.slack.is_finite() && p.slack >= 0.0) {
                return Err(Error::param("slack", "must be nonnegative"));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_schedule_config() {
        let c = RunConfig::from_json(r#"{"command": "schedule", "parameters": {"K": 1, "C": 1}}"#).unwrap();
        match &c.experiment {
            Experiment::Schedule(p) => assert_eq!((p.k, p.c), (1.0, 1.0)),
            other => panic!("{other:?}"),
        }
        assert_eq!(c.output_dir(), PathBuf::from("cmcwave-out/schedule"));
    }

    #[test]
    fn defaults_fill_missing_parameters() {
        let c = RunConfig::from_json(r#"{"command": "verify-kernel", "seed": 3}"#).unwrap();
        assert_eq!(c.experiment, Experiment::VerifyKernel(KernelParams::default()));
    }

    #[test]
    fn resolved_config_round_trips() {
        for command in Command::ALL {
            let mut c = RunConfig::new(command);
            c.seed = Some(11);
            c.output = Some("x".into());
            let back = RunConfig::from_json(&c.to_json()).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn field_level_diagnostics() {
        let err = |text: &str| RunConfig::from_json(text).unwrap_err().to_string();
        assert!(err(r#"{"command": "schedule", "parameters": {"K": "a"}}"#).contains("parameters.K"));
        assert!(err(r#"{"command": "schedule", "parameters": {"k": 1}}"#).contains("unknown field"));
        assert!(err(r#"{"command": "schedule", "parameters": {"K": -1}}"#).contains("parameters.K"));
        assert!(err(r#"{"command": "nope"}"#).contains("unknown `nope`"));
        assert!(err(r#"{"command": "schedule", "extra": 1}"#).contains("unknown field"));
        assert!(err(r#"{"command": "verify-kernel"}"#).contains("seed"));
        assert!(err(r#"{"command": "simulate", "seed": 1, "parameters": {"n": 12}}"#).contains("parameters"));
        assert!(
            err(r#"{"command": "selfsimilar-search", "seed": 1, "parameters": {"options": {"radial_nodes": 8}}}"#)
                .contains("parameters.radial_nodes")
        );
    }

    #[test]
    fn deterministic_data_needs_no_seed() {
        let text = r#"{"command": "simulate", "parameters": {"data": {"kind": "zero"}}}"#;
        assert!(RunConfig::from_json(text).is_ok());
    }
}
