use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::error::{Error, Result};

pub const REPORT_FORMAT: &str = "cmcwave-report";
pub const REPORT_FORMAT_VERSION: u32 = 1;
pub const REPORT_FILE: &str = "report.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }

    pub fn holds(self, measured: f64, threshold: f64) -> bool {
        match self {
            Relation::Le => measured <= threshold,
            Relation::Lt => measured < threshold,
            Relation::Ge => measured >= threshold,
            Relation::Gt => measured > threshold,
        }
    }
}

/// `measured <relation> threshold`; a non-finite measurement fails.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub name: String,
    pub measured: Option<f64>,
    pub relation: Relation,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub format: String,
    pub version: u32,
    pub config: RunConfig,
    pub versions: BTreeMap<String, String>,
    pub wall_time_seconds: f64,
    pub threads: usize,
    /// Sorted by name.
    pub checks: Vec<Check>,
    pub scalars: BTreeMap<String, f64>,
    /// Paths relative to the report's directory.
    pub artifacts: BTreeMap<String, PathBuf>,
    pub notes: Vec<String>,
    pub passed: bool,
}

impl RunReport {
    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Canonical JSON: keys sorted at every level.
    pub fn to_json(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        Ok(serde_json::to_string_pretty(&value)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: RunReport = serde_json::from_str(text).map_err(|e| Error::Decode(format!("report: {e}")))?;
        if report.format != REPORT_FORMAT || report.version != REPORT_FORMAT_VERSION {
            return Err(Error::Decode(format!(
                "unknown report format {:?} version {}",
                report.format, report.version
            )));
        }
        Ok(report)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

pub fn versions() -> BTreeMap<String, String> {
    BTreeMap::from([
        ("cmcwave-core".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("report".to_string(), REPORT_FORMAT_VERSION.to_string()),
        ("target".to_string(), format!("{}-{}", std::env::consts::ARCH, std::env::consts::OS)),
    ])
}

/// Collects checks, scalars and artifacts while an experiment runs.
#[derive(Debug)]
pub struct Recorder {
    dir: PathBuf,
    checks: Vec<Check>,
    scalars: BTreeMap<String, f64>,
    artifacts: BTreeMap<String, PathBuf>,
    notes: Vec<String>,
}

impl Recorder {
    pub fn new(dir: PathBuf) -> Result<Self> {
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            checks: Vec::new(),
            scalars: BTreeMap::new(),
            artifacts: BTreeMap::new(),
            notes: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn check(&mut self, name: impl Into<String>, measured: f64, relation: Relation, threshold: f64) -> bool {
        let passed = measured.is_finite() && relation.holds(measured, threshold);
        self.checks.push(Check {
            name: name.into(),
            measured: measured.is_finite().then_some(measured),
            relation,
            threshold,
            passed,
        });
        passed
    }

    /// Non-finite values are recorded as notes, since JSON has no encoding
    /// for them.
    pub fn scalar(&mut self, name: impl Into<String>, value: f64) {
        let name = name.into();
        if value.is_finite() {
            self.scalars.insert(name, value);
        } else {
            self.notes.push(format!("scalar {name} is {value}"));
        }
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Path inside the output directory for a new artifact.
    pub fn path(&self, file: &str) -> PathBuf {
        self.dir.join(file)
    }

    pub fn artifact(&mut self, name: impl Into<String>, file: &str) {
        self.artifacts.insert(name.into(), PathBuf::from(file));
    }

    pub fn write_text(&mut self, name: &str, file: &str, text: &str) -> Result<()> {
        std::fs::write(self.path(file), text)?;
        self.artifact(name, file);
        Ok(())
    }

    pub fn finish(mut self, config: RunConfig, wall_time_seconds: f64) -> RunReport {
        self.checks.sort_by(|a, b| a.name.cmp(&b.name));
        let passed = self.checks.iter().all(|c| c.passed);
        RunReport {
            format: REPORT_FORMAT.into(),
            version: REPORT_FORMAT_VERSION,
            config,
            versions: versions(),
            wall_time_seconds,
            threads: rayon::current_num_threads(),
            checks: self.checks,
            scalars: self.scalars,
            artifacts: self.artifacts,
            notes: self.notes,
            passed,
        }
    }
}
