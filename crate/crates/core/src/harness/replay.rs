use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::report::RunReport;
use super::run::run;
use crate::error::{Error, Result};

/// Relative agreement required of replayed scalars.
pub const REPLAY_TOLERANCE: f64 = 1e-12;
pub const REPLAY_FILE: &str = "replay.json";

#[derive(Clone, Debug, Default)]
pub struct ReplayOptions {
    /// Replaces the recorded seed; a different value is flagged.
    pub seed: Option<u64>,
    /// Defaults to `replay/` next to the original report.
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarMismatch {
    pub name: String,
    pub original: Option<f64>,
    pub replayed: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub original: PathBuf,
    pub config_mismatch: bool,
    /// Top-level config fields that differ, ignoring the output directory.
    pub config_differences: Vec<String>,
    pub scalar_mismatches: Vec<ScalarMismatch>,
    /// Checks whose verdict changed.
    pub check_mismatches: Vec<String>,
    pub reproduced: bool,
    pub report: RunReport,
}

fn scalars_agree(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= REPLAY_TOLERANCE * a.abs().max(b.abs())
}

/// Re-executes the run recorded at `report_path` and compares every scalar
/// and check verdict.
pub fn replay(report_path: &Path, options: &ReplayOptions) -> Result<ReplayReport> {
    let original = RunReport::read(report_path)?;
    let base = report_path.parent().unwrap_or(Path::new("."));
    for (name, file) in &original.artifacts {
        if !base.join(file).exists() {
            return Err(Error::Replay(format!(
                "missing artifact `{name}` at {}",
                base.join(file).display()
            )));
        }
    }
    let mut config: RunConfig = original.config.clone();
    if let Some(seed) = options.seed {
        config.seed = Some(seed);
    }
    config.output = Some(options.output.clone().unwrap_or_else(|| base.join("replay")));

    let mut config_differences = Vec::new();
    let (a, b) = (original.config.to_value(), config.to_value());
    for key in ["command", "parameters", "seed"] {
        if a.get(key) != b.get(key) {
            config_differences.push(key.to_string());
        }
    }

    let report = run(&config)?;
    let mut scalar_mismatches = Vec::new();
    let names: std::collections::BTreeSet<&String> = original.scalars.keys().chain(report.scalars.keys()).collect();
    for name in names {
        let (x, y) = (original.scalars.get(name).copied(), report.scalars.get(name).copied());
        let agree = matches!((x, y), (Some(x), Some(y)) if scalars_agree(x, y));
        if !agree {
            scalar_mismatches.push(ScalarMismatch {
                name: name.clone(),
                original: x,
                replayed: y,
            });
        }
    }
    let mut check_mismatches = Vec::new();
    for c in &original.checks {
        match report.checks.iter().find(|d| d.name == c.name) {
            Some(d) if d.passed == c.passed => {}
            _ => check_mismatches.push(c.name.clone()),
        }
    }
    for d in &report.checks {
        if !original.checks.iter().any(|c| c.name == d.name) {
            check_mismatches.push(d.name.clone());
        }
    }
    let config_mismatch = !config_differences.is_empty();
    let out = ReplayReport {
        original: report_path.to_path_buf(),
        config_mismatch,
        config_differences,
        reproduced: !config_mismatch && scalar_mismatches.is_empty() && check_mismatches.is_empty(),
        scalar_mismatches,
        check_mismatches,
        report,
    };
    let dir = config.output_dir();
    std::fs::write(
        dir.join(REPLAY_FILE),
        serde_json::to_string_pretty(&serde_json::to_value(&out)?)?,
    )?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{Command, Experiment, KernelParams};
    use crate::harness::report::REPORT_FILE;

    fn kernel_run(dir: &Path) -> PathBuf {
        let mut c = RunConfig::new(Command::VerifyKernel);
        c.seed = Some(42);
        c.output = Some(dir.to_path_buf());
        c.experiment = Experiment::VerifyKernel(KernelParams {
            samples: 20_000,
            lattice: 6,
            ..Default::default()
        });
        run(&c).unwrap();
        dir.join(REPORT_FILE)
    }

    #[test]
    fn replay_reproduces_seeded_scan() {
        let dir = tempfile::tempdir().unwrap();
        let path = kernel_run(dir.path());
        let r = replay(&path, &ReplayOptions::default()).unwrap();
        assert!(r.reproduced, "{:?}", r.scalar_mismatches);
        assert!(dir.path().join("replay").join(REPLAY_FILE).exists());
    }

    #[test]
    fn altered_seed_is_flagged() {
        let dir = tempfile::tempdir().unwrap();
        let path = kernel_run(dir.path());
        let r = replay(
            &path,
            &ReplayOptions {
                seed: Some(43),
                output: None,
            },
        )
        .unwrap();
        assert!(r.config_mismatch);
        assert_eq!(r.config_differences, vec!["seed".to_string()]);
        assert!(!r.reproduced);
    }

    #[test]
    fn missing_artifact_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = kernel_run(dir.path());
        std::fs::remove_file(dir.path().join("kernel_extremes.csv")).unwrap();
        assert!(matches!(
            replay(&path, &ReplayOptions::default()),
            Err(Error::Replay(_))
        ));
    }

    #[test]
    fn schedule_replay_is_identical() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = RunConfig::new(Command::Schedule);
        c.output = Some(dir.path().to_path_buf());
        let first = run(&c).unwrap();
        let r = replay(&dir.path().join(REPORT_FILE), &ReplayOptions::default()).unwrap();
        assert!(r.reproduced);
        assert_eq!(r.report.scalars, first.scalars);
        let a = std::fs::read_to_string(dir.path().join("schedule.json")).unwrap();
        let b = std::fs::read_to_string(dir.path().join("replay/schedule.json")).unwrap();
        assert_eq!(a, b);
    }
}
