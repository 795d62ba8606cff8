use std::path::Path;
use std::process::{Command, Output};

fn cmcwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmcwave")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn schedule_runs_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.json", r#"{"parameters":{"K":1,"C":1}}"#);
    let out = dir.path().join("out");
    let o = cmcwave(&["schedule", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("pass  schedule.step_contraction"));
    let schedule: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("schedule.json")).unwrap()).unwrap();
    assert_eq!(schedule["a"], 4.0);
    assert!(out.join("report.json").exists());
}

#[test]
fn invalid_configs_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let unseeded = cmcwave(&["verify-kernel", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&unseeded), 2);
    assert!(String::from_utf8_lossy(&unseeded.stderr).contains("seed"));

    let bad_n = write(dir.path(), "n.json", r#"{"seed":1,"parameters":{"n":12}}"#);
    let o = cmcwave(&["simulate", "--config", &bad_n]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("parameters.n"));

    let unknown = write(dir.path(), "u.json", r#"{"seed":1,"parameters":{"nn":12}}"#);
    assert_eq!(code(&cmcwave(&["simulate", "--config", &unknown])), 2);

    let wrong = write(dir.path(), "w.json", r#"{"command":"schedule"}"#);
    assert_eq!(code(&cmcwave(&["continuity", "--config", &wrong])), 2);
}

#[test]
fn print_config_shows_defaults() {
    let o = cmcwave(&["continuity", "--seed", "3", "--print-config"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["command"], "continuity");
    assert_eq!(v["seed"], 3);
    assert_eq!(v["parameters"]["n"], 64);
}

#[test]
fn replay_flags_altered_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "k.json", r#"{"parameters":{"samples":5000,"lattice":5}}"#);
    let out = dir.path().join("k");
    let o = cmcwave(&["verify-kernel", "--config", &cfg, "--seed", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));

    let same = cmcwave(&["replay", out.to_str().unwrap()]);
    assert_eq!(code(&same), 0);
    assert!(String::from_utf8_lossy(&same.stdout).contains("reproduced: true"));

    let other = cmcwave(&["replay", out.to_str().unwrap(), "--seed", "2"]);
    assert_eq!(code(&other), 1);
    assert!(String::from_utf8_lossy(&other.stdout).contains("config mismatch: seed"));
}
