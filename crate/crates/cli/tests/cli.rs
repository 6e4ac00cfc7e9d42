use std::fs;
use std::path::Path;
use std::process::Command;

use swiptmc_cli::{run_experiment, CliError, Experiment, ScenarioConfig};

const SMALL: &str = "\
# quick run
trials = 2000
grid_points = 3
seed = 9
";

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn validate_run_is_reproducible() {
    let config = ScenarioConfig::parse(SMALL).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let manifest = run_experiment(Experiment::Validate, &config, a.path()).unwrap();
    run_experiment(Experiment::Validate, &config, b.path()).unwrap();

    let first = csv_files(a.path());
    assert!(!first.is_empty());
    assert_eq!(first, csv_files(b.path()));
    assert_eq!(manifest.files.len(), first.len());
    assert_eq!(manifest.seed, 9);
    assert_eq!(manifest.trials, 2000);

    let text = String::from_utf8(first[0].1.clone()).unwrap();
    assert!(text.starts_with("x,y,units,source,ci_low,ci_high"), "{text}");
    let json = fs::read_to_string(a.path().join("validate.manifest.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(value["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn empty_config_means_defaults() {
    let parsed = ScenarioConfig::parse("\n# nothing set\n").unwrap();
    assert_eq!(parsed, ScenarioConfig::default());
    parsed.validate().unwrap();
}

#[test]
fn malformed_units_are_rejected() {
    for text in ["tx_power = 30 furlongs", "ph_spacing = 5 dBm", "bandwidth = 200 kHz extra", "bogus_key = 3"] {
        let err = ScenarioConfig::parse(text).unwrap_err();
        assert_eq!(err.line, 1, "{text}");
        assert_eq!(err.key, text.split('=').next().unwrap().trim(), "{text}");
    }
}

#[test]
fn invalid_values_are_rejected_before_running() {
    let config = ScenarioConfig::parse("grid_points = 1").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let err = run_experiment(Experiment::Validate, &config, dir.path()).unwrap_err();
    assert!(matches!(err, CliError::Invalid { ref key, .. } if key == "grid_points"), "{err:?}");
    assert!(fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_swiptmc");
    let dir = tempfile::tempdir().unwrap();

    let unknown = Command::new(bin)
        .args(["run", "no-such-experiment", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("densify"));

    let config = dir.path().join("bad.cfg");
    fs::write(&config, "tx_power = thirty dBm\n").unwrap();
    let bad = Command::new(bin)
        .args(["run", "validate", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("tx_power"));

    let keys = Command::new(bin).arg("keys").output().unwrap();
    assert!(keys.status.success());
    assert!(String::from_utf8_lossy(&keys.stdout).contains("ph_spacing"));
}
