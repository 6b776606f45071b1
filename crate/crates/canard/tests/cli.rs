//! Black-box tests of the command-line binary: exit codes, output files,
//! and byte determinism.

use std::path::Path;
use std::process::{Command, Output};

fn canard(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_canard"))
        .arg("--out-dir")
        .arg(out_dir)
        .args(args)
        .env_remove("CANARD_OUT_DIR")
        .output()
        .expect("binary should spawn")
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort_by(|a, b| a.0.cmp(&b.0));
    files
}

#[test]
fn construct_reports_critical_point_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = canard(&["construct"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("critical_points=1"), "{text}");
    assert!(dir.path().join("model_hopf.json").is_file());
    assert!(dir.path().join("transition_hopf.csv").is_file());
    assert!(dir.path().join("transition_hopf.svg").is_file());

    let out = canard(&["construct", "--kind", "jump"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("critical_points=3"), "{text}");
}

#[test]
fn model_json_carries_schema_field() {
    let dir = tempfile::tempdir().unwrap();
    assert!(canard(&["construct"], dir.path()).status.success());
    let text = std::fs::read_to_string(dir.path().join("model_hopf.json")).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["schema"], "model/1");
    assert_eq!(doc["validation"]["pass"], true);
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "klnd = \"hopf\"\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_canard"))
        .args(["--config", cfg.to_str().unwrap(), "construct"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let cfg2 = dir.path().join("bad2.toml");
    std::fs::write(&cfg2, "eps = [2.0]\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_canard"))
        .args(["--config", cfg2.to_str().unwrap(), "sdi"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sdi_zero_counts_match_seed_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = canard(&["sdi", "--expect-seeds"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("zeros=1"), "{text}");

    let out = canard(&["sdi", "--kind", "jump", "--expect-seeds"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("zeros=2"), "{text}");
    assert!(dir.path().join("sdi_jump.csv").is_file());
    assert!(dir.path().join("sdi_zeros_jump.csv").is_file());
}

#[test]
fn flat_profile_fails_seed_expectation_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("null.toml");
    std::fs::write(&cfg, "delta = 0.0\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_canard"))
        .args(["--config", cfg.to_str().unwrap(), "sdi", "--expect-seeds"])
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    // without the expectation the same run is a clean success
    let out = Command::new(env!("CARGO_BIN_EXE_canard"))
        .args(["--config", cfg.to_str().unwrap(), "sdi"])
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn cycles_with_large_eps_reports_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = canard(&["cycles", "--eps", "0.5"], dir.path());
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("cycles_hopf_eps0.5.json")).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["schema"], "cycle-report/1");
    assert!(doc["fixed_points"].as_array().unwrap().len() <= 1);
    assert!(dir.path().join("orbits_hopf_eps0.5.svg").is_file());
}

#[test]
fn unsupported_formats_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = canard(&["cycles", "--eps", "0.5", "--out", "yaml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = canard(
        &["cycles", "--eps", "0.5", "--emit-orbits", "pdf"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    for d in [&d1, &d2] {
        assert!(canard(&["construct"], d.path()).status.success());
        assert!(canard(&["sdi"], d.path()).status.success());
        assert!(canard(&["cycles", "--eps", "0.5"], d.path())
            .status
            .success());
    }
    let a = read_dir_bytes(d1.path());
    let b = read_dir_bytes(d2.path());
    assert_eq!(a.len(), b.len());
    for ((name_a, bytes_a), (name_b, bytes_b)) in a.iter().zip(&b) {
        assert_eq!(name_a, name_b);
        assert_eq!(bytes_a, bytes_b, "{name_a} differs between runs");
    }
}

#[test]
fn env_var_sets_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_canard"))
        .env("CANARD_OUT_DIR", dir.path())
        .arg("construct")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("model_hopf.json").is_file());
}

#[test]
fn sweep_flag_round_trips_through_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = canard(
        &["cycles", "--eps", "0.5", "--sweep", "a=-2e-3:2e-3:25"],
        dir.path(),
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("cycles_hopf_eps0.5.json")).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    // the sweep table holds the coarse grid plus refinement probes
    assert!(doc["sweep"].as_array().unwrap().len() >= 25);
    let params: Vec<f64> = doc["sweep"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["param"].as_f64().unwrap())
        .collect();
    assert_eq!(params[0], -2e-3);
    assert_eq!(*params.last().unwrap(), 2e-3);
}
