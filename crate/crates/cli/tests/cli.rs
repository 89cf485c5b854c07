//! End-to-end checks of the command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ising-ring"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "ising-ring-cli-{name}-{}",
        std::process::id()
    ));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn evolve_config(out_dir: &Path) -> String {
    format!(
        r#"{{
  "seed": 11,
  "output-dir": "{}",
  "experiment": {{ "evolve": {{
    "model": {{ "n-sites": 8, "h-x": 0.05, "h-z": -2.0 }},
    "schedule": {{ "constant": {{ "duration": 10.0 }} }},
    "dt": 0.1,
    "record-every": 1.0
  }} }}
}}"#,
        out_dir.display()
    )
}

#[test]
fn evolve_run_emits_trajectory_and_manifest() {
    let dir = scratch("evolve");
    let out_a = dir.join("a");
    let cfg = write_config(&dir, "evolve.json", &evolve_config(&out_a));
    run_ok(&["run", cfg.to_str().unwrap()]);
    assert!(out_a.join("trajectory.csv").exists());
    let manifest = fs::read_to_string(out_a.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 11"));
    assert!(manifest.contains("\"experiment\": \"evolve\""));

    // byte-identical rerun under the same config and seed
    let out_b = dir.join("b");
    let cfg_b = write_config(&dir, "evolve-b.json", &evolve_config(&out_b));
    run_ok(&["run", cfg_b.to_str().unwrap()]);
    let a = fs::read(out_a.join("trajectory.csv")).unwrap();
    let b = fs::read(out_b.join("trajectory.csv")).unwrap();
    assert_eq!(a, b, "reruns must reproduce byte-identical CSVs");

    // plotting the artifact yields an SVG
    run_ok(&["plot", out_a.to_str().unwrap()]);
    let svg = fs::read_to_string(out_a.join("trajectory.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn malformed_config_exits_2_without_artifacts() {
    let dir = scratch("malformed");
    let out_dir = dir.join("should-not-exist");
    let cfg = write_config(
        &dir,
        "bad.json",
        &format!(
            r#"{{ "seed": 1, "output-dir": "{}", "experiment": {{ "evolve": {{"#,
            out_dir.display()
        ),
    );
    let out = bin().args(["run", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir.exists(), "no partial artifacts on config errors");
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn unknown_field_rejected_with_exit_2() {
    let dir = scratch("unknown-field");
    let cfg = write_config(
        &dir,
        "unknown.json",
        r#"{ "seed": 1, "typo-field": true, "experiment": { "evolve": {
            "model": { "n-sites": 8, "h-x": 0.05, "h-z": -2.0 },
            "schedule": { "constant": { "duration": 1.0 } },
            "dt": 0.1, "record-every": 1.0 } } }"#,
    );
    let out = bin().args(["run", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn seed_override_changes_manifest_hash() {
    let dir = scratch("seed-override");
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    let cfg_a = write_config(&dir, "a.json", &evolve_config(&out_a));
    let cfg_b = write_config(&dir, "b.json", &evolve_config(&out_b));
    run_ok(&["run", cfg_a.to_str().unwrap()]);
    run_ok(&["run", cfg_b.to_str().unwrap(), "--seed", "99"]);
    let ma = fs::read_to_string(out_a.join("manifest.json")).unwrap();
    let mb = fs::read_to_string(out_b.join("manifest.json")).unwrap();
    assert!(mb.contains("\"seed\": 99"));
    let hash = |m: &str| {
        m.lines()
            .find(|l| l.contains("config_hash"))
            .unwrap()
            .to_string()
    };
    assert_ne!(hash(&ma), hash(&mb), "hash must track every config field");
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn scan_artifacts_and_spot_check() {
    let dir = scratch("scan");
    let out_dir = dir.join("scan-out");
    let cfg = write_config(
        &dir,
        "scan.json",
        &format!(
            r#"{{
  "seed": 3,
  "output-dir": "{}",
  "experiment": {{ "scan": {{
    "model": {{ "n-sites": 6, "h-x": 0.01, "h-z": -1.0 }},
    "h-z-start": -2.5, "h-z-stop": -1.5, "h-z-steps": 5,
    "crossing-scale": 1.0, "h-z-initial": 1.0,
    "pause": 30.0, "dt": 0.1, "record-every": 10.0
  }} }}
}}"#,
            out_dir.display()
        ),
    );
    run_ok(&["run", cfg.to_str().unwrap()]);
    let scan_json = fs::read_to_string(out_dir.join("scan.json")).unwrap();
    let scan: serde_json::Value = serde_json::from_str(&scan_json).unwrap();
    let points = scan["points"].as_array().unwrap();
    assert_eq!(points.len(), 5);
    assert!(out_dir.join("heatmap.csv").exists());

    // spot-check one grid point against a direct evolve run of the same
    // flip-then-pause schedule
    let grid_hz = points[2]["h_z"].as_f64().unwrap();
    let crossing = (1.0f64 * grid_hz * grid_hz).max(2.0);
    let direct_dir = dir.join("direct");
    let cfg_direct = write_config(
        &dir,
        "direct.json",
        &format!(
            r#"{{
  "seed": 3,
  "output-dir": "{}",
  "experiment": {{ "evolve": {{
    "model": {{ "n-sites": 6, "h-x": 0.01, "h-z": {grid_hz} }},
    "schedule": {{ "segments": {{ "segments": [
      {{ "duration": {crossing}, "h_x": {{"kind": "constant", "value": 0.01}},
         "h_z": {{"kind": "linear", "from": 1.0, "to": {grid_hz}}} }},
      {{ "duration": 30.0, "h_x": {{"kind": "constant", "value": 0.01}},
         "h_z": {{"kind": "constant", "value": {grid_hz}}} }}
    ] }} }},
    "dt": 0.1,
    "record-every": 10.0
  }} }}
}}"#,
            direct_dir.display()
        ),
    );
    run_ok(&["run", cfg_direct.to_str().unwrap()]);
    let traj = fs::read_to_string(direct_dir.join("trajectory.csv")).unwrap();
    let last = traj.lines().last().unwrap();
    let m_direct: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    let m_scan = points[2]["final_m"].as_f64().unwrap();
    assert!(
        (m_direct - m_scan).abs() < 1e-9,
        "scan point {m_scan} vs direct evolve {m_direct}"
    );

    run_ok(&["plot", out_dir.to_str().unwrap()]);
    assert!(out_dir.join("scan.svg").exists());
    assert!(out_dir.join("heatmap.svg").exists());
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn sample_artifacts_round_trip() {
    let dir = scratch("sample");
    let out_dir = dir.join("shots-out");
    let cfg = write_config(
        &dir,
        "sample.json",
        &format!(
            r#"{{
  "seed": 21,
  "output-dir": "{}",
  "experiment": {{ "sample": {{
    "model": {{ "n-sites": 6, "h-x": 0.3, "h-z": -1.0 }},
    "schedule": {{ "constant": {{ "duration": 3.0 }} }},
    "count": 128
  }} }}
}}"#,
            out_dir.display()
        ),
    );
    run_ok(&["run", cfg.to_str().unwrap()]);
    let text = fs::read_to_string(out_dir.join("shots.txt")).unwrap();
    assert_eq!(text.lines().count(), 128);
    assert!(text.lines().all(|l| l.len() == 6));
    let bin_bytes = fs::read(out_dir.join("shots.bin")).unwrap();
    let shots = ising_ring::observables::ShotSet::read_binary(bin_bytes.as_slice()).unwrap();
    assert_eq!(shots.count(), 128);
    assert_eq!(shots.seed, 21);
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn existing_output_directory_rejected() {
    let dir = scratch("existing");
    let out_dir = dir.join("occupied");
    fs::create_dir_all(&out_dir).unwrap();
    let cfg = write_config(&dir, "cfg.json", &evolve_config(&out_dir));
    let out = bin().args(["run", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn env_var_sets_output_root() {
    let dir = scratch("env-root");
    let cfg_body = r#"{ "seed": 5, "experiment": { "evolve": {
        "model": { "n-sites": 6, "h-x": 0.05, "h-z": -2.0 },
        "schedule": { "constant": { "duration": 2.0 } },
        "dt": 0.1, "record-every": 1.0 } } }"#;
    let cfg = write_config(&dir, "cfg.json", cfg_body);
    let out = bin()
        .args(["run", cfg.to_str().unwrap()])
        .env("ISING_RING_OUT", &dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let printed = String::from_utf8_lossy(&out.stdout);
    let run_dir = PathBuf::from(printed.trim());
    assert!(run_dir.starts_with(&dir));
    assert!(run_dir.join("trajectory.csv").exists());
    fs::remove_dir_all(&dir).unwrap();
}
