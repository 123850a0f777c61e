// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn chirocool(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chirocool")).args(args).env_remove("CHIROCOOL_JOBS").output().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const TWO_ION: [&str; 8] = ["--eta", "0.04", "--omega", "1,0.1", "--gamma-r", "0.085", "--gamma-l", "0.015"];

#[test]
fn help_and_version_exit_zero_and_state_units() {
    let out = chirocool(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("trap frequency"), "{text}");
    for sub in ["steady", "evolve", "analytic", "reduced", "sweep", "validate"] {
        let out = chirocool(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{sub}");
        assert!(String::from_utf8_lossy(&out.stdout).contains("trap frequency"), "{sub}");
    }
    assert_eq!(chirocool(&["--version"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(chirocool(&["steady", "--bogus"]).status.code(), Some(1));
    assert_eq!(chirocool(&[]).status.code(), Some(1));
    let out = chirocool(&["steady", "--omega", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eta"));
}

#[test]
fn steady_writes_results_and_manifest_last() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["steady"];
    args.extend(TWO_ION);
    args.extend(["--out", dir.path().to_str().unwrap()]);
    let out = chirocool(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let steady = read_json(&dir.path().join("steady.json"));
    let n = steady["observables"]["n"].as_array().or_else(|| steady["n"].as_array()).expect("occupations");
    assert_eq!(n.len(), 2);
    assert!(n.iter().all(|v| v.as_f64().unwrap() > 0.0));

    let manifest_path = dir.path().join("manifest.json");
    let manifest = read_json(&manifest_path);
    assert_eq!(manifest["subcommand"], "steady");
    assert_eq!(manifest["config"]["n_ions"], 2);
    assert!(manifest["outputs"].as_array().is_some_and(|o| !o.is_empty()));
    let modified = |p: &Path| std::fs::metadata(p).unwrap().modified().unwrap();
    assert!(modified(&manifest_path) >= modified(&dir.path().join("steady.json")));
}

#[test]
fn config_file_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    std::fs::write(&path, r#"{"eta": 0.04, "omega": [1.0], "gamma_rr": 0.1}"#).unwrap();
    let out = chirocool(&["steady", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma_rr"));

    std::fs::write(&path, r#"{"omega": [1.0], "gamma_ng": 0.1}"#).unwrap();
    let out = chirocool(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eta"));

    // command-line flags override the file
    let out = chirocool(&["validate", "--config", path.to_str().unwrap(), "--eta", "0.04"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn invalid_physics_is_reported() {
    let out = chirocool(&["validate", "--eta", "0.04", "--omega", "1", "--gamma-r", "-0.1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("gamma_r"));
}

#[test]
fn unwritable_output_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let target = blocker.join("sub");
    let out = chirocool(&["steady", "--eta", "0.04", "--omega", "1", "--gamma-ng", "0.1", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn evolve_writes_trajectory_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let out = chirocool(&[
        "evolve", "--eta", "0.04", "--omega", "0.2", "--gamma-ng", "0.1", "--n-max", "3", "--t-end", "400", "--samples", "41",
        "--fit", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,n_1,ntilde_1");
    assert_eq!(lines.count(), 41);
    // 400 time units is too short for the 5% tail criterion: the fit fails in-band
    let fits = read_json(&dir.path().join("fits.json"));
    assert!(fits[0]["error"].as_str().unwrap().contains("too short"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning: ion 1"));
    assert_eq!(read_json(&dir.path().join("manifest.json"))["subcommand"], "evolve");
}

#[test]
fn analytic_prints_json() {
    let out = chirocool(&["analytic", "--eta", "0.04", "--omega", "1", "--gamma", "0.1", "--gamma-r", "0.07"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["n_st_single"].as_f64().unwrap() - 8.25e-4).abs() < 1e-15);
    assert!((v["beta0"].as_f64().unwrap() - 0.7015).abs() < 1e-3);
}

#[test]
fn reduced_solve_and_grid() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = chirocool(&["reduced", "--n-ions", "4", "--gamma-r-over-gamma", "0.4", "--beta", "0.9", "--out", d]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("reduced.json").exists());

    let out = chirocool(&["reduced", "--n-ions", "3", "--grid", "6", "--out", d]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(std::fs::read_to_string(dir.path().join("reduced_grid.csv")).unwrap().lines().count() > 10);

    assert_ne!(chirocool(&["reduced", "--n-ions", "1", "--out", d]).status.code(), Some(0));
}

#[test]
fn sweep_from_preset_and_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = chirocool(&["sweep", "--preset", "fig2a", "--points1", "3", "--points2", "2", "--jobs", "2", "--out", d]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("fig2a.csv")).unwrap();
    // 3 × 2 points, four observables each
    assert_eq!(csv.lines().count(), 1 + 6 * 4);
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["sweep"]["name"], "fig2a");
    assert_eq!(manifest["spec_hash"].as_str().unwrap().len(), 64);

    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, serde_json::to_string(&manifest["sweep"]).unwrap()).unwrap();
    let again = dir.path().join("again");
    let out = chirocool(&["sweep", "--spec", spec.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(again.join("fig2a.csv")).unwrap(), csv);

    assert_eq!(chirocool(&["sweep", "--preset", "nope", "--out", d]).status.code(), Some(1));
}
