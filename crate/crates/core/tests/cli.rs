//! Runs the `contour-pdo` binary on small configurations.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_contour-pdo"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn run(config: &Path, out: &Path) -> Output {
    bin()
        .args([
            "run",
            config.to_str().unwrap(),
            "--threads",
            "1",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap()
}

const PARAMS: &str = r#""params": {"r": 1.0, "r_prime": 0.6, "r_dprime": 0.8, "delta": 0.1, "delta_prime": 0.09, "epsilon": 0.5, "truncation": 2.0}"#;

fn resolvent_extend() -> String {
    format!(
        r#"{{
  "version": "1",
  "dimension": 1,
  "action": "extend",
  "symbol": {{"kind": "resolvent", "params": {{}}}},
  "input": {{"kind": "bump_resolvent", "params": {{}}}},
  {PARAMS},
  "grid": {{"re": {{"min": -0.2, "max": 0.2, "count": 3}}, "im": {{"min": 0.0, "max": 0.05, "count": 2}}}},
  "output": {{"prefix": "res"}}
}}"#
    )
}

#[test]
fn resolvent_extension_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "res.json", &resolvent_extend());
    let out = run(&cfg, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let mut reader = csv::Reader::from_path(dir.path().join("res.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        [
            "re_x_1",
            "im_x_1",
            "re_value",
            "im_value",
            "decay_margin",
            "rho_max",
            "err_estimate"
        ]
    );
    let rows: Vec<Vec<f64>> = reader
        .records()
        .map(|r| r.unwrap().iter().map(|s| s.parse::<f64>().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 6);
    let origin = rows.iter().find(|r| r[0] == 0.0 && r[1] == 0.0).expect("x = 0 row");
    assert!((origin[2] - (-1.0f64).exp()).abs() < 1e-5, "{}", origin[2]);
    assert!(origin[3].abs() < 1e-5);
    assert!((origin[4] - 0.09).abs() < 1e-12);

    let diag: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("res_diagnostics.json")).unwrap()).unwrap();
    assert_eq!(diag["exit_code"], 0);
    assert_eq!(diag["config"]["action"], "extend");
    assert!(diag["derived"]["t0"].as_f64().unwrap() > 0.0);
    assert!(dir.path().join("res_abs.dat").exists());
    assert!(dir.path().join("res_arg.dat").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "res.json", &resolvent_extend());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run(&cfg, &a).status.code(), Some(0));
    assert_eq!(run(&cfg, &b).status.code(), Some(0));
    assert_eq!(
        fs::read(a.join("res.csv")).unwrap(),
        fs::read(b.join("res.csv")).unwrap()
    );
}

#[test]
fn invalid_slope_exits_with_config_status() {
    let dir = tempfile::tempdir().unwrap();
    let body = resolvent_extend().replace("\"epsilon\": 0.5", "\"epsilon\": 0.3");
    let cfg = write_config(dir.path(), "bad.json", &body);
    let out = run(&cfg, dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("δ′/(r″−r′)") && err.contains("≥ ε"), "{err}");
}

#[test]
fn unknown_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let body = resolvent_extend().replace("\"dimension\"", "\"extra\": 1, \"dimension\"");
    let out = run(&write_config(dir.path(), "bad.json", &body), dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn points_outside_the_polydisc_fail_with_domain_status() {
    let dir = tempfile::tempdir().unwrap();
    let body = resolvent_extend().replace(
        r#""re": {"min": -0.2, "max": 0.2, "count": 3}, "im": {"min": 0.0, "max": 0.05, "count": 2}"#,
        r#""points": [[0.0], [[0.0, 0.2]]]"#,
    );
    let out = run(&write_config(dir.path(), "far.json", &body), dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("res.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(2).unwrap().contains("NaN"));
}

#[test]
fn identity_verify_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        r#"{{
  "version": "1",
  "dimension": 1,
  "action": "verify",
  "symbol": {{"kind": "constant", "params": {{"value": 1.0}}}},
  "input": {{"kind": "gaussian", "params": {{}}}},
  {PARAMS},
  "grid": {{"re": {{"min": -0.3, "max": 0.3, "count": 4}}, "im": {{"min": -0.05, "max": 0.05, "count": 3}}}},
  "samples": 2000,
  "seed": 3
}}"#
    );
    let out = run(&write_config(dir.path(), "verify.json", &body), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let diag: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run_diagnostics.json")).unwrap()).unwrap();
    let checks = diag["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["passed"] == true));
}

#[test]
fn schema_lists_the_main_keys() {
    let out = bin().arg("schema").output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["version"], "1");
    for key in ["action", "params", "grid", "schedule", "quadrature", "output"] {
        assert!(v["fields"].get(key).is_some(), "{key}");
    }
    assert!(v["fields"]["params"].get("delta_prime").is_some());
    assert!(v["fields"]["params"].get("epsilon").is_some());
    assert_eq!(v["fields"]["schedule"]["default"]["lambda_values"][0], 0.5);
}
