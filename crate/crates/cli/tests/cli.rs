use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strichartz")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn without_elapsed(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("elapsed_ms");
    v
}

#[test]
fn constants_in_two_dimensions() {
    let out = run(&["constants", "--dim", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.contains("5.00000000000000e-1"));
    assert!(text.contains("4.57860238696217e-2"));
    let v = report(&out);
    assert_eq!(v["command"], "constants");
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn table_csv_has_22_rows_matching_published_values() {
    let out = run(&["table-f", "--m-min", "3", "--m-max", "6", "--csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m,j,value"));
    let rows: Vec<(usize, usize, f64)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 22);
    let (_, _, f30) = rows.iter().find(|r| r.0 == 3 && r.1 == 0).unwrap();
    assert!((f30 - 0.841).abs() < 1e-3);
    let (_, _, f42) = rows.iter().find(|r| r.0 == 4 && r.1 == 2).unwrap();
    assert!((f42 - 0.664).abs() < 1e-3);
}

#[test]
fn combinatorics_passes() {
    let out = run(&["combinatorics", "--m-max", "25"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    assert_eq!(v["outputs"]["central_binomial"]["equality_at"], serde_json::json!([1]));
}

#[test]
fn usage_errors_exit_with_code_two() {
    let out = run(&["constants", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["constants", "--dim", "3"]).status.code(), Some(2));
    assert_eq!(run(&["expansion", "--deltas", "0.2,x"]).status.code(), Some(2));
    assert_eq!(run(&["constants", "--csv"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--gamma", "0.5"]).status.code(), Some(2));
}

#[test]
fn failed_check_exits_with_code_one() {
    let out = run(&["coercivity", "--tol", "1e-30"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(report(&out)["checks"].as_array().unwrap().iter().any(|c| c["pass"] == false));
}

#[test]
fn reports_are_deterministic() {
    let args = ["hermite", "--cutoff", "12"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(without_elapsed(report(&a)), without_elapsed(report(&b)));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&["combinatorics", "--m-max", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["inputs"]["m_max"], 5);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    std::fs::write(&path, r#"{"m-min": 4, "m-max": 5}"#).unwrap();
    let cfg = path.to_str().unwrap();
    let v = report(&run(&["table-f", "--config", cfg]));
    assert_eq!(v["inputs"]["m_min"], 4);
    assert_eq!(v["inputs"]["m_max"], 5);
    let v = report(&run(&["table-f", "--config", cfg, "--m-max", "6"]));
    assert_eq!(v["inputs"]["m_min"], 4);
    assert_eq!(v["inputs"]["m_max"], 6);
    std::fs::write(&path, r#"{"unknown": 1}"#).unwrap();
    assert_eq!(run(&["table-f", "--config", cfg]).status.code(), Some(2));
}

#[test]
fn gauge_fix_reads_datum_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("datum.json");
    let c0 = std::f64::consts::PI.powf(-0.25);
    std::fs::write(&path, format!(r#"{{"dim": 1, "coeffs": [{c0}, 0.02, 0, 0, 0, 0, 0, 0, 0]}}"#)).unwrap();
    let out = run(&["gauge-fix", "--datum", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = report(&out);
    assert!(v["outputs"]["orthogonality_moments_max_abs"].as_f64().unwrap() < 1e-6);
    std::fs::write(&path, r#"{"dim": 1, "coeffs": "nope"}"#).unwrap();
    assert_eq!(run(&["gauge-fix", "--datum", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn selftest_runs_selected_criteria() {
    let out = run(&["selftest", "--only", "4,6"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.iter().any(|n| n.starts_with("c4.")));
    assert!(names.iter().any(|n| n.starts_with("c6.")));
    assert_eq!(run(&["selftest", "--only", "11"]).status.code(), Some(2));
}
