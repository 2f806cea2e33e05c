use std::path::Path;
use std::process::{Command, Output};

use delaunay_core::io::{to_json, ConstantsRecord, OrbitRecord};
use delaunay_core::ModelConstants;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_delaunay-lab")).args(args).output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

fn write_orbit(dir: &Path) -> String {
    let path = dir.join("orbit.json");
    let p = path.to_str().unwrap().to_string();
    assert_eq!(code(&["find-periodic", "--n", "5", "--T", "6", "--out", &p]), 0);
    p
}

#[test]
fn exit_code_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let orbit = write_orbit(dir.path());
    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{\"n\": 5}").unwrap();
    let garbage = garbage.to_str().unwrap();
    let unwritable = "/nonexistent-dir/out.csv";
    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec!["constants", "--n", "5"], 0),
        (vec!["constants", "--n", "16", "--json"], 0),
        (vec!["eigen", "--n", "9"], 0),
        (vec!["bubble", "--n", "6", "--t-from", "-10", "--t-to", "10", "--points", "101"], 0),
        (vec!["certify", "--input", &orbit], 0),
        (vec!["integrate", "--n", "5", "--t-end", "4"], 0),
        (vec!["constants"], 2),
        (vec!["frobnicate", "--n", "5"], 2),
        (vec!["find-periodic", "--n", "five", "--T", "6"], 2),
        (vec!["find-periodic", "--n", "5", "--T", "6", "--seed-mode", "guess"], 2),
        (vec!["constants", "--n", "4"], 3),
        (vec!["find-periodic", "--n", "5", "--T", "-1"], 3),
        (vec!["find-periodic", "--n", "5", "--T", "1", "--seed-mode", "mountain-pass"], 3),
        (vec!["find-periodic", "--n", "5", "--T", "6", "--grid", "7"], 3),
        (vec!["sweep", "--n", "5", "--T-from", "3", "--T-to", "4", "--steps", "1"], 3),
        (vec!["integrate", "--n", "5", "--t-end", "nan"], 3),
        (vec!["bubble", "--n", "5", "--t-from", "1", "--t-to", "0", "--points", "3"], 3),
        (vec!["certify", "--input", garbage], 3),
        (vec!["certify", "--input", "/nonexistent/orbit.json"], 4),
        (vec!["bubble", "--n", "5", "--t-from", "0", "--t-to", "1", "--points", "3", "--out", unwritable], 4),
        (vec!["integrate", "--n", "5", "--v0", "1.2", "--t-end", "6"], 5),
    ];
    for (args, want) in &cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(*want), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        if *want >= 3 {
            let diag: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
            assert!(diag["error"].is_string() && diag["message"].is_string(), "{args:?}");
        }
    }
}

#[test]
fn solver_failures_report_their_kind() {
    let out = run(&["integrate", "--n", "5", "--v0", "1.2", "--t-end", "6"]);
    let diag: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(diag["error"], "solver");
    assert_eq!(diag["kind"], "blow_up");
    assert!(out.stdout.is_empty());
}

#[test]
fn orbit_json_round_trips_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(write_orbit(dir.path())).unwrap();
    let rec = OrbitRecord::parse(&text).unwrap();
    assert_eq!(to_json(&rec), text);
    assert_eq!(rec.n, 5);
    assert_eq!(rec.half_period, 6.0);
    assert_eq!(rec.grid.t.len(), 512);
}

#[test]
fn constants_json_matches_the_library() {
    let out = run(&["constants", "--n", "6", "--json"]);
    let rec: ConstantsRecord = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rec, ConstantsRecord::from(&ModelConstants::new(6).unwrap()));
    assert_eq!(to_json(&rec).as_bytes(), out.stdout.as_slice());
}

#[test]
fn certify_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let orbit = write_orbit(dir.path());
    let report = dir.path().join("report.json");
    let out = run(&["certify", "--input", &orbit, "--report", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 6);
    let certs: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(certs.as_array().unwrap().len(), 6);
}

#[test]
fn echo_config_prints_the_validated_run() {
    let out = run(&["find-periodic", "--n", "5", "--T", "6", "--echo-config"]);
    assert_eq!(out.status.code(), Some(0));
    let cfg: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(cfg["command"], "find-periodic");
    assert_eq!(cfg["T"], 6.0);
    assert_eq!(cfg["seed_mode"], "linear");
    assert_eq!(cfg["grid"], 512);
    // validation still runs first
    assert_eq!(code(&["constants", "--n", "3", "--echo-config"]), 3);
}

#[test]
fn sweep_csv_has_one_row_per_half_period() {
    let out = run(&["sweep", "--n", "5", "--T-from", "3", "--T-to", "4", "--steps", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "T,a,b,amplitude,energy_level,residual,converged");
    assert_eq!(rows.len(), 6);
    assert!(rows[1..].iter().all(|r| r.ends_with(",1")));
}
