use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rosterlab"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn ok(args: &[&str]) -> String {
    let o = run(args);
    assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
}

/// Value of the `key value` line in command output.
fn field<'a>(out: &'a str, key: &str) -> &'a str {
    out.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(' ')))
        .unwrap_or_else(|| panic!("no `{key}` line in:\n{out}"))
}

fn error_json(o: &Output) -> serde_json::Value {
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    let line = err.lines().last().expect("an error line");
    serde_json::from_str(line).unwrap_or_else(|e| panic!("not JSON ({e}): {line}"))
}

fn tiny_instance(dir: &Path) -> String {
    let path = dir.join("tiny.json");
    let p = path.to_str().unwrap();
    ok(&["generate", "--employees", "4", "--days", "3", "--seed", "11", "--out", p]);
    p.to_string()
}

#[test]
fn roster_t2_with_one_reserve_costs_110() {
    let t2 = data("t2.json");
    let out = ok(&["roster", "--instance", t2.to_str().unwrap(), "--reserve", "1"]);
    assert_eq!(field(&out, "total"), "110");
    assert_eq!(field(&out, "status"), "optimal");
    assert_eq!(field(&out, "reserves"), "1");
}

#[test]
fn roster_then_reroster_with_everyone_absent() {
    let dir = tempfile::tempdir().unwrap();
    let t2 = data("t2.json");
    let roster = dir.path().join("roster.json");
    ok(&["roster", "--instance", t2.to_str().unwrap(), "--reserve", "1", "--out", roster.to_str().unwrap()]);
    let scenario = dir.path().join("scenario.json");
    std::fs::write(&scenario, r#"{"seed": 0, "employees": 2, "days": 1, "absent": [[0, 0], [1, 0]]}"#).unwrap();
    let repaired = dir.path().join("repaired.json");
    let out = ok(&[
        "reroster",
        "--instance",
        t2.to_str().unwrap(),
        "--roster",
        roster.to_str().unwrap(),
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        repaired.to_str().unwrap(),
    ]);
    assert_eq!(field(&out, "total"), "500");
    assert_eq!(field(&out, "change_cost"), "0");
    let file: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(repaired).unwrap()).unwrap();
    assert_eq!(file["total"], 500.0);
}

#[test]
fn generate_is_deterministic_per_seed() {
    let a = ok(&["generate", "--employees", "6", "--days", "7", "--mode", "hierarchical", "--seed", "3"]);
    let b = ok(&["generate", "--employees", "6", "--days", "7", "--mode", "hierarchical", "--seed", "3"]);
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["employees"].as_array().unwrap().len(), 6);
}

#[test]
fn sweep_half_step_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let inst = tiny_instance(dir.path());
    let out_dir = dir.path().join("sweep");
    let o = out_dir.to_str().unwrap();
    let args = [
        "sweep", "--instance", &inst, "--out", o, "--grid-step", "0.5", "--scenarios", "2", "--baseline", "1",
        "--rho", "0.2", "--seed", "4", "--no-timing",
    ];
    let out = ok(&args);
    assert_eq!(field(&out, "cells"), "9");
    assert_eq!(field(&out, "baselines"), "1");
    assert_eq!(field(&out, "tasks"), "20");
    let results = std::fs::read_to_string(out_dir.join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 1 + 10);

    // A second run resumes and changes nothing.
    ok(&args);
    assert_eq!(std::fs::read_to_string(out_dir.join("results.csv")).unwrap(), results);

    let out = ok(&["report", "--out", o, "--baseline", "1"]);
    assert_eq!(field(&out, "rows"), "9");
    let ratios = std::fs::read_to_string(out_dir.join("ratios_k1.csv")).unwrap();
    assert_eq!(ratios.lines().count(), 1 + 9);
    assert!(out_dir.join("contour_k1.json").exists());
}

#[test]
fn report_on_a_full_grid_has_121_rows() {
    let dir = tempfile::tempdir().unwrap();
    let inst = tiny_instance(dir.path());
    let out_dir = dir.path().join("sweep");
    let o = out_dir.to_str().unwrap();
    ok(&["sweep", "--instance", &inst, "--out", o, "--scenarios", "1", "--baseline", "1", "--rho", "0.3", "--seed", "2"]);
    let out = ok(&["report", "--out", o, "--baseline", "1"]);
    assert_eq!(field(&out, "rows"), "121");
    let ratios = std::fs::read_to_string(out_dir.join("ratios_k1.csv")).unwrap();
    assert_eq!(ratios.lines().count(), 1 + 121);
}

#[test]
fn single_cell_mode() {
    let dir = tempfile::tempdir().unwrap();
    let inst = tiny_instance(dir.path());
    let o = dir.path().join("cell");
    let out = ok(&[
        "sweep", "--instance", &inst, "--out", o.to_str().unwrap(), "--tpr", "0.7", "--rfpr", "0.1", "--scenarios", "2",
        "--baseline", "2", "--seed", "1",
    ]);
    assert_eq!(field(&out, "cells"), "1");
    assert_eq!(field(&out, "tasks"), "4");
}

#[test]
fn omitted_seed_is_printed_and_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let inst = tiny_instance(dir.path());
    let o = dir.path().join("s");
    let out = run(&[
        "sweep", "--instance", &inst, "--out", o.to_str().unwrap(), "--tpr", "1", "--rfpr", "0", "--scenarios", "1",
        "--baseline", "1",
    ]);
    assert!(out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    let seed: u64 = err
        .lines()
        .find_map(|l| l.strip_prefix("seed "))
        .expect("seed line")
        .parse()
        .unwrap();
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(o.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["seed"].as_u64(), Some(seed));
}

#[test]
fn failures_emit_a_json_error_line() {
    let missing = run(&["roster", "--instance", "/nonexistent/instance.json"]);
    assert_eq!(error_json(&missing)["error"]["kind"], "runtime");

    let bad_flag = run(&["roster", "--bogus"]);
    assert_eq!(bad_flag.status.code(), Some(2));
    assert_eq!(error_json(&bad_flag)["error"]["kind"], "arguments");

    let t2 = data("t2.json");
    let bad_step = run(&["sweep", "--instance", t2.to_str().unwrap(), "--out", "/tmp/unused", "--grid-step", "0"]);
    let v = error_json(&bad_step);
    assert!(v["error"]["message"].as_str().unwrap().contains("grid-step"));

    let wrong_len = run(&["roster", "--instance", t2.to_str().unwrap(), "--reserve-per-day", "1,1"]);
    error_json(&wrong_len);

    let dir = tempfile::tempdir().unwrap();
    let no_sweep = run(&["report", "--out", dir.path().to_str().unwrap()]);
    error_json(&no_sweep);
}
