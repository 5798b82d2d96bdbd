use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn sforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sforge")).args(args).output().expect("binary runs")
}

fn run_file(dir: &Path, name: &str, text: &str, extra: &[&str]) -> (i32, Value) {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    let mut args = vec!["run", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = sforge(&args);
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), report)
}

const RECOVERY: &str = r#"{"schema": 1, "seed": 3, "steps": [
  {"op": "bounds.example23", "params": {"n": 16, "k": 4, "s": 3, "t": 2, "base": {"n": 16, "sets": [[1,2],[3,4]]}}, "save": {"family": "F", "base": "B"}},
  {"op": "pipeline.cover", "params": {"family": "$F", "domain": "binomial:16:4", "s": 3, "t": 2, "r": 4, "alpha": "3/2"}, "save": {"family": "T", "residue": "R"}},
  {"op": "family.assert_subfamily", "params": {"family": "$T", "of": "$B"}},
  {"op": "family.assert_subfamily", "params": {"family": "$B", "of": "$T"}},
  {"op": "family.info", "params": {"family": "$R"}}
]}"#;

#[test]
fn planted_construction_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (code, report) = run_file(dir.path(), "recovery.json", RECOVERY, &[]);
    assert_eq!(code, 0, "{report}");
    assert_eq!(report["status"], "ok");
    let steps = report["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 5);
    assert_eq!(steps[0]["result"]["size"], 2 * 66);
    assert_eq!(steps[4]["result"]["size"], 0);
}

#[test]
fn sunflower_in_simplify_input_fails_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"schema": 1, "steps": [
      {"op": "pipeline.simplify", "params": {"family": {"n": 7, "sets": [[1,2,3],[1,4,5],[1,6,7]]}, "domain": "binomial:7:3", "s": 3, "t": 2}},
      {"op": "family.info", "params": {"family": {"n": 3, "sets": [[1]]}}}
    ]}"#;
    let (code, report) = run_file(dir.path(), "planted.json", text, &[]);
    assert_eq!(code, 1);
    let steps = report["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 1, "execution stops at the failing step");
    let err = &steps[0]["error"];
    assert_eq!(err["kind"], "sunflower_present");
    assert_eq!(err["witness"]["core"], serde_json::json!([1]));
    assert_eq!(err["witness"]["petals"].as_array().unwrap().len(), 3);
}

#[test]
fn empty_scenario_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let (code, report) = run_file(dir.path(), "empty.json", r#"{"schema": 1}"#, &[]);
    assert_eq!(code, 0);
    assert_eq!(report["steps"], serde_json::json!([]));
}

#[test]
fn exit_codes_by_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_file(dir.path(), "bad.json", "{not json", &[]).0, 2);
    assert_eq!(run_file(dir.path(), "schema.json", r#"{"schema": 9}"#, &[]).0, 2);
    let unknown = r#"{"schema": 1, "steps": [{"op": "family.nope"}]}"#;
    assert_eq!(run_file(dir.path(), "unknown.json", unknown, &[]).0, 2);
    let big = r#"{"schema": 1, "steps": [{"op": "sunflower.phi", "params": {"s": 3, "t": 4, "support": 60}}]}"#;
    assert_eq!(run_file(dir.path(), "big.json", big, &[]).0, 3);
    let not_sub = r#"{"schema": 1, "steps": [{"op": "family.assert_subfamily",
        "params": {"family": {"n": 3, "sets": [[1],[2]]}, "of": {"n": 3, "sets": [[1]]}}}]}"#;
    assert_eq!(run_file(dir.path(), "sub.json", not_sub, &[]).0, 1);
}

fn digest(path: &Path) -> Vec<u8> {
    Sha256::digest(fs::read(path).unwrap()).to_vec()
}

#[test]
fn reports_are_reproducible_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"schema": 1, "steps": [
      {"op": "spread.lemma_mc", "params": {"family": {"n": 6, "sets": [[1],[2],[3],[4],[5],[6]]}, "R": 6, "m": 1, "delta": "1/4", "trials": 20000}},
      {"op": "spread.representatives", "params": {"families": [{"n": 6, "sets": [[1],[2]]}, {"n": 6, "sets": [[1],[3]]}]}},
      {"op": "sunflower.max_free", "params": {"domain": "binomial:7:3", "s": 3, "core": "exact:1"}}
    ]}"#;
    let path = dir.path().join("s.json");
    fs::write(&path, text).unwrap();
    let mut hashes = Vec::new();
    for threads in ["1", "4", "8", "1"] {
        let out = dir.path().join(format!("r{}.json", hashes.len()));
        let status = sforge(&["run", path.to_str().unwrap(), "--seed", "5", "--threads", threads, "--out", out.to_str().unwrap()]);
        assert!(status.status.success());
        hashes.push(digest(&out));
    }
    assert!(hashes.windows(2).all(|w| w[0] == w[1]));
    let other = dir.path().join("other.json");
    sforge(&["run", path.to_str().unwrap(), "--seed", "6", "--out", other.to_str().unwrap()]);
    assert_ne!(digest(&other), hashes[0]);
}

#[test]
fn appending_a_step_leaves_earlier_streams_alone() {
    let dir = tempfile::tempdir().unwrap();
    let mc = r#"{"op": "spread.lemma_mc", "params": {"family": {"n": 8, "sets": [[1],[2],[3],[4],[5],[6],[7],[8]]}, "R": 8, "m": 1, "delta": "1/8", "trials": 5000}}"#;
    let one = format!(r#"{{"schema": 1, "seed": 11, "steps": [{mc}]}}"#);
    let two = format!(r#"{{"schema": 1, "seed": 11, "steps": [{mc}, {mc}]}}"#);
    let (_, a) = run_file(dir.path(), "one.json", &one, &[]);
    let (_, b) = run_file(dir.path(), "two.json", &two, &[]);
    assert_eq!(a["steps"][0], b["steps"][0]);
    assert_ne!(b["steps"][0]["result"]["seed"], b["steps"][1]["result"]["seed"]);
}

#[test]
fn csv_output_and_thread_variable() {
    let out = Command::new(env!("CARGO_BIN_EXE_sforge"))
        .args(["verify", "--domain", "binomial:6:2", "--s", "3", "--t", "2", "--format", "csv"])
        .env("SFORGE_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() > 1);
    assert!(text.starts_with("domain,s,t,"));
    assert!(text.contains("thm1.2.large"));
}
