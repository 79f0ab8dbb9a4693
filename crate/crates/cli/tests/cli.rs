use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const WORKED: &str = r#"{"s": 2, "n": [2, 2], "offset": "0",
  "terms": [{"I": [1, 2], "c": {"1": ["1", "-1"], "2": ["1", "-2"]}}]}"#;

fn facpoly(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_facpoly"))
        .args(args)
        .env_remove("FACPOLY_BUDGET")
        .output()
        .expect("binary runs")
}

fn file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn solve_worked_example() {
    let dir = TempDir::new().unwrap();
    let inst = file(&dir, "inst.json", WORKED);
    let out = facpoly(&["solve", "--in", p(&inst), "--json"]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    assert_eq!(report["result"]["value"], "2");
    assert_eq!(report["result"]["assignment"], serde_json::json!([[0, 1], [0, 1]]));
    assert_eq!(report["instance"]["s"], 2);
    assert_eq!(report["command"], "solve");

    let human = facpoly(&["solve", "--in", p(&inst)]);
    assert!(String::from_utf8_lossy(&human.stdout).starts_with("value: 2\n"));
}

#[test]
fn solve_writes_a_solution_document() {
    let dir = TempDir::new().unwrap();
    let inst = file(&dir, "inst.json", WORKED);
    let sol = dir.path().join("sol.json");
    assert!(facpoly(&["solve", "--in", p(&inst), "--out", p(&sol), "--order", "identity"]).status.success());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    assert_eq!(doc["value"], "2");
}

#[test]
fn brute_and_solve_agree() {
    let dir = TempDir::new().unwrap();
    for seed in 0..10 {
        let path = dir.path().join(format!("gen{seed}.json"));
        let seed = seed.to_string();
        assert!(facpoly(&["gen", "--seed", &seed, "--s", "3", "--nmax", "3", "--terms", "3", "--out", p(&path)])
            .status
            .success());
        let solved = stdout_json(&facpoly(&["solve", "--in", p(&path), "--json"]));
        let brute = stdout_json(&facpoly(&["brute", "--in", p(&path), "--json"]));
        assert_eq!(solved["result"]["value"], brute["result"]["value"]);
    }
}

#[test]
fn gen_is_deterministic() {
    let a = facpoly(&["gen", "--seed", "5"]);
    let b = facpoly(&["gen", "--seed", "5"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn validation_errors_name_the_term() {
    let dir = TempDir::new().unwrap();
    let bad = file(&dir, "bad.json", r#"{"s": 1, "n": [2], "terms": [{"I": [0], "c": {"0": [1, 2]}}]}"#);
    let out = facpoly(&["validate", "--in", p(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("term 1"));

    let good = file(&dir, "good.json", WORKED);
    let out = facpoly(&["validate", "--in", p(&good)]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok:"));

    let garbage = file(&dir, "garbage.json", "{ not json");
    assert_eq!(facpoly(&["solve", "--in", p(&garbage)]).status.code(), Some(1));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let inst = file(&dir, "inst.json", WORKED);
    assert_eq!(facpoly(&["solve", "--in", p(&inst), "--budget", "0"]).status.code(), Some(2));
    let env_budget = Command::new(env!("CARGO_BIN_EXE_facpoly"))
        .args(["solve", "--in", p(&inst)])
        .env("FACPOLY_BUDGET", "0")
        .output()
        .unwrap();
    assert_eq!(env_budget.status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(facpoly(&["solve", "--in", p(&missing)]).status.code(), Some(3));
    let unknown = facpoly(&["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("Usage"));
    assert_eq!(facpoly(&["--help"]).status.code(), Some(0));
}

#[test]
fn reduce_explicit_then_solve() {
    let dir = TempDir::new().unwrap();
    let e = file(&dir, "e.json", r#"{"nodes": 3, "nodeCost": [1, 1, 1], "edges": [{"set": [1, 2], "cost": -2}, {"set": [2, 3], "cost": -2}, {"set": [1, 3], "cost": -2}]}"#);
    let f = dir.path().join("f.json");
    assert!(facpoly(&["reduce", "--from", "explicit", "--to", "factorized", "--in", p(&e), "--out", p(&f)])
        .status
        .success());
    let solved = stdout_json(&facpoly(&["solve", "--in", p(&f), "--json"]));
    assert_eq!(solved["result"]["value"], "1");
}

#[test]
fn reduce_other_sources() {
    let dir = TempDir::new().unwrap();
    let affine = file(&dir, "a.json", r#"{"s": 2, "n": [1, 1], "terms": [{"I": [1, 2], "c": {"1": [1], "2": [1]}, "d": {"1": 1, "2": 1}}]}"#);
    let out = facpoly(&["reduce", "--from", "affine", "--in", p(&affine)]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["terms"].as_array().unwrap().len(), 3);

    let quad = file(&dir, "q.json", r#"{"s": 2, "n": [2, 2], "Q": [{"i": 1, "j": 2, "matrix": {"rows": 2, "cols": 2, "entries": [[1, 2], [2, 4]]}}]}"#);
    let out = facpoly(&["reduce", "--from", "quadratic", "--in", p(&quad)]);
    assert_eq!(stdout_json(&out)["terms"].as_array().unwrap().len(), 1);

    let tensor = file(&dir, "t.json", r#"{"dims": [2, 2], "factors": [[[1, 1], [1, 1]]]}"#);
    let reduced = dir.path().join("tf.json");
    assert!(facpoly(&["reduce", "--from", "tensor", "--in", p(&tensor), "--out", p(&reduced)]).status.success());
    let solved = stdout_json(&facpoly(&["solve", "--in", p(&reduced), "--json"]));
    assert_eq!(solved["result"]["value"], "4");
}

#[test]
fn tensor_and_matrix_front_ends() {
    let dir = TempDir::new().unwrap();
    let dense = file(&dir, "id.json", r#"{"dims": [2, 2], "entries": [1, 0, 0, 1]}"#);
    let one = stdout_json(&facpoly(&["btf", "--in", p(&dense), "--t", "1", "--json"]));
    assert_eq!(one["result"]["error"], "1");
    let two = stdout_json(&facpoly(&["btf", "--in", p(&dense), "--t", "2", "--json"]));
    assert_eq!(two["result"]["error"], "0");

    let m = file(&dir, "m.json", r#"{"rows": 2, "cols": 2, "entries": [[1, 0], [0, 1]]}"#);
    let bmf = stdout_json(&facpoly(&["bmf", "--in", p(&m), "--json"]));
    assert_eq!(bmf["result"]["error"], "1");
    let human = facpoly(&["bmf", "--in", p(&m)]);
    assert!(String::from_utf8_lossy(&human.stdout).starts_with("error: 1\n"));
}

#[test]
fn cells_of_two_points_on_a_line() {
    let dir = TempDir::new().unwrap();
    let arr = file(
        &dir,
        "arr.json",
        r#"{"dim": 1, "functionals": [{"linear": [1], "constant": 0}, {"linear": [1], "constant": "-1"}]}"#,
    );
    let out = stdout_json(&facpoly(&["cells", "--in", p(&arr), "--json"]));
    let signs: Vec<&str> = out["result"]["cells"].as_array().unwrap().iter().map(|c| c["signs"].as_str().unwrap()).collect();
    assert_eq!(signs, vec!["--", "+-", "++"]);
    assert_eq!(facpoly(&["cells", "--in", p(&arr), "--limit", "2"]).status.code(), Some(2));
}
