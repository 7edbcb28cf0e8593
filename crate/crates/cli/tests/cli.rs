use std::path::PathBuf;
use std::process::{Command, Output};

fn problem(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../problems").join(name)
}

fn fdr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdr")).args(args).output().unwrap()
}

fn with_problem(cmd: &str, name: &str, extra: &[&str]) -> Output {
    let path = problem(name);
    let mut args = vec![cmd, "--problem", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    fdr(&args)
}

fn json(out: &Output) -> serde_json::Value {
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn number(v: &serde_json::Value) -> f64 {
    v.to_string().trim_matches('"').parse().unwrap()
}

#[test]
fn solves_example1_at_one_half() {
    let v = json(&with_problem("solve", "example1.json", &[]));
    let r = &v["result"];
    assert!(number(&r["beta"]).abs() < 1e-6);
    assert!((number(&r["normalization"]) - 1.0).abs() < 1e-6);
}

#[test]
fn chi2_two_atom_masses() {
    let v = json(&with_problem("solve", "chi2_two_atom.json", &[]));
    let m: Vec<f64> = v["result"]["masses"].as_array().unwrap().iter().map(number).collect();
    assert!((m[0] - 0.625).abs() < 1e-12 && (m[1] - 0.375).abs() < 1e-12);
}

#[test]
fn constant_risk_keeps_the_reference() {
    let v = json(&with_problem("solve", "constant_risk.json", &[]));
    let m: Vec<f64> = v["result"]["masses"].as_array().unwrap().iter().map(number).collect();
    for (a, b) in m.iter().zip([0.2, 0.3, 0.5]) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn below_the_minimum_factor_exits_2() {
    let out = with_problem("solve", "example1.json", &["--lambda", "0.25"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda* = 0.5"));
}

#[test]
fn unbounded_chi2_reports_empty_interval() {
    let out = with_problem("solve", "chi2_unbounded.json", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));
}

#[test]
fn schema_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"divergence": "kl", "lambda": 1, "colour": "red"}"#).unwrap();
    let out = fdr(&["solve", "--problem", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(fdr(&["nonsense"]).status.code(), Some(1));
    assert_eq!(fdr(&["solve", "--problem", "/no/such/file.json"]).status.code(), Some(1));
}

#[test]
fn sweep_writes_csv() {
    let out = with_problem("sweep", "kl_sweep.json", &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "lambda,N_lambda,beta,min_rn,max_rn,feasible");
    assert_eq!(lines.len(), 13);
    assert!(lines[1].ends_with(",,,,,false"));
    assert!(lines[12].ends_with(",true"));
}

#[test]
fn classify_equiv_and_oracle_check() {
    let v = json(&with_problem("classify", "example1.json", &[]));
    assert_eq!(v["result"]["boundary"], "closed_left");
    assert!((number(&v["result"]["lambda_star"]) - 0.5).abs() < 1e-6);

    let v = json(&with_problem("equiv", "example4.json", &[]));
    assert!(number(&v["result"]["gap"]) < 1e-8);

    let v = json(&with_problem("oracle-check", "chi2_two_atom.json", &[]));
    assert_eq!(v["result"]["pass"], true);
}

#[test]
fn output_file_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = with_problem("classify", "example2.json", &["--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn examples_reproduce() {
    let out = fdr(&["examples"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("3/3 examples pass"));
}
