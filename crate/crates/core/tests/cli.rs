use std::fs;
use std::path::{Path, PathBuf};

use cma_core::cli::dispatch;
use serde_json::Value;
use tempfile::TempDir;

const GAUSSIAN: &str = r#"{"factors": [["1", "0", "1"]], "order_basis": [["1", "0"], ["0", "1"]]}"#;
const CUBIC: &str =
    r#"{"factors": [["-1", "1", "0", "1"]], "order_basis": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]}"#;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> cma_core::cli::Outcome {
    dispatch(std::iter::once("cma").chain(args.iter().copied()))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gaussian_ample_with_five() {
    let dir = TempDir::new().unwrap();
    let alg = write(dir.path(), "gaussian.json", GAUSSIAN);
    let out = run(&["check-ample", "--algebra", s(&alg), "--ambient", "SL", "--places", "inf,5", "--json"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "S-ample");
}

#[test]
fn gaussian_not_ample_at_infinity() {
    let dir = TempDir::new().unwrap();
    let alg = write(dir.path(), "gaussian.json", GAUSSIAN);
    let out = run(&["check-ample", "--algebra", s(&alg), "--ambient", "SL", "--places", "inf"]);
    assert_eq!(out.code, 2);
    assert_eq!(out.stdout.trim(), "not-S-ample");
}

#[test]
fn cubic_local_rank_at_infinity() {
    let dir = TempDir::new().unwrap();
    let alg = write(dir.path(), "cubic.json", CUBIC);
    let out = run(&["local-rank", "--algebra", s(&alg), "--place", "inf"]);
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout.trim(), "1");
}

#[test]
fn units_search_and_verify_round_trip() {
    let dir = TempDir::new().unwrap();
    let alg = write(dir.path(), "gaussian.json", GAUSSIAN);
    let out = run(&["units", "--algebra", s(&alg), "--search-bound", "3", "--s-primes", "5", "--json"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["certificate"]["certified"], true);
    let sys = write(dir.path(), "units.json", &v["system"].to_string());
    let again = run(&["units", "--algebra", s(&alg), "--verify", s(&sys), "--s-primes", "5", "--norm-one"]);
    assert_eq!(again.code, 0, "{}", again.stderr);
    assert!(again.stdout.contains("certified: true"));
}

#[test]
fn rejected_unit_system_exits_one() {
    let dir = TempDir::new().unwrap();
    let alg = write(dir.path(), "gaussian.json", GAUSSIAN);
    let sys = write(
        dir.path(),
        "bad.json",
        r#"{"torsion": {"element": ["0", "1"], "order": 4}, "free": [["2", "1"]], "s_primes": []}"#,
    );
    let out = run(&["units", "--algebra", s(&alg), "--verify", s(&sys)]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("certified: false"));
}

#[test]
fn construct_gaussian_request() {
    let dir = TempDir::new().unwrap();
    let req = write(
        dir.path(),
        "req.json",
        &format!(
            r#"{{"schema": "cma/1", "algebra": {GAUSSIAN}, "ambient": "SL", "places": ["inf", "5"],
               "unit_source": {{"search": {{"bound": 3}}}}}}"#
        ),
    );
    let out = run(&["construct", s(&req), "--json"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["generators"]["ring"], "Z[1/5]");
    assert_eq!(v["generators"]["torsion"][0], serde_json::json!([["0", "-1"], ["1", "0"]]));
    assert_eq!(v["generators"]["torus"][0], serde_json::json!([["4/5", "-3/5"], ["3/5", "4/5"]]));
}

#[test]
fn verify_paper_passes() {
    let out = run(&["verify-paper"]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    assert_eq!(out.stdout.lines().filter(|l| l.starts_with("PASS")).count(), 4);
}

/// Each input leads to one exit code and one JSON error object.
#[test]
fn error_taxonomy() {
    let dir = TempDir::new().unwrap();
    let cases: Vec<(&str, Vec<String>, &str, &str)> = vec![
        ("notmonic", vec!["local-rank".into(), "--place".into(), "inf".into()], r#"{"factors": [["1", "0", "2"]], "order_basis": [["1", "0"], ["0", "1"]]}"#, "NotMonic"),
        ("reducible", vec!["local-rank".into(), "--place".into(), "inf".into()], r#"{"factors": [["-1", "0", "1"]], "order_basis": [["1", "0"], ["0", "1"]]}"#, "NotIrreducible"),
        ("singular", vec!["local-rank".into(), "--place".into(), "inf".into()], r#"{"factors": [["1", "0", "1"]], "order_basis": [["1", "0"], ["2", "0"]]}"#, "SingularBasis"),
        ("ramified", vec!["local-rank".into(), "--place".into(), "2".into()], GAUSSIAN, "RamifiedPlace"),
        ("composite", vec!["local-rank".into(), "--place".into(), "15".into()], GAUSSIAN, "CompositeModulus"),
        ("noinf", vec!["check-ample".into(), "--places".into(), "5".into()], GAUSSIAN, "InvalidPlaceSet"),
        ("malformed", vec!["local-rank".into(), "--place".into(), "inf".into()], r#"{"factors": [["1", "x", "1"]], "order_basis": [["1", "0"], ["0", "1"]]}"#, "Json"),
        ("budget", vec!["units".into(), "--search-bound".into(), "400".into()], CUBIC, "BudgetExceeded"),
    ];
    for (name, args, algebra, kind) in cases {
        let alg = write(dir.path(), &format!("{name}.json"), algebra);
        let mut argv = vec!["cma".to_string(), "--json".into()];
        argv.extend(args);
        argv.extend(["--algebra".into(), s(&alg).into()]);
        let out = dispatch(argv);
        assert_eq!(out.code, 1, "{name}: {}", out.stdout);
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        let obj = v["error"].as_object().unwrap_or_else(|| panic!("{name}: {}", out.stdout));
        assert_eq!(obj["kind"], kind, "{name}");
        assert!(obj["module"].is_string());
        if kind == "Json" {
            assert_eq!(obj["path"], "factors[0][1]");
        }
    }
}

#[test]
fn missing_file_and_bad_flags() {
    let out = run(&["construct", "/nonexistent/req.json", "--json"]);
    assert_eq!(out.code, 1);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["error"]["kind"], "Io");
    let out = run(&["check-ample", "--bogus"]);
    assert_eq!(out.code, 1);
    assert!(!out.stderr.is_empty());
}
