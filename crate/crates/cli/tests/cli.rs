use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use riemann_entropy::stats::cdf;
use riemann_entropy::{minimize, MinimizeOptions, PiecewiseProblem, SelfSimilarProfile};
use riemann_entropy_cli::output::read_sample_csv;
use serde_json::Value;
use tempfile::TempDir;

const SHOCK: &str = r#"{"u":[0,0.5,1],"v":[1,-1],"a":[0,0]}"#;
const LINEAR: &str = r#"{"u":[0,1],"v":[0],"a":[1]}"#;
const MIXED: &str = r#"{"u":[0,0.3,0.7,1.2,1.5],"v":[1.5,-0.5,0.8,-1.0],"a":[0.0,0.6,0.0,0.9]}"#;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riemann-entropy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn problem_file(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn solve_merges_the_shock() {
    let dir = TempDir::new().unwrap();
    let p = problem_file(dir.path(), "shock.json", SHOCK);
    let out = bin(&["solve", "--problem", &p]);
    assert_eq!(out.status.code(), Some(0));
    let json: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["xi"], serde_json::json!([0.0, 0.0]));
    assert_eq!(json["E"], 0.5);
    assert_eq!(json["kkt_report"]["optimal"], true);
}

#[test]
fn verify_reports_the_oleinik_margin() {
    let dir = TempDir::new().unwrap();
    let p = problem_file(dir.path(), "shock.json", SHOCK);
    let out = bin(&["verify", "--problem", &p]);
    assert_eq!(out.status.code(), Some(0));
    let json: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["min_inequality_margin"], 0.5);
    assert_eq!(json["passed"], true);
}

#[test]
fn sample_of_linear_case_is_the_normal_cdf() {
    let dir = TempDir::new().unwrap();
    let p = problem_file(dir.path(), "linear.json", LINEAR);
    let out = bin(&[
        "sample",
        "--problem",
        &p,
        "--window",
        "-4",
        "4",
        "--count",
        "81",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = read_sample_csv(&stdout(&out)).unwrap();
    assert_eq!(rows.len(), 81);
    for r in rows {
        assert!((r.u - cdf(r.xi)).abs() < 1e-15);
    }
}

#[test]
fn sample_round_trips_exactly() {
    let dir = TempDir::new().unwrap();
    let p = problem_file(dir.path(), "mixed.json", MIXED);
    let csv_path = dir.path().join("profile.csv");
    let out = bin(&[
        "sample",
        "--problem",
        &p,
        "--count",
        "301",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = read_sample_csv(&fs::read_to_string(&csv_path).unwrap()).unwrap();

    let problem = PiecewiseProblem::from_json(MIXED)
        .unwrap()
        .validate()
        .unwrap();
    let m = minimize(&problem, &MinimizeOptions::default()).unwrap();
    let profile = SelfSimilarProfile::build(&problem, &m.xi).unwrap();
    let jumps = rows.iter().filter(|r| r.side.as_str() != "point").count();
    assert!(jumps >= 2);
    for r in rows.iter().filter(|r| r.side.as_str() == "point") {
        assert_eq!(r.u.to_bits(), profile.eval(r.xi).to_bits());
    }
}

#[test]
fn sample_in_physical_variables() {
    let dir = TempDir::new().unwrap();
    let p = problem_file(dir.path(), "linear.json", LINEAR);
    let out = bin(&[
        "sample",
        "--problem",
        &p,
        "--window",
        "-2",
        "2",
        "--count",
        "5",
        "--time",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("x,u,side"));
    let rows = read_sample_csv(&text).unwrap();
    // x = 2 at t = 4 is ξ = 0.5
    assert_eq!(rows[4].u, cdf(0.5));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(
        bin(&["solve", "--problem", missing.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );

    let bad = problem_file(dir.path(), "bad.json", r#"{"u":[0,1],"v":["x"],"a":[0]}"#);
    let out = bin(&["solve", "--problem", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("v[0]"));

    let unordered = problem_file(
        dir.path(),
        "unordered.json",
        r#"{"u":[1,0],"v":[0],"a":[0]}"#,
    );
    assert_eq!(
        bin(&["solve", "--problem", &unordered]).status.code(),
        Some(1)
    );

    let shock = problem_file(dir.path(), "shock.json", SHOCK);
    assert_eq!(
        bin(&["frobnicate", "--problem", &shock]).status.code(),
        Some(1)
    );
    assert_eq!(
        bin(&["verify", "--problem", &shock, "--verify-tol=-1"])
            .status
            .code(),
        Some(2)
    );

    let mixed = problem_file(dir.path(), "mixed.json", MIXED);
    assert_eq!(
        bin(&["solve", "--problem", &mixed, "--max-iter", "1"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        bin(&["oracle", "--problem", &mixed, "--cfl", "1.5"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn all_writes_every_artifact_deterministically() {
    let dir = TempDir::new().unwrap();
    let p = problem_file(dir.path(), "mixed.json", MIXED);
    let runs: Vec<_> = ["a", "b"]
        .iter()
        .map(|name| {
            let out_dir = dir.path().join(name);
            let out = bin(&[
                "all",
                "--problem",
                &p,
                "--h",
                "0.02",
                "--out",
                out_dir.to_str().unwrap(),
            ]);
            assert_eq!(
                out.status.code(),
                Some(0),
                "{}",
                String::from_utf8_lossy(&out.stderr)
            );
            out_dir
        })
        .collect();
    for file in [
        "solve.json",
        "verify.json",
        "profile.csv",
        "fd.csv",
        "compare.json",
        "summary.txt",
    ] {
        let first = fs::read(runs[0].join(file)).unwrap();
        let second = fs::read(runs[1].join(file)).unwrap();
        assert!(!first.is_empty());
        assert_eq!(first, second, "{file} differs between runs");
    }
    let compare: Value =
        serde_json::from_str(&fs::read_to_string(runs[0].join("compare.json")).unwrap()).unwrap();
    assert!(compare["l1_error"].as_f64().unwrap() < 0.05);
    let summary = fs::read_to_string(runs[0].join("summary.txt")).unwrap();
    assert!(summary.contains("verification: passed"));

    let solve_a = bin(&["solve", "--problem", &p]);
    let solve_b = bin(&["solve", "--problem", &p]);
    assert_eq!(solve_a.stdout, solve_b.stdout);
}
