use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

use crproj::surface_io::{parse_surface, save_surface};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crproj")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = args.to_vec();
    full.push("--json");
    let out = run(&full);
    let value = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("invalid JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)));
    (code(&out), value)
}

fn complex(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("crproj-{}-{name}", std::process::id()))
}

#[test]
fn quadric_invariants() {
    let (status, v) = json(&["invariants", "--quadric", "--m", "2"]);
    assert_eq!(status, 0);
    assert_eq!(v["h"]["2,2"].as_f64(), Some(-1.0));
    assert_eq!(v["h"]["3,3"].as_f64(), Some(-1.0));
    assert_eq!(v["h"]["1,4"].as_f64(), Some(1.0));
    assert_eq!(complex(&v["P"][0][0]), (0.0, 0.0));
    assert_eq!(complex(&v["L"][0][0]), (0.0, -1.0));
}

#[test]
fn saddle_is_degenerate() {
    let (status, v) = json(&["invariants", "--expr", "x1*y1", "--m", "2"]);
    assert_eq!(status, 0);
    assert_eq!(complex(&v["P"][0][0]), (1.0, 0.0));
    assert_eq!(complex(&v["L"][0][0]), (0.0, 0.0));
    let (status, v) = json(&["convexity", "--expr", "x1*y1", "--m", "2"]);
    assert_eq!(status, 0);
    assert_eq!(v["classification"], "degenerate");
}

#[test]
fn dual_of_saddle_is_a_domain_error() {
    let out = run(&["dual", "--expr", "x1*y1", "--m", "2"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("linearly convex"));
    let (status, v) = json(&["dual", "--expr", "x1*y1", "--m", "2"]);
    assert_eq!(status, 1);
    assert_eq!(v["exit_code"].as_i64(), Some(1));
}

#[test]
fn quadric_convexity_and_selfduality() {
    let (status, v) = json(&["convexity", "--quadric", "--m", "2"]);
    assert_eq!(status, 0);
    assert_eq!(v["sclc"], true);
    assert!(v["classification"].as_str().unwrap().starts_with("definite"));

    let (status, v) = json(&["selfdual", "--quadric", "--m", "3"]);
    assert_eq!(status, 0);
    assert_eq!(v["order2"]["match"], "match");
    assert!(v["order2"]["residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn verify_passes_on_quadric_and_random_germ() {
    for args in
        [vec!["verify", "--quadric", "--m", "2"], vec!["verify", "--random", "--m", "2", "--order", "5", "--seed", "1"]]
    {
        let out = run(&args);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.lines().all(|l| l.starts_with("PASS")));
    }
}

#[test]
fn injected_fault_is_named() {
    let out = run(&["verify", "--quadric", "--m", "2", "--inject-fault", "3,2,1e-3"]);
    assert_eq!(code(&out), 3);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().any(|l| l.starts_with("FAIL") && l.contains("Maurer-Cartan")));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&run(&["invariants", "--file", "missing.json", "--order", "1"])), 2);
    assert_eq!(code(&run(&["invariants", "--expr", "x1*", "--m", "2"])), 2);
    assert_eq!(code(&run(&["invariants", "--m", "2"])), 2);
    assert_eq!(code(&run(&["invariants", "--expr", "x1*y1"])), 2);
    assert_eq!(code(&run(&["invariants", "--expr", "z9", "--m", "2"])), 2);
}

#[test]
fn file_round_trip_matches_expression() {
    let expr = "-x1^2 - y1^2 + 0.25*x1*y1*xm - 0.5*xm^3";
    let path = temp_path("round-trip.json");
    save_surface(&parse_surface(expr, 2, 6).unwrap(), &path).unwrap();
    let from_file = run(&["invariants", "--file", path.to_str().unwrap()]);
    let from_expr = run(&["invariants", "--expr", expr, "--m", "2"]);
    std::fs::remove_file(&path).ok();
    assert_eq!(code(&from_file), 0);
    assert_eq!(from_file.stdout, from_expr.stdout);
}

#[test]
fn reports_are_deterministic() {
    let args = ["selfdual", "--random", "--m", "2", "--order", "5", "--seed", "4"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(code(&a), code(&b));
}
