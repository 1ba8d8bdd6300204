use std::process::{Command, Output};

use serde_json::Value;

const AW_ANCHOR: &[&str] = &["--family", "aw", "-a", "2", "-b", "3", "-c", "4", "-d", "5", "-q", "0.5", "-N", "1"];
const RACAH_N3: &[&str] = &[
    "--family", "racah", "--alpha", "0.7", "--beta", "1.3", "--gamma", "0.6+0.2i", "--delta", "1.1", "-q", "0.5", "-N",
    "3",
];

fn qz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qz")).args(args).env_remove("QZ_TOL_SCALE").output().expect("run qz")
}

fn with(cmd: &str, base: &[&str], extra: &[&str]) -> Vec<String> {
    std::iter::once(cmd).chain(base.iter().copied()).chain(extra.iter().copied()).map(String::from).collect()
}

fn run(cmd: &str, base: &[&str], extra: &[&str]) -> Output {
    let args = with(cmd, base, extra);
    qz(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn re(v: &Value) -> f64 {
    v["re"].as_f64().unwrap()
}

#[test]
fn verify_anchor_passes_with_exact_field_set() {
    let out = run("verify", AW_ANCHOR, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out);
    let mut keys: Vec<&str> = doc.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(keys, ["N", "checks", "elapsed_ms", "family", "params", "pass", "seed"]);
    assert_eq!(doc["pass"], Value::Bool(true));
    assert_eq!(doc["elapsed_ms"], 0);
    assert_eq!(doc["seed"], 0);
    assert_eq!(doc["params"]["a"]["re"], 2.0);
    let entry = doc["checks"].as_array().unwrap().iter().find(|c| c["name"] == "matrix-M-entry").unwrap();
    assert_eq!(entry["pass"], Value::Bool(true));
    for c in doc["checks"].as_array().unwrap() {
        let mut k: Vec<&str> = c.as_object().unwrap().keys().map(String::as_str).collect();
        k.sort_unstable();
        assert_eq!(k, ["name", "pass", "refs", "residual", "tolerance"]);
    }
}

#[test]
fn matrix_anchor_entry() {
    let out = run("matrix", AW_ANCHOR, &[]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert!((re(&doc["entries"][0][0]) + 119.0).abs() < 1e-10);
}

#[test]
fn zeros_anchor_and_degree_zero() {
    let out = run("zeros", AW_ANCHOR, &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!((re(&json(&out)["xbar"][0]) - 10.0 / 17.0).abs() < 1e-12);

    let mut args = with("zeros", AW_ANCHOR, &[]);
    *args.last_mut().unwrap() = "0".into();
    let out = qz(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn racah_spectrum_matches_closed_form() {
    let out = run("spectrum", RACAH_N3, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out);
    assert_eq!(doc["pass"], Value::Bool(true));
    // q^{-3}(1 - q^n)(1 - alpha beta q^{7-n}) with alpha beta = 0.91, q = 1/2
    let expected: Vec<f64> =
        (1..=3).map(|n| 8.0 * (1.0 - 0.5f64.powi(n)) * (1.0 - 0.91 * 0.5f64.powi(7 - n))).collect();
    for (i, e) in expected.iter().enumerate() {
        assert!((re(&doc["predicted"][i]) - e).abs() < 1e-12);
        assert!((re(&doc["computed"][i]) - e).abs() < 1e-8);
    }
}

#[test]
fn degenerate_series_reports_predicted_and_exits_3() {
    let out = qz(&[
        "spectrum", "--family", "racah", "--alpha", "3", "--beta", "2", "--gamma", "4", "--delta", "5", "-q", "0.5",
        "-N", "2",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let doc = json(&out);
    assert!((re(&doc["predicted"][0]) - 1.25).abs() < 1e-14);
    assert!((re(&doc["predicted"][1]) - 0.75).abs() < 1e-14);
    assert_eq!(doc["computed"], Value::Null);
}

#[test]
fn usage_errors_exit_4() {
    assert_eq!(qz(&["zeros", "--family", "jacobi", "-q", "0.5", "-N", "1"]).status.code(), Some(4));
    assert_eq!(qz(&["zeros", "--family", "aw", "-a", "2", "-q", "0.5", "-N", "1"]).status.code(), Some(4));
    assert_eq!(qz(&["frobnicate"]).status.code(), Some(4));
    assert_eq!(run("verify", AW_ANCHOR, &["--tol", "nonsense=1"]).status.code(), Some(4));
    assert_eq!(run("verify", AW_ANCHOR, &["--bogus"]).status.code(), Some(4));
}

#[test]
fn failing_check_exits_2() {
    let out = run("verify", AW_ANCHOR, &["--tol", "anchor=1e-30"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["pass"], Value::Bool(false));
}

#[test]
fn tolerance_scale_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_qz"))
        .args(with("verify", AW_ANCHOR, &[]))
        .env("QZ_TOL_SCALE", "1e-30")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let doc = json(&out);
    let c = doc["checks"].as_array().unwrap().iter().find(|c| c["name"] == "zero-equations-M").unwrap();
    assert!((c["tolerance"].as_f64().unwrap() - 1e-38).abs() < 1e-50);

    let bad = Command::new(env!("CARGO_BIN_EXE_qz"))
        .args(with("verify", AW_ANCHOR, &[]))
        .env("QZ_TOL_SCALE", "lots")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(4));
}

#[test]
fn identical_runs_are_byte_identical() {
    let a = run("verify", RACAH_N3, &["--seed", "7"]);
    let b = run("verify", RACAH_N3, &["--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn timing_is_opt_in() {
    let out = run("verify", RACAH_N3, &["--timing"]);
    assert!(json(&out)["elapsed_ms"].is_u64());
}

#[test]
fn csv_report_has_one_row_per_check() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let out = run("verify", AW_ANCHOR, &["--format", "csv", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("name,residual,tolerance,pass,refs"));
    let json_checks = json(&run("verify", AW_ANCHOR, &[]))["checks"].as_array().unwrap().len();
    assert_eq!(lines.count(), json_checks);
}

#[test]
fn flow_csv_trajectory() {
    let out = run("flow", RACAH_N3, &["--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,t,re_1,im_1,re_2,im_2,re_3,im_3"));
    let rows: Vec<&str> = lines.collect();
    assert!(rows.len() > 2);
    assert!(rows[0].starts_with("0,0e0,"));
}

#[test]
fn flow_json_ends_at_requested_time() {
    let out = run("flow", AW_ANCHOR, &["--t-end", "0.001"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let traj = doc["trajectory"].as_array().unwrap();
    assert_eq!(traj.last().unwrap()["t"].as_f64().unwrap(), 0.001);
    assert_eq!(doc["stopped"], Value::Null);
}

#[test]
fn sweep_reports_every_set() {
    let out = qz(&["sweep", "--family", "aw", "-q", "0.6", "-N", "3", "--count", "4", "--seed", "11"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let doc = json(&out);
    assert_eq!(doc["params"].as_array().unwrap().len(), 4);
    let names: Vec<&str> = doc["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    for i in 1..=4 {
        assert!(names.iter().any(|n| n.starts_with(&format!("set{i}/"))));
    }
}
