use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hurwitz")).args(args).env_remove("HURWITZ_TOL").output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn pair(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn cover_build_reports_two_sheet_closed_form() {
    let cfg = config("two_sheet.json");
    let out = run(&["cover", "build", "--config", cfg.to_str().unwrap(), "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let res = &r["results"];
    let close = |v: &Value, want: (f64, f64)| {
        let (a, b) = pair(v);
        (a - want.0).abs() < 1e-12 && (b - want.1).abs() < 1e-12
    };
    assert!(close(&res["lambdas"][0], (0.0, 0.0)) && close(&res["lambdas"][1], (4.0, 0.0)));
    assert!(close(&res["gammas"][0], (1.0, 0.0)) && close(&res["gammas"][1], (3.0, 0.0)));
    assert!(close(&res["alphas"][0], (-0.5, 0.0)) && close(&res["alphas"][1], (0.5, 0.0)));
    assert_eq!(r["passed"], Value::Bool(true));
    assert!(r.get("timestamp").is_none());
    assert_eq!(r["inputs"]["covering"]["poles"][0][0].as_f64(), Some(2.0));
}

#[test]
fn identical_configs_give_identical_reports() {
    let cfg = config("rank1.json");
    let args = ["rank1", "tau", "--config", cfg.to_str().unwrap(), "--no-timestamp"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let stamped = run(&args[..4]);
    assert!(report(&stamped)["timestamp"].is_u64());
}

#[test]
fn malformed_json_exits_two_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\"covering\": {\"poles\": [[2, 0]],\n \"residues\": [[1, 0]]").unwrap();
    let out = run(&["cover", "build", "--config", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("ConfigParse") && err.contains("line 2"), "{err}");

    std::fs::write(&p, "{\"covering\": {\"poles\": [[2, 0]], \"residue\": [[1, 0]]}}").unwrap();
    let out = run(&["cover", "build", "--config", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("column"));
}

#[test]
fn numerical_errors_exit_one_with_their_name() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("coincident.json");
    std::fs::write(&p, r#"{"covering": {"poles": [[1, 0], [1, 0]], "residues": [[1, 0], [2, 0]]}}"#).unwrap();
    let out = run(&["cover", "build", "--config", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("InvalidCovering"));
}

#[test]
fn residual_tolerance_override_decides_the_exit_code() {
    let cfg = config("rank1.json");
    let c = cfg.to_str().unwrap();
    let strict = Command::new(env!("CARGO_BIN_EXE_hurwitz"))
        .args(["rank1", "residual", "--config", c])
        .env("HURWITZ_TOL", "1e-30")
        .output()
        .unwrap();
    assert_eq!(strict.status.code(), Some(1));
    assert_eq!(report(&strict)["tolerances"]["residual"].as_f64(), Some(1e-30));
    let relaxed = Command::new(env!("CARGO_BIN_EXE_hurwitz"))
        .args(["rank1", "residual", "--config", c, "--residual-tol", "1e-3"])
        .env("HURWITZ_TOL", "1e-30")
        .output()
        .unwrap();
    assert_eq!(relaxed.status.code(), Some(0));
}

#[test]
fn hydro_evolve_writes_grid_csv_and_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, json) = (dir.path().join("grid.csv"), dir.path().join("report.json"));
    let cfg = config("hydro.json");
    let out = run(&[
        "hydro", "evolve", "--config", cfg.to_str().unwrap(),
        "--csv", csv.to_str().unwrap(), "--output", json.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "x,t,re_lambda_1,im_lambda_1,re_lambda_2,im_lambda_2,re_v_1,im_v_1,re_v_2,im_v_2"
    );
    assert_eq!(lines.count(), 25);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert!(r["results"]["hds"]["residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn geometry_iso_and_flow_commands_pass_on_examples() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("beta.csv");
    let g = config("geometry.json");
    let out = run(&["geometry", "report", "--config", g.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("step,re_lambda_1"));
    for sub in ["run", "tau-check", "monodromy"] {
        let i = config("iso.json");
        let out = run(&["iso", sub, "--config", i.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "iso {sub}");
    }
    let f = config("flow.json");
    assert_eq!(run(&["flow", "run", "--config", f.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn verify_all_quick_passes() {
    let out = run(&["verify", "all", "--suite", "quick", "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let lines = String::from_utf8_lossy(&out.stderr).lines().filter(|l| l.starts_with("PASS")).count();
    assert_eq!(lines, 10);
    assert_eq!(report(&out)["results"]["criteria"].as_array().unwrap().len(), 10);
}
