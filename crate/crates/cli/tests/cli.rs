use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const PRESETS: [&str; 8] = [
    "takagi:0.5",
    "takagi:1",
    "takagi:1.5",
    "takagi:2",
    "riesz-nagy:0.3",
    "okamoto:0.5",
    "okamoto:0.6",
    "skew-takagi:0.3,0.5,0.25",
];

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_affine-spectra"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok_stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    serde_json::from_str(&ok_stdout(args)).unwrap()
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn constants_for_riesz_nagy() {
    let v = ok_json(&["constants", "--preset", "riesz-nagy:0.3"]);
    assert_eq!(v["regime"], "CaseA");
    let (lo, hi) = (v["alpha_min"].as_f64().unwrap(), v["alpha_max"].as_f64().unwrap());
    assert!((lo - 0.7f64.ln() / 0.5f64.ln()).abs() < 1e-12);
    assert!((hi - 0.3f64.ln() / 0.5f64.ln()).abs() < 1e-12);
}

#[test]
fn takagi_one_spectrum_is_a_single_point() {
    let csv = ok_stdout(&["spectrum", "--preset", "takagi:1", "--grid", "3"]);
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "alpha,dim,branch");
    assert_eq!(rows.len(), 2, "{csv}");
    let f: Vec<&str> = rows[1].split(',').collect();
    assert_eq!(f[0].parse::<f64>().unwrap(), 1.0);
    assert_eq!(f[1].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn bad_system_reports_sum_not_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"branches": [{"a": 0.5, "b": 0.0, "c": 0.0, "d": 0.5, "e": 0.0},
                         {"a": 0.6, "b": 0.5, "c": 0.0, "d": 0.5, "e": 0.5}]}"#,
    )
    .unwrap();
    let out = run(&["validate", "--system", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "SumNotOne");
}

#[test]
fn polygon_systems_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sys.json");
    std::fs::write(&path, r#"{"vertices": [[0, 0], [0.4, 0.7], [1, 0.2]], "d": [0.3, -0.4]}"#).unwrap();
    let v = ok_json(&["validate", "--system", path.to_str().unwrap()]);
    assert_eq!(v["r"], 2);
    assert_eq!(v["vertices"][1][1], 0.7);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["spectrum", "--preset", "takagi:1", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["constants"]).status.code(), Some(2));
    assert_eq!(run(&["constants", "--preset", "takagi:1", "--system", "x.json"]).status.code(), Some(2));
    let out = bin().env("AFFINE_SPECTRA_THREADS", "zero").args(["constants", "--preset", "takagi:1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn domain_errors_exit_with_one_and_json() {
    for args in [
        &["constants", "--preset", "takagi:-1"][..],
        &["eval", "--preset", "takagi:0.5", "--x", "1.5"][..],
        &["exponent", "--preset", "takagi:2", "--coding", "(1,2)"][..],
        &["exponent", "--preset", "takagi:0.5", "--coding", "(3)"][..],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err: Value = serde_json::from_slice(&out.stderr).unwrap();
        assert!(err["error"].is_string() && err["message"].is_string());
    }
    let out = run(&["exponent", "--preset", "takagi:2", "--coding", "(1,2)"]);
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "PolynomialDegenerate");
}

#[test]
fn constants_round_trip_into_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    for p in PRESETS {
        let path = dir.path().join("c.json");
        let out = run(&["constants", "--preset", p, "-o", path.to_str().unwrap()]);
        assert!(out.status.success());
        let frozen = ok_stdout(&["spectrum", "--constants", path.to_str().unwrap(), "--grid", "41"]);
        let direct = ok_stdout(&["spectrum", "--preset", p, "--grid", "41"]);
        assert_eq!(frozen, direct, "{p}");
    }
}

#[test]
fn golden_csv_files() {
    assert_eq!(
        ok_stdout(&["sample", "--preset", "takagi:0.5", "--points", "17"]),
        golden("sample_takagi_0.5_17.csv")
    );
    assert_eq!(
        ok_stdout(&["spectrum", "--preset", "riesz-nagy:0.3", "--grid", "11"]),
        golden("spectrum_riesz_nagy_0.3_11.csv")
    );
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["spectrum", "--preset", "skew-takagi:0.3,0.5,0.25", "--grid", "64"];
    let one = bin().env("AFFINE_SPECTRA_THREADS", "1").args(args).output().unwrap();
    let four = bin().env("AFFINE_SPECTRA_THREADS", "4").args(args).output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn every_preset_runs_every_command() {
    for p in PRESETS {
        ok_json(&["validate", "--preset", p]);
        ok_json(&["constants", "--preset", p]);
        ok_json(&["eval", "--preset", p, "--x", "0.3", "1/3"]);
        ok_stdout(&["sample", "--preset", p, "--points", "33"]);
        ok_json(&["coding", "--preset", p, "--x", "2/7"]);
        ok_stdout(&["spectrum", "--preset", p, "--grid", "9", "--format", "json"]);
        if p != "takagi:2" {
            ok_json(&["exponent", "--preset", p, "--coding", "1,(2,1)"]);
            ok_json(&["exponent", "--preset", p, "--x", "2/7"]);
            ok_json(&["exponent", "--preset", p, "--coding", "(1,2)", "--horizon", "500"]);
        }
    }
}

#[test]
fn exponent_at_a_rational_point() {
    // 1/3 has Takagi coding (1,2).
    let v = ok_json(&["exponent", "--preset", "takagi:0.5", "--x", "1/3"]);
    assert_eq!(v["coding"], "(1,2)");
    assert_eq!(v["status"], "Regular");
    assert!((v["alpha"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let v = ok_json(&["exponent", "--preset", "skew-takagi:0.3,0.5,0.25", "--x", "0.3"]);
    assert_eq!(v["status"], "Cut");
    assert_eq!(v["cut_point"]["k_n0_in_lambda"], true);
    assert_eq!(v["alpha"], 1.0);
}

#[test]
fn coding_of_a_cantor_point() {
    let v = ok_json(&["coding", "--preset", "okamoto:0.5", "--x", "1/4", "--depth", "6"]);
    assert_eq!(v["coding"], "(1,3)");
    assert_eq!(v["digits"], "1,3,1,3,1,3");
    assert_eq!(v["intervals"].as_array().unwrap().len(), 6);
}

#[test]
fn infinite_exponent_row_when_a_branch_is_flat() {
    let csv = ok_stdout(&["spectrum", "--preset", "okamoto:0.5", "--grid", "5"]);
    assert_eq!(csv.lines().last().unwrap(), "inf,1.0000000000000000e0,Endpoint");
}

#[test]
fn verify_modes_report_and_fail_loudly() {
    let v = ok_json(&["verify", "--preset", "takagi:0.5", "--mode", "exponent", "--random", "5", "--coding", "(1,2)"]);
    assert_eq!(v["pass"], true);
    assert_eq!(v["checks"], 6);
    let v = ok_json(&["verify", "--preset", "riesz-nagy:0.3", "--mode", "ae", "--points", "200", "--horizon", "2000"]);
    assert_eq!(v["pass"], true);
    let v = ok_json(&["verify", "--preset", "skew-takagi:0.3,0.5,0.5", "--mode", "derivative", "--random", "3"]);
    assert_eq!(v["pass"], true);
    // A non-differentiable coding cannot pass the derivative check.
    let out = run(&["verify", "--preset", "takagi:0.5", "--mode", "derivative", "--coding", "(1,2)"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "VerificationFailed");
}

#[test]
fn seeded_commands_are_deterministic() {
    let args = ["gen-coding", "--preset", "skew-takagi:0.3,0.5,0.25", "--lambda", "0.5", "--length", "2000", "--seed", "7"];
    assert_eq!(ok_stdout(&args), ok_stdout(&args));
    let other = ok_stdout(&["gen-coding", "--preset", "skew-takagi:0.3,0.5,0.25", "--lambda", "0.5", "--length", "2000", "--seed", "8"]);
    assert_ne!(ok_stdout(&args), other);
}

#[test]
fn eval_csv_and_exact_points() {
    let csv = ok_stdout(&["eval", "--preset", "takagi:2", "--x", "1/3", "0.25", "--format", "csv"]);
    let rows: Vec<Vec<f64>> =
        csv.lines().skip(1).map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
    assert!((rows[0][1] - 4.0 / 9.0).abs() < 1e-12);
    assert!((rows[1][1] - 0.375).abs() < 1e-12);
}
