use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bubblelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bubblelab")).args(args).output().expect("binary runs")
}

fn with_config(text: &str, args: &[&str]) -> (Output, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, text).unwrap();
    let mut all = args.to_vec();
    let p = path.to_str().unwrap().to_string();
    all.push("--config");
    all.push(&p);
    (bubblelab(&all), dir)
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON report on stdout")
}

fn assertion<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["sections"][0]["assertions"]
        .as_array()
        .unwrap()
        .iter()
        .find(|a| a["name"] == name)
        .unwrap_or_else(|| panic!("assertion {name} missing"))
}

#[test]
fn cluster_reports_the_closed_form() {
    let (out, _d) = with_config("[cluster]\nk = 2\nl = 2\na0 = 1\n", &["cluster"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    let y = &r["sections"][0]["results"]["solution"]["y"];
    assert!((y[0].as_f64().unwrap() + 0.70710678).abs() < 1e-8);
    assert!((y[1].as_f64().unwrap() - 0.70710678).abs() < 1e-8);
    assert!(r["sections"][0]["results"]["solution"]["hess_min_eig"].as_f64().unwrap() > 0.0);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["passed"], true);
}

fn failing(report: &Value) -> Vec<String> {
    report["sections"][0]["assertions"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|a| a["passed"] == false)
        .map(|a| a["name"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn corrupted_reference_fails_by_name() {
    // At γ = 3 the computed ∫f'(B̄) ≈ 26.79 lies between 8π and 9π, inside the
    // |err|·γ² ≤ 8π tolerance for either reference; the band check at γ = 6 is
    // what a 9π reference breaks.
    let nine_pi = 9.0 * std::f64::consts::PI;
    let (bad, _d) = with_config(
        &format!("[verify-integrals]\ngamma = [3]\nfprime_mass_reference = {nine_pi}\n"),
        &["verify-integrals"],
    );
    let (good, _d) = with_config("[verify-integrals]\ngamma = [3]\n", &["verify-integrals"]);
    assert_eq!(bad.status.code(), Some(1));
    let (bad_r, good_r) = (json(&bad), json(&good));
    let flipped: Vec<String> = failing(&bad_r).into_iter().filter(|n| !failing(&good_r).contains(n)).collect();
    assert_eq!(flipped, vec!["fprime_mass_band".to_string()]);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("verify-integrals/fprime_mass_band"));
    let row = &bad_r["sections"][0]["results"]["band"];
    let mass = row.as_array().unwrap().iter().find(|r| r["name"] == "fprime_mass").unwrap();
    assert_eq!(mass["reference"].as_f64().unwrap(), nine_pi);
    assert_eq!(assertion(&good_r, "fprime_mass_scaled_err[gamma=3]")["passed"], true);
}

#[test]
fn profile_csv_starts_at_the_origin() {
    let (out, _d) = with_config("[profile]\ngamma = 3\n", &["profile", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s,t,w,w_prime,z,b_bar"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row[0], 0.0);
    assert_eq!(row[2], 0.0);
    assert_eq!(row[4], 1.0);
    assert_eq!(row[5], 3.0);
    // 17 significant digits
    let first = text.lines().nth(2).unwrap().split(',').next().unwrap();
    assert_eq!(first.split('e').next().unwrap().replace('.', "").len(), 17);
}

#[test]
fn unknown_keys_exit_with_config_status() {
    let (out, _d) = with_config("[cluster]\nkk = 2\n", &["cluster"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kk"));
    assert!(out.stdout.is_empty());

    let (out, _d) = with_config("[clusterr]\nk = 2\n", &["cluster"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn constraint_violations_name_the_inequality() {
    let (out, _d) = with_config("[heights]\ndelta0 = 0.1\ngamma_bar = [8]\n", &["heights"]);
    assert_eq!(out.status.code(), Some(3));
    let r = json(&out);
    let e = &r["sections"][0]["error"];
    assert_eq!(e["kind"], "constraint_violation");
    assert!(e["message"].as_str().unwrap().contains("(3−√5)/4 < δ₀ < 1/2"));
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let out = bubblelab(&["verify-truncation", "--seed", "7", "--out", p.to_str().unwrap()]);
        assert!(out.stdout.is_empty());
        std::fs::read(&p).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn seed_is_echoed() {
    let out = bubblelab(&["cluster", "--seed", "9", "--jobs", "1"]);
    let r = json(&out);
    assert_eq!(r["config"]["seed"], 9);
    assert_eq!(r["config"]["cluster"]["restarts"], 100);
    assert_eq!(r["config"]["verify-integrals"]["band_delta0"], 0.4);
}

#[test]
fn assertion_table_as_csv() {
    let out = bubblelab(&["cluster", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("command,name,passed,value,lower,upper,strict\n"));
    assert!(text.contains("cluster,det_q_rel_err,true,"));
}

#[test]
fn help_formats_lists_the_columns() {
    let out = bubblelab(&["--help-formats"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("s,t,w,w_prime,z,b_bar"));
    assert!(text.contains("trial,p,gamma,ratio"));
}

#[test]
fn unwritable_output_path() {
    let out = bubblelab(&["cluster", "--out", Path::new("/nonexistent/dir/r.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}
