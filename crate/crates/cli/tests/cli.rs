//! End-to-end checks of the binary's exit codes and artifacts.

use std::path::Path;
use std::process::{Command, Output};

fn lochs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lochs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn config_path(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

#[test]
fn no_arguments_prints_usage_and_exits_2() {
    let out = lochs(&[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.to_lowercase().contains("usage"), "stderr: {err}");
}

#[test]
fn unknown_flag_exits_2() {
    let out = lochs(&["verify", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_symbol_reports_pass() {
    let out = lochs(&["validate-symbol", "--symbol", "schrodinger", "--k-max", "4"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(doc["passed"], serde_json::Value::Bool(true));
    assert_eq!(doc["sigma"], serde_json::json!(1.0));
}

#[test]
fn validate_unknown_symbol_is_domain_error() {
    let out = lochs(&["validate-symbol", "--symbol", "warp-drive"]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert!(err["error"].as_str().unwrap().contains("warp-drive"));
}

#[test]
fn norm_of_plane_wave_prints_reference_constant() {
    let out = lochs(&[
        "norm",
        "--data",
        &config_path("plane_wave.json"),
        "--s",
        "1",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    // single active block N = 1: value = ||chi||_2 ~ 0.87
    let value = doc["value"].as_f64().unwrap();
    assert!(value > 0.5 && value < 1.0, "value {value}");
    assert!(doc["per_block"].get("1").is_some());
    assert!(doc["certified_gap"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn evolve_writes_artifacts_with_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let out = lochs(&[
        "evolve",
        "--config",
        &config_path("cubic_two_mode.json"),
        "--t",
        "0.05",
        "--nodes",
        "9",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("cubic_two_mode.diagnostics.csv")).unwrap();
    assert!(csv.starts_with("# config_sha256="));
    assert!(csv.contains("t,norm_s,norm_c1,spectrum_size,pruned_mass"));
    let traj: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("cubic_two_mode.trajectory.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(traj["achieved_t"], serde_json::json!(0.05));
    assert!(traj["config_sha256"].as_str().unwrap().len() == 64);
    assert!(traj["trajectory"]["states"].as_array().unwrap().len() == 9);

    // plot the diagnostics CSV
    let svg_path = dir.path().join("norm.svg");
    let out = lochs(&[
        "plot",
        "--input",
        dir.path()
            .join("cubic_two_mode.diagnostics.csv")
            .to_str()
            .unwrap(),
        "--output",
        svg_path.to_str().unwrap(),
        "--y",
        "norm_s,spectrum_size",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("config_sha256"));
    assert!(svg.contains("polyline"));
}

#[test]
fn ap_check_reports_containment() {
    let out = lochs(&["ap-check", "--config", &config_path("ap_check.json")]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(doc["contained"], serde_json::Value::Bool(true));
    assert!(doc["spectrum_growth"].as_array().unwrap().len() >= 2);
}

#[test]
fn verify_single_case_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = lochs(&[
        "verify",
        "--case",
        "paradiff_reconstruction",
        "--trials",
        "3",
        "--seed",
        "1",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout_str(&out).contains("PASS paradiff_reconstruction"));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["all_pass"], serde_json::Value::Bool(true));
}

#[test]
fn verify_unknown_case_is_domain_error() {
    let out = lochs(&["verify", "--case", "nonexistent"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn envelope_emits_sequence() {
    let out = lochs(&[
        "envelope",
        "--data",
        &config_path("two_mode_data.json"),
        "--s",
        "1.0",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(doc["degenerate"], serde_json::Value::Bool(false));
    assert!(doc["c"].as_object().unwrap().contains_key("1"));
}

#[test]
fn plot_loglog_annotates_slope() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("scaling.csv");
    // power law y = x^2
    let mut body = String::from("n,l1\n");
    for k in 2..=8 {
        let x = (1u64 << k) as f64;
        body.push_str(&format!("{x},{}\n", x * x));
    }
    std::fs::write(&csv, body).unwrap();
    let svg_path = dir.path().join("scaling.svg");
    let out = lochs(&[
        "plot",
        "--input",
        csv.to_str().unwrap(),
        "--output",
        svg_path.to_str().unwrap(),
        "--x",
        "n",
        "--y",
        "l1",
        "--loglog",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.contains("slope 2.000"), "missing slope annotation");
}

#[test]
fn evolve_linear_emits_block_columns() {
    let out = lochs(&[
        "evolve-linear",
        "--data",
        &config_path("two_mode_data.json"),
        "--symbol",
        "airy",
        "--times",
        "0.25,0.5",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout_str(&out);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("t,norm,ratio,block_1"));
    assert_eq!(lines.count(), 3); // t = 0 plus two requested times
}
