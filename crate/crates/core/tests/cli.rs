//! Golden exit-code and report-format tests for the `uval` binary.

use std::process::Command;

fn uval() -> Command {
    Command::new(env!("CARGO_BIN_EXE_uval"))
}

#[test]
fn tauberian_on_graph_a_passes() {
    let output = uval()
        .args([
            "tauberian",
            "--zoo",
            "graph_a",
            "--strategy",
            "greedy-mean-payoff",
            "--T-grid",
            "4*2^k,k<=10",
            "--lambda-grid",
            "ln2*2^-k,k<=12",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(doc["verdicts"]["v"], true);
    assert_eq!(doc["verdicts"]["w"], true);
    assert_eq!(doc["verdicts"]["eq"], true);
    assert_eq!(doc["dpp_ok"], true);
    assert_eq!(doc["verdicts_consistent"], true);
}

#[test]
fn dpp_check_on_oscillating_bundle_fails_with_witness() {
    let output = uval()
        .args([
            "dpp-check",
            "--zoo",
            "oscillating",
            "--h-grid",
            "1",
            "--T-grid",
            "1,2,4,8,15,16,32",
            "--format",
            "csv",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let csv = String::from_utf8(output.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("family,h,T_or_lambda,deviation"));
    let max_dev = lines
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .fold(0.0, f64::max);
    assert!(max_dev >= 0.01, "csv max deviation {max_dev}");
}

#[test]
fn eval_rejects_zero_horizon() {
    let output = uval()
        .args(["eval", "--zoo", "graph_b", "--T-grid", "0"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("T must be ≥ 1"), "stderr: {stderr}");
}

#[test]
fn eval_matches_fixture_values() {
    let output = uval()
        .args([
            "eval",
            "--zoo",
            "graph_b",
            "--T-grid",
            "4",
            "--lambda-grid",
            "ln2",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(doc["results"][0]["values"]["s0"], 0.75);
    let w = doc["results"][1]["values"]["s0"].as_f64().unwrap();
    assert!((w - 0.5).abs() <= 1e-12);
}

#[test]
fn subsolution_check_passes_on_graph_b() {
    let output = uval()
        .args([
            "subsolution-check",
            "--zoo",
            "graph_b",
            "--T-grid",
            "100",
            "--lambda-grid",
            "ln2",
            "--n-grid",
            "1,2,4",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(doc["passed"], true);
}

#[test]
fn zoo_build_emits_loadable_model_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ladder.json");
    let status = uval()
        .args(["zoo", "build", "ladder", "--param", "n=5", "-o"])
        .arg(&path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    let output = uval()
        .args(["eval", "--model"])
        .arg(&path)
        .args(["--T-grid", "4"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    // v_4(L_2) = (4-2)/4 on the ladder.
    assert_eq!(doc["results"][0]["values"]["L2"], 0.5);
}

#[test]
fn zoo_list_names_every_entry() {
    let output = uval().args(["zoo", "list"]).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let text = String::from_utf8(output.stdout).unwrap();
    for name in ["constant", "two_cycle", "graph_a", "graph_b", "ladder", "oscillating", "random"] {
        assert!(text.contains(name), "missing {name}");
    }
}

#[test]
fn unknown_model_file_is_an_input_error() {
    let output = uval()
        .args(["eval", "--model", "/nonexistent/model.json", "--T-grid", "1"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}
