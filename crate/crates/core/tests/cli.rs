use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn riskbound(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riskbound"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

#[test]
fn generate_then_analyze_constant_family() {
    let dir = tempfile::tempdir().unwrap();
    let out = riskbound(
        &[
            "generate", "--family", "constant", "--s", "6", "--p", "1.01", "--q", "1.0", "--out", "c.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let out = riskbound(&["analyze", "c.json", "--out", "r.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("r.json")).unwrap();
    let report: Value = serde_json::from_str(&text).unwrap();
    let ratio = report["pair"]["bounds"]["bapat_ratio"]["value"].as_f64().unwrap();
    assert!((ratio - 0.01f64.ln_1p()).abs() < 1e-12);
    // Re-serializing the parsed report reproduces it exactly.
    let again: Value = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(report, again);
}

#[test]
fn analyze_reports_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "bad.json",
        r#"{"P": [[0, 1], [1, 0]], "c": [[0, 0], [0, 0]]}"#,
    );
    let out = riskbound(&["analyze", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("aperiodic: false"));
    write(
        dir.path(),
        "red.json",
        r#"{"P": [[1, 0], [0, 1]], "c": [[0, 0], [0, 0]]}"#,
    );
    let out = riskbound(&["analyze", "red.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("irreducible: false"));
}

#[test]
fn schema_and_io_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "bad.json",
        r#"{"P": [[0.5, 0.5], [0.5, "half"]], "c": [[0, 0], [0, 0]]}"#,
    );
    let out = riskbound(&["analyze", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("P[1][1]"));
    let out = riskbound(&["analyze", "missing.json"], dir.path());
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn simulate_average_cost_on_constant_costs() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "spec.json",
        r#"{"P": [[0.9, 0.1], [0.3, 0.7]], "c": [[5, 5], [5, 5]]}"#,
    );
    let out = riskbound(
        &[
            "simulate",
            "spec.json",
            "--alg",
            "avg",
            "--horizon",
            "5000",
            "--seed",
            "3",
            "--out",
            "t.csv",
            "--thin",
            "1000",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((summary["final_estimate"].as_f64().unwrap() - 5.0).abs() <= 1e-3);
    assert_eq!(summary["diverged"], Value::Bool(false));
    let csv = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,estimate,target,abs_error");
    assert_eq!(lines.len(), 6);
    assert!(lines[5].starts_with("5000,"));
}

#[test]
fn simulate_td_on_doubly_stochastic_spec() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "spec.json",
        r#"{"P": [[0.5, 0.2, 0.3], [0.3, 0.5, 0.2], [0.2, 0.3, 0.5]],
            "c": [[0.1, -0.2, 0.3], [0.0, 0.2, -0.1], [0.3, 0.1, 0.0]],
            "Phi": [[1.7320508075688772, 0, 0], [0, 1.7320508075688772, 0], [0, 0, 1.7320508075688772]]}"#,
    );
    let out = riskbound(
        &[
            "simulate",
            "spec.json",
            "--alg",
            "td",
            "--horizon",
            "100000",
            "--seed",
            "1",
            "--out",
            "t.csv",
            "--thin",
            "10000",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(summary["rel_error"].as_f64().unwrap() <= 0.05, "{summary}");
}

#[test]
fn simulate_lspe_requires_features() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "spec.json",
        r#"{"P": [[0.9, 0.1], [0.3, 0.7]], "c": [[0, 0], [0, 0]]}"#,
    );
    let out = riskbound(
        &[
            "simulate",
            "spec.json",
            "--alg",
            "lspe",
            "--horizon",
            "10",
            "--out",
            "t.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_divergence_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "spec.json",
        r#"{"P": [[0.5, 0.5], [0.5, 0.5]], "c": [[3, 3], [3, 3]], "Phi": [[1, 0], [0, 1]]}"#,
    );
    let out = riskbound(
        &[
            "simulate",
            "spec.json",
            "--alg",
            "td",
            "--horizon",
            "10000",
            "--out",
            "t.csv",
            "--schedule",
            "harmonic",
            "--step-a",
            "50",
            "--step-b",
            "0",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["diverged"], Value::Bool(true));
}

#[test]
fn sweep_output_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "sweep", "--family", "diagonal", "--s", "40,10,20", "--p", "1.5,1.2", "--q", "1.0",
    ];
    let run = |workers: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_riskbound"))
            .args(args)
            .env("RISKBOUND_WORKERS", workers)
            .current_dir(dir.path())
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        String::from_utf8(out.stdout).unwrap()
    };
    let one = run("1");
    assert_eq!(one, run("3"));
    let first = one.lines().nth(1).unwrap();
    assert!(first.starts_with("diagonal,10,1.2"));
}

#[test]
fn sweep_rejects_invalid_family_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let out = riskbound(
        &["sweep", "--family", "constant", "--s", "5", "--p", "0.5", "--q", "1.0"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}
