use std::process::Command;

fn simtutor() -> Command {
    Command::new(env!("CARGO_BIN_EXE_simtutor"))
}

#[test]
fn run_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let status = simtutor()
        .args([
            "run",
            "--policy",
            "static",
            "--learners",
            "8",
            "--seed",
            "3",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(report["policy"], "static");
    assert_eq!(report["learners"], 8);
}

#[test]
fn compare_prints_paired_deltas() {
    let output = simtutor()
        .args(["compare", "--learners", "4"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let report: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert!(report["mastery_rate_delta_pts"].is_number());
    assert_eq!(report["adaptive"]["learners"], 4);
    assert_eq!(report["static"]["learners"], 4);
}

#[test]
fn bad_configuration_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"method_match_bonus": 3.0}"#).unwrap();
    let output = simtutor()
        .arg("compare")
        .arg("--config")
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(!output.stderr.is_empty());

    let missing = dir.path().join("missing.json");
    let status = simtutor()
        .arg("run")
        .arg("--kb")
        .arg(&missing)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    let bad_policy = simtutor()
        .args(["run", "--policy", "random"])
        .status()
        .unwrap();
    assert_eq!(bad_policy.code(), Some(2));
}
