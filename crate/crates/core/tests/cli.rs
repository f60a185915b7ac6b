use std::path::Path;
use std::process::{Command, Output};

fn lumen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lumen"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("run lumen")
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

#[test]
fn in_process_tour_matches_the_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.jsonl");
    let o = lumen(&[
        "scenario",
        "play",
        &data("canonical_tour.jsonl"),
        "--in-process",
        "--golden",
        &data("canonical_tour.golden.jsonl"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let written = std::fs::read_to_string(&out).unwrap();
    assert_eq!(written, std::fs::read_to_string(data("canonical_tour.golden.jsonl")).unwrap());

    let same = lumen(&["scenario", "diff", out.to_str().unwrap(), &data("canonical_tour.golden.jsonl")]);
    assert_eq!(same.status.code(), Some(0));
}

#[test]
fn diff_reports_divergence_with_exit_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let golden = std::fs::read_to_string(data("canonical_tour.golden.jsonl")).unwrap();
    let altered = golden.replacen("Greeting", "Grinning", 1);
    let path = dir.path().join("altered.jsonl");
    std::fs::write(&path, altered).unwrap();
    let o = lumen(&["scenario", "diff", &data("canonical_tour.golden.jsonl"), path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stdout.is_empty() || !o.stderr.is_empty());
}

#[test]
fn dump_prints_the_shipped_machine() {
    let o = lumen(&["brain", "fsm", "--dump"]);
    assert!(o.status.success());
    let printed: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let shipped: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(data("tour_fsm.json")).unwrap()).unwrap();
    assert_eq!(printed, shipped);
}

#[test]
fn malformed_scenario_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jsonl");
    std::fs::write(&path, "{\"t\":10,\"event\":\"teleport\"}\n").unwrap();
    let o = lumen(&["scenario", "play", path.to_str().unwrap(), "--in-process"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("teleport"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(lumen(&["scenario", "play"]).status.code(), Some(2));
    assert_eq!(lumen(&["warp"]).status.code(), Some(2));
}

#[test]
fn virtual_demo_passes_its_expectations() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("demo.jsonl");
    let o = lumen(&["demo", "--virtual-clock", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.lines().count() > 50);
}
