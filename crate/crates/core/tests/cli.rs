//! End-to-end CLI checks: file formats, determinism, and exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_randassign"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 output")
}

/// Export the fixture corpus once per test into a fresh temp dir.
fn corpus() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = run_in(dir.path(), &["audit", "app_b4", "--export", "."]);
    assert!(out.status.success(), "export failed: {out:?}");
    let path = dir.path().to_path_buf();
    (dir, path)
}

#[test]
fn run_upre_matches_the_worked_table_and_is_byte_deterministic() {
    let (_guard, dir) = corpus();
    let first = run_in(&dir, &["run", "upre", "fig1.json"]);
    assert!(first.status.success());
    let second = run_in(&dir, &["run", "upre", "fig1.json"]);
    assert_eq!(first.stdout, second.stdout);

    let doc: serde_json::Value = serde_json::from_str(&stdout(&first)).unwrap();
    let matrix = doc["matrix"].as_array().unwrap();
    // Row-major over agents 1..6 and items a..f: agent 6's d entry.
    assert_eq!(matrix[5 * 6 + 3], "3/4");
    assert_eq!(matrix[2 * 6 + 2], "1/4");
    // And the full document round-trips against the exported table.
    let expected = std::fs::read_to_string(dir.join("upre_fig1.json")).unwrap();
    let expected: serde_json::Value = serde_json::from_str(&expected).unwrap();
    assert_eq!(doc["matrix"], expected["matrix"]);
}

#[test]
fn run_ebm_expectation_reports_the_separating_entry() {
    let (_guard, dir) = corpus();
    let out = run_in(&dir, &["run", "ebm", "app_b4.json", "--mode", "expectation"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    // Agent 1, item c.
    assert_eq!(doc["matrix"][2], "1/6");
}

#[test]
fn run_rp_with_an_explicit_priority() {
    let (_guard, dir) = corpus();
    let out = run_in(&dir, &["run", "rp", "tiny1.json", "--priority", "2,1,3"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    // 2 gets a, 1 gets b, 3 gets c.
    let matrix: Vec<&str> = doc["matrix"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(matrix, vec!["0/1", "1/1", "0/1", "1/1", "0/1", "0/1", "0/1", "0/1", "1/1"]);

    // A missing priority is an input error.
    let out = run_in(&dir, &["run", "rp", "tiny1.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_ebm_sample_is_seed_deterministic() {
    let (_guard, dir) = corpus();
    let a = run_in(&dir, &["run", "ebm", "fig1.json", "--seed", "7"]);
    let b = run_in(&dir, &["run", "ebm", "fig1.json", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(doc["provenance"]["seed"], 7);
}

#[test]
fn check_exit_codes_and_witnesses() {
    let (_guard, dir) = corpus();

    let out = run_in(&dir, &["check", "feri", "astar.json", "fig1.json"]);
    assert!(out.status.success(), "{out:?}");
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["holds"], true);
    assert_eq!(doc["tiers"][0].as_array().unwrap().len(), 3);

    let out = run_in(&dir, &["check", "sd-wef", "prop1_P.json", "fig1.json"]);
    assert_eq!(out.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["property"], "sd-wef");
    assert_eq!(doc["holds"], false);
    assert_eq!(doc["witness"]["pair"], serde_json::json!(["6", "3"]));

    let out = run_in(&dir, &["check", "sete", "prop1_P.json", "fig1.json"]);
    assert!(out.status.success());

    // Deterministic property on a fractional matrix: input error.
    let out = run_in(&dir, &["check", "feri", "prop1_P.json", "fig1.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn decompose_with_and_without_filters() {
    let (_guard, dir) = corpus();

    // A permutation matrix decomposes into itself.
    let out = run_in(&dir, &["decompose", "astar.json", "fig1.json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["terms"].as_array().unwrap().len(), 1);
    assert_eq!(doc["terms"][0]["coefficient"], "1/1");

    // The six-agent table is a rank-respecting mixture...
    let out = run_in(&dir, &["decompose", "prop1_P.json", "fig1.json", "--property", "fhr"]);
    assert!(out.status.success());

    // ...but the uniform-eating table is not.
    let out = run_in(&dir, &["decompose", "upre_fig1.json", "fig1.json", "--property", "fhr"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn audit_prints_check_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["audit", "app_b4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("1/6"));
    assert!(text.contains("3/20"));
    assert!(text.lines().all(|l| l.starts_with("[ok]")), "{text}");

    let out = run_in(dir.path(), &["audit", "prop_impsdcfr2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("5/6"));

    let out = run_in(dir.path(), &["audit", "no_such_fixture"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_input_and_budget_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("broken.json"), "{ not json").unwrap();
    let out = run_in(dir.path(), &["run", "upre", "broken.json"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run_in(dir.path(), &["run", "upre", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));

    let (_guard, cdir) = corpus();
    let out = run_in(
        &cdir,
        &["run", "ebm", "fig1.json", "--mode", "expectation", "--budget-worlds", "2"],
    );
    assert_eq!(out.status.code(), Some(3));
}
