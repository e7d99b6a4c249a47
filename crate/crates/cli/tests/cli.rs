//! End-to-end tests of the command-line interface.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bergman-toeplitz"))
}

#[test]
fn list_enumerates_experiments() {
    let out = bin().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines.len() >= 9, "only {} experiments listed", lines.len());
    assert!(text.contains("example-4.1"));
    assert!(text.contains("thm-6.2-poly-equiv"));
}

#[test]
fn list_section_filter() {
    let out = bin().args(["list", "--section", "4"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text.lines().count(),
        5,
        "section 4 holds the five examples:\n{text}"
    );

    let out = bin().args(["list", "--section", "nope"]).output().unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
}

#[test]
fn run_geometry_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("geom");
    let out = bin()
        .args(["run", "geometry-selftest", "--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let report = std::fs::read_to_string(out_dir.join("report.csv")).unwrap();
    assert!(report.starts_with("# experiment=geometry-selftest"));
    assert!(report.contains("disk_roundtrip_1000"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["verdict"], "PASS");
    assert_eq!(summary["experiment"], "geometry-selftest");
    assert!(summary["anchors"].as_str().unwrap().contains("Section 2"));
}

#[test]
fn deterministic_output_for_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| -> Vec<u8> {
        let out_dir = dir.path().join(sub);
        let out = bin()
            .args(["run", "geometry-selftest", "--seed", "42", "--out"])
            .arg(&out_dir)
            .output()
            .unwrap();
        assert!(out.status.success());
        std::fs::read(out_dir.join("report.csv")).unwrap()
    };
    assert_eq!(
        run("a"),
        run("b"),
        "identical config + seed must give identical bytes"
    );
}

#[test]
fn unknown_experiment_is_usage_error() {
    let out = bin().args(["run", "no-such-thing"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown experiment"));
}

#[test]
fn malformed_config_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();

    // syntactically broken: diagnostic carries line/column
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"schema_version\": 1,\n  \"experiment\": }").unwrap();
    let out = bin().arg("run").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line"), "diagnostic missing position: {err}");

    // unknown key rejected
    let typo = dir.path().join("typo.json");
    std::fs::write(
        &typo,
        r#"{"schema_version": 1, "experiment": "geometry-selftest", "bases_sizes": [4]}"#,
    )
    .unwrap();
    let out = bin().arg("run").arg(&typo).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bases_sizes"));

    // bad schema version
    let vers = dir.path().join("vers.json");
    std::fs::write(
        &vers,
        r#"{"schema_version": 7, "experiment": "geometry-selftest"}"#,
    )
    .unwrap();
    let out = bin().arg("run").arg(&vers).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_with_inline_symbol() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("atoms.json");
    let out_dir = dir.path().join("out");
    std::fs::write(
        &cfg,
        format!(
            r#"{{
                "schema_version": 1,
                "experiment": "example-4.1",
                "symbol": {{"atoms": [[0.0, 1.0, 1.0, 0.0], [1.0, 2.0, 1.0, 0.0]]}},
                "basis_sizes": [6, 10],
                "out_dir": {:?}
            }}"#,
            out_dir
        ),
    )
    .unwrap();
    let out = bin().arg("run").arg(&cfg).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(Path::new(&out_dir).join("report.csv").exists());
    let report = std::fs::read_to_string(out_dir.join("report.csv")).unwrap();
    assert!(report.lines().any(|l| l.starts_with("6,")));
    assert!(report.lines().any(|l| l.starts_with("10,")));
}

#[test]
fn config_rejects_symbol_conflict() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("conflict.json");
    std::fs::write(
        &cfg,
        r#"{"schema_version": 1, "experiment": "example-4.1",
            "symbol": {"atoms": []}, "symbol_file": "also.json"}"#,
    )
    .unwrap();
    let out = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
