use std::path::{Path, PathBuf};
use std::process::Command;

use mbsr::cli::{run, EXIT_CLEAN, EXIT_ERROR, EXIT_FINDINGS};

fn example(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("examples")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn mbsr(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("mbsr").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn lint_exit_codes_and_evidence() {
    let (code, out, err) = mbsr(&["--corpus", &example("lint-mixed.mbsr"), "lint"]);
    assert_eq!(code, EXIT_FINDINGS, "{err}");
    assert!(out.contains("  R16 violated at text 11..20: \"shall not\""), "{out}");
    assert!(out.contains("  TBX violated at A01 16..19: \"TBR\""), "{out}");
    assert!(err.contains("8 violation(s) across 7 requirement(s)"), "{err}");

    let (code, _, err) = mbsr(&["--corpus", &example("lint-fixed.mbsr"), "lint"]);
    assert_eq!(code, EXIT_CLEAN, "{err}");
    let (code, out, _) = mbsr(&["--corpus", &example("lint-mixed.mbsr"), "--scope", "LM-1", "lint"]);
    assert_eq!(code, EXIT_CLEAN);
    assert!(out.starts_with("LM-1: R1 S,"), "{out}");
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["lint"],
        vec!["export"],
        vec!["--format", "md", "export"],
        vec!["--format", "csv", "matrix"],
        vec!["--now", "2024-02-05T00:00:00Z", "metrics"],
    ] {
        let mut full = vec!["--corpus".to_string(), example("asteroid.mbsr")];
        full.extend(args.iter().map(|s| s.to_string()));
        let refs: Vec<&str> = full.iter().map(String::as_str).collect();
        assert_eq!(mbsr(&refs), mbsr(&refs), "{args:?}");
    }
}

#[test]
fn parse_shows_five_bound_slots() {
    let (code, out, _) = mbsr(&["--corpus", &example("asteroid.mbsr"), "parse", "L3-EX.1"]);
    assert_eq!(code, EXIT_CLEAN);
    assert!(out.contains("pattern: Iso2"), "{out}");
    assert!(
        out.contains("SR1 Condition: While in the Sample_Collection mode"),
        "{out}"
    );
    assert!(out.contains("-> sample-collection"), "{out}");
    let (code, _, _) = mbsr(&["--corpus", &example("metrics10.mbsr"), "parse", "M04"]);
    assert_eq!(code, EXIT_FINDINGS);
}

#[test]
fn metrics_history_appends() {
    let dir = tempfile::tempdir().unwrap();
    let history = dir.path().join("history.csv");
    let history = history.to_str().unwrap();
    let corpus = example("metrics10.mbsr");
    for now in ["2024-02-05T00:00:00Z", "2024-02-06T00:00:00Z"] {
        let (code, _, err) = mbsr(&["--corpus", &corpus, "--now", now, "metrics", "--history", history]);
        assert_eq!(code, EXIT_CLEAN, "{err}");
    }
    let text = std::fs::read_to_string(history).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3, "{text}");
    assert_eq!(lines[1], "2024-02-05T00:00:00Z,*,*,10,5,9,9,3,7,7,70.00");
    assert!(lines[2].starts_with("2024-02-06T00:00:00Z,"));
}

#[test]
fn trace_text_and_dot() {
    let corpus = example("derive3.mbsr");
    let (code, out, _) = mbsr(&["--corpus", &corpus, "trace", "L2-1"]);
    assert_eq!(code, EXIT_CLEAN);
    assert!(out.contains("upstream: L1-1, rover-reqs"), "{out}");
    let (_, dot, _) = mbsr(&["--corpus", &corpus, "--format", "dot", "trace", "L2-1"]);
    assert!(dot.starts_with("digraph relations {"));
    assert!(dot.contains("\"L3-1\" -> \"L2-1\" [label=\"Derive\"];"), "{dot}");
}

#[test]
fn export_needs_mapping_for_reqif() {
    let corpus = example("sets.mbsr");
    let (code, _, err) = mbsr(&["--corpus", &corpus, "--format", "reqif", "export"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(!err.is_empty());
    let (code, out, _) = mbsr(&[
        "--corpus",
        &corpus,
        "--format",
        "reqif",
        "export",
        "--mapping",
        &example("reqif.mapping"),
    ]);
    assert_eq!(code, EXIT_CLEAN);
    assert!(out.contains("<REQ-IF"));
}

#[test]
fn out_file_receives_data() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.xmi");
    let (code, out, _) = mbsr(&[
        "--corpus",
        &example("asteroid.mbsr"),
        "--out",
        path.to_str().unwrap(),
        "export",
    ]);
    assert_eq!((code, out.as_str()), (EXIT_CLEAN, ""));
    assert!(std::fs::read_to_string(&path).unwrap().contains("Id='L3-EX.1'"));
}

#[test]
fn strict_rejects_trace_links() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.mbsr");
    std::fs::write(
        &path,
        "[requirement A]\ntext = The Rover shall drive.\n\n[requirement B]\ntext = The Arm shall move.\n\n[link t]\nkind = Trace\nsource = A\ntarget = B\n",
    )
    .unwrap();
    let corpus = path.to_str().unwrap();
    let (code, _, err) = mbsr(&["--corpus", corpus, "validate"]);
    assert_eq!(code, EXIT_CLEAN);
    assert!(err.contains("Trace"), "{err}");
    let (code, _, _) = mbsr(&["--corpus", corpus, "--strict", "validate"]);
    assert_eq!(code, EXIT_ERROR);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(mbsr(&["lint"]).0, EXIT_ERROR);
    assert_eq!(mbsr(&["--corpus", &example("asteroid.mbsr"), "bogus"]).0, EXIT_ERROR);
    assert_eq!(mbsr(&["--corpus", "/nonexistent.mbsr", "lint"]).0, EXIT_ERROR);
    assert_eq!(
        mbsr(&["--corpus", &example("asteroid.mbsr"), "--scope", "nope", "lint"]).0,
        EXIT_ERROR
    );
    let (code, out, _) = mbsr(&["--help"]);
    assert_eq!(code, EXIT_CLEAN);
    assert!(out.contains("lint"));
}

#[test]
fn glossary_check_reports_undefined_terms() {
    let (code, out, _) = mbsr(&["--corpus", &example("lint-mixed.mbsr"), "glossary", "--check"]);
    assert_eq!(code, EXIT_FINDINGS);
    assert!(out.contains("Telemetry_Frames"), "{out}");
    let (code, out, _) = mbsr(&["--corpus", &example("asteroid.mbsr"), "glossary"]);
    assert_eq!(code, EXIT_CLEAN);
    assert!(out.starts_with("term,uses\n"), "{out}");
}

fn binary() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_mbsr"))
}

#[test]
fn binary_exit_status_and_config_env() {
    let status = Command::new(binary())
        .args(["--corpus", &example("lint-mixed.mbsr"), "lint"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_FINDINGS));

    // an override that makes R16 a manual rule silences its violation
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("catalog.mbsr");
    std::fs::write(&config, "[rule R16]\nautomation = Manual\n").unwrap();
    let run = |env: Option<&Path>| {
        let mut cmd = Command::new(binary());
        cmd.args(["--corpus", &example("lint-mixed.mbsr"), "--scope", "LM-2", "lint"]);
        cmd.env_remove("MBSR_CONFIG");
        if let Some(p) = env {
            cmd.env("MBSR_CONFIG", p);
        }
        let output = cmd.output().unwrap();
        assert!(
            output.status.code() != Some(EXIT_ERROR),
            "{}",
            String::from_utf8_lossy(&output.stderr)
        );
        String::from_utf8(output.stdout).unwrap()
    };
    assert!(run(None).contains("R16 V"));
    let overridden = run(Some(&config));
    assert!(overridden.starts_with("LM-2: R1 V"), "{overridden}");
    assert!(!overridden.contains("R16"), "{overridden}");
}
