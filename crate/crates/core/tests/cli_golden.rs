mod common;

use common::*;

fn corpus_arg(name: &str) -> String {
    corpus_dir().join(name).display().to_string()
}

#[test]
fn every_golden_case_matches() {
    let mut failures = Vec::new();
    for case in golden_cases() {
        let (code, out, err) = run_cli(&case.args);
        if code != case.code {
            failures.push(format!("{}: exit {code}, expected {} (stderr: {err})", case.name, case.code));
        }
        if let Some(expected) = &case.stdout {
            if out != *expected {
                failures.push(format!("{}: stdout {out:?}, expected {expected:?}", case.name));
            }
        }
        if case.code != 0 {
            assert!(out.is_empty(), "{}: failing command wrote to stdout: {out:?}", case.name);
            assert!(!err.is_empty(), "{}: failing command gave no diagnostic", case.name);
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn stdout_is_pinned_for_successful_commands() {
    for case in golden_cases() {
        if case.code == 0 {
            assert!(case.stdout.is_some(), "{} has no golden stdout", case.name);
        }
    }
}

#[test]
fn diagnostics_carry_positions() {
    let (code, _, err) = run_cli(&["check".into(), corpus_arg("broken.proof")]);
    assert_eq!(code, 2);
    assert!(err.contains("broken.proof:3:1: error:"), "{err}");
    let (code, _, err) = run_cli(&["check".into(), corpus_arg("bad.proof")]);
    assert_eq!(code, 1);
    assert!(err.contains("bad.proof:2:1: error: at root: eigenvariable violation"), "{err}");
}

#[test]
fn witness_trace_file_is_pinned() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let args: Vec<String> = vec![
        "witness".into(),
        corpus_arg("P2.proof"),
        "--pred".into(),
        "NEXT".into(),
        "--input".into(),
        "5".into(),
        "--trace".into(),
        trace.display().to_string(),
    ];
    let (code, out, _) = run_cli(&args);
    assert_eq!((code, out.as_str()), (0, "6\n"));
    let expected = std::fs::read_to_string(golden_dir().join("witness_p2.trace.jsonl")).unwrap();
    assert_eq!(std::fs::read_to_string(&trace).unwrap(), expected);
}

#[test]
fn warm_start_is_flagged_in_the_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let args: Vec<String> = vec![
        "witness".into(),
        corpus_arg("P2.proof"),
        "--pred".into(),
        "NEXT".into(),
        "--input".into(),
        "2".into(),
        "--start".into(),
        corpus_arg("s2.state"),
        "--trace".into(),
        trace.display().to_string(),
    ];
    let (code, out, err) = run_cli(&args);
    assert_eq!((code, out.as_str()), (0, "3\n"), "{err}");
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.lines().all(|l| l.contains("\"warm_start\":true")), "{text}");
}

#[test]
fn extract_writes_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("p1.term");
    let args: Vec<String> = vec!["extract".into(), corpus_arg("P1.proof"), "-o".into(), target.display().to_string()];
    let (code, out, _) = run_cli(&args);
    assert_eq!(code, 0);
    assert_eq!(out, "\\a:N. (S a, empty)\n");
    assert_eq!(std::fs::read_to_string(&target).unwrap(), out);
}

#[test]
fn no_prelude_and_extra_defs() {
    let (code, _, err) = run_cli(&["--no-prelude".into(), "normalize".into(), corpus_arg("plus.term")]);
    assert_eq!(code, 1, "{err}");
    let dir = tempfile::tempdir().unwrap();
    let defs = dir.path().join("double.defs");
    std::fs::write(&defs, "def double : N -> N = \\n:N. plus n n;\n").unwrap();
    let term = dir.path().join("d.txt");
    std::fs::write(&term, "double 21").unwrap();
    let args: Vec<String> = vec![
        "--defs".into(),
        defs.display().to_string(),
        "--kind".into(),
        "term".into(),
        "normalize".into(),
        term.display().to_string(),
    ];
    let (code, out, err) = run_cli(&args);
    assert_eq!((code, out.as_str()), (0, "42\n"), "{err}");
}

#[test]
fn unknown_extension_needs_kind() {
    let dir = tempfile::tempdir().unwrap();
    let term = dir.path().join("plus.txt");
    std::fs::write(&term, "plus 1 1").unwrap();
    let (code, _, err) = run_cli(&["normalize".into(), term.display().to_string()]);
    assert_eq!(code, 2);
    assert!(err.contains("--kind"), "{err}");
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = run_cli(&["--help".into()]);
    assert_eq!(code, 0);
    assert!(out.contains("witness"));
}
