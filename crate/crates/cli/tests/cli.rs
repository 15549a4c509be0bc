//! End-to-end runs of the installed binary: gen -> render -> solve -> eval
//! -> report, plus the planner exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_stacksolve")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "stacksolve {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

#[test]
fn full_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.jsonl");
    let data_s = data.to_str().unwrap();

    ok(&["gen", "--seed", "7", "--count", "3", "--out", data_s]);
    let text = std::fs::read_to_string(&data).unwrap();
    assert_eq!(text.lines().count(), 9);

    // regeneration is byte-identical
    let data2 = dir.path().join("data2.jsonl");
    ok(&["gen", "--seed", "7", "--count", "3", "--out", data2.to_str().unwrap()]);
    assert_eq!(std::fs::read(&data).unwrap(), std::fs::read(&data2).unwrap());

    let nl_dir = dir.path().join("nl");
    ok(&["render", "--in", data_s, "--format", "nl", "--outdir", nl_dir.to_str().unwrap()]);
    assert_eq!(std::fs::read_dir(&nl_dir).unwrap().count(), 9);

    let pddl_dir = dir.path().join("pddl");
    ok(&["render", "--in", data_s, "--format", "pddl", "--outdir", pddl_dir.to_str().unwrap()]);
    assert!(pddl_dir.join("domain.pddl").exists());
    assert!(pddl_dir.join("7-0-initial.pddl").exists());

    let plan = dir.path().join("7-0-initial.plan");
    ok(&[
        "solve",
        "--problem",
        pddl_dir.join("7-0-initial.pddl").to_str().unwrap(),
        "--out",
        plan.to_str().unwrap(),
    ]);
    assert!(plan.exists());

    let results = dir.path().join("results.jsonl");
    ok(&[
        "eval",
        "--in",
        data_s,
        "--method",
        "ps-grammar",
        "--out",
        results.to_str().unwrap(),
    ]);
    let report_dir = dir.path().join("report");
    ok(&[
        "report",
        "--in",
        results.to_str().unwrap(),
        "--out",
        report_dir.to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(report_dir.join("results.csv")).unwrap();
    assert!(csv.contains("ps-grammar,initial,3,3,1.0000"));
    assert!(report_dir.join("report.md").exists());
}

#[test]
fn replay_eval_against_pinned_transcripts() {
    let dir = tempfile::tempdir().unwrap();
    let results = dir.path().join("results.jsonl");
    ok(&[
        "eval",
        "--in",
        fixture("pilot.jsonl").to_str().unwrap(),
        "--method",
        "llm-planner",
        "--transport",
        "replay",
        "--transcript",
        fixture("transcripts.jsonl").to_str().unwrap(),
        "--out",
        results.to_str().unwrap(),
    ]);
    let report_dir = dir.path().join("report");
    ok(&[
        "report",
        "--in",
        results.to_str().unwrap(),
        "--out",
        report_dir.to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(report_dir.join("results.csv")).unwrap();
    assert!(csv.contains("llm-planner,many-constraints,10,0,0.0000"));
}

#[test]
fn solve_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.plan");
    let problem = dir.path().join("u.pddl");
    // mutually unsatisfiable goal atoms: covered and clear at once
    std::fs::write(
        &problem,
        "(define (problem u)\n  (:domain stacking)\n  (:objects plate mug)\n  (:init (on-table plate) (on-table mug))\n  (:goal (and (on mug plate) (clear plate))))\n",
    )
    .unwrap();
    let output = run(&["solve", "--problem", problem.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(10));
    assert!(!out.exists());

    let missing = run(&["solve", "--problem", "/nonexistent.pddl", "--out", out.to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn eval_requires_transcript_for_replay() {
    let out = run(&[
        "eval",
        "--in",
        fixture("pilot.jsonl").to_str().unwrap(),
        "--method",
        "ps-llm",
        "--out",
        "/tmp/never-written.jsonl",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--transcript"));
}
