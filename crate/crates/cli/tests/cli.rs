// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_specforge"))
        .args(args)
        .current_dir(cwd)
        .env_remove("SPECFORGE_MODELS")
        .output()
        .expect("binary runs")
}

fn core_path(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core").join(rel).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn gen_tasks_writes_the_task_set() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["gen-tasks", "-o", "ts"], dir.path());
    assert!(o.status.success(), "{o:?}");
    let jsonl = std::fs::read_to_string(dir.path().join("ts/tasks.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), 47);
    assert!(dir.path().join("ts/impl/sys_set_runnable/correct.c").exists());
}

#[test]
fn guide_toggle_changes_prompt_size() {
    let dir = tempfile::tempdir().unwrap();
    let run = |extra: &[&str]| {
        let mut a = vec!["assemble-prompt", "--task", "call_proc/correct"];
        a.extend_from_slice(extra);
        let o = bin(&a, dir.path());
        assert!(o.status.success(), "{o:?}");
        stdout(&o)
    };
    let with = run(&[]);
    let without = run(&["--no-guide"]);
    assert!(with.contains("# Translation guide"));
    assert!(!without.contains("# Translation guide"));
    assert!(with.len() > without.len());
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = bin(&["verify", &core_path("tests/fixtures/set_runnable.c"), &core_path("tests/fixtures/set_runnable_spec.py")], dir.path());
    assert_eq!(ok.status.code(), Some(0), "{ok:?}");
    assert!(stdout(&ok).starts_with("Verified"));
    let bad = bin(&["verify", &core_path("tests/fixtures/set_runnable_no_ppid.c"), &core_path("tests/fixtures/set_runnable_spec.py"), "--backend", "diff"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).starts_with("Counterexample"));
    let faulted = bin(&["verify", &core_path("tests/fixtures/set_runnable.c"), &core_path("tests/fixtures/slt_set_runnable.py")], dir.path());
    assert_eq!(faulted.status.code(), Some(1));
    assert!(stdout(&faulted).contains("ApiReferenceError"));
}

#[test]
fn lint_clean_and_dirty() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(bin(&["lint", &core_path("tests/fixtures/set_runnable_spec.py")], dir.path()).status.code(), Some(0));
    assert_eq!(bin(&["lint", &core_path("tests/fixtures/slt_set_runnable.py")], dir.path()).status.code(), Some(1));
}

#[test]
fn mock_run_report_and_diff() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["run", "--model", "echo-oracle", "--method", "bodhi", "--limit", "3", "-o", "a"], dir.path());
    assert!(o.status.success(), "{o:?}");
    for f in ["manifest.json", "report.json", "report.md", "report.csv", "timings.jsonl"] {
        assert!(dir.path().join("a").join(f).exists(), "{f}");
    }
    let md = bin(&["report", "a"], dir.path());
    assert!(stdout(&md).lines().any(|l| l.starts_with("| bodhi |") && l.contains("100.00")), "{}", stdout(&md));
    let csv = bin(&["report", "a", "--format", "csv"], dir.path());
    assert!(stdout(&csv).starts_with("scope,name,total"));

    let schedule = core_path("data/schedules/fault_mix.jsonl");
    let o = bin(&["run", "--model", "scripted", "--mock", &schedule, "--method", "baseline", "--limit", "3", "-o", "b"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let d = bin(&["diff", "a", "b", "--json"], dir.path());
    assert!(d.status.success(), "{d:?}");
    let v: serde_json::Value = serde_json::from_slice(&d.stdout).unwrap();
    assert!(v.is_object());
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["run", "--model", "no-such-model", "--limit", "1"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{o:?}");
    assert_eq!(bin(&["run"], dir.path()).status.code(), Some(2));
    let o = bin(&["run", "--model", "echo-oracle", "--method", "guided"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
