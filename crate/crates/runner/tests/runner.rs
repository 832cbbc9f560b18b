use std::fs;
use std::path::Path;
use std::process::Command;

use emfield_runner::config::RunConfig;
use emfield_runner::{parse_config, run_tasks, RunOptions, Task, TaskStatus};

const SMALL: &str = r#"
tasks = ["decompose", "frontcheck", "compare"]

[source]
sigma = 0.01

[observation]
direction = [1.0, 0.5, 0.25]
radii = [0.4, 0.7]
times = { start = 0.6, stop = 2.7, count = 8 }

[quadrature]
base_order = 16
max_order = 22
"#;

fn run(text: &str, dir: &Path, threads: usize) -> emfield_runner::RunOutcome {
    let config = parse_config(text).unwrap();
    run_tasks(
        &config,
        &RunOptions {
            threads: Some(threads),
            output_dir: Some(dir.to_path_buf()),
        },
    )
    .unwrap()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap()
}

#[test]
fn small_run_produces_referenced_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(SMALL, dir.path(), 2);
    let report = &out.report;
    assert_eq!(report.tasks.len(), 3);
    assert!(!report.has_errors());
    for a in &report.artifacts {
        assert!(dir.path().join(a).is_file(), "{a}");
    }
    for name in ["waveforms_budko.csv", "waveforms_jefimenko.csv", "residuals.csv", "timings.json"] {
        assert!(report.artifacts.iter().any(|a| a == name), "{name}");
    }
    let csv = String::from_utf8(read(dir.path(), "waveforms_jefimenko.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 8);

    let fc = report.task(Task::Frontcheck).unwrap().front_check.as_ref().unwrap();
    assert!(fc.pass);
    let rs = report.task(Task::Compare).unwrap().residual_summary.as_ref().unwrap();
    assert!(rs.max < 1e-6, "{rs:?}");
    assert_eq!(rs.cells, 16);
}

#[test]
fn report_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    run(SMALL, dir.path(), 1);
    let json: serde_json::Value = serde_json::from_slice(&read(dir.path(), "report.json")).unwrap();
    let echoed: RunConfig = serde_json::from_value(json["config"].clone()).unwrap();
    assert_eq!(parse_config(&echoed.to_toml()).unwrap(), parse_config(SMALL).unwrap());
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(SMALL, a.path(), 1);
    run(SMALL, b.path(), 1);
    run(SMALL, c.path(), 4);
    for name in ["waveforms_budko.csv", "waveforms_jefimenko.csv", "residuals.csv", "report.json"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name} rerun");
        assert_eq!(read(a.path(), name), read(c.path(), name), "{name} threads");
    }
}

#[test]
fn empty_task_list_gives_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("[source]\nsigma = 0.01\n", dir.path(), 1);
    assert!(out.report.tasks.is_empty());
    assert!(!out.report.has_errors());
}

#[test]
fn failing_task_is_recorded_and_later_tasks_run() {
    // Nothing reaches r = 1 before t = 0.5, so no zero crossing exists in the window.
    let text = r#"
tasks = ["velocity", "frontcheck"]
[source]
sigma = 0.01
[observation]
radii = [1.0, 2.0]
times = { start = 0.0, stop = 0.5, count = 26 }
[quadrature]
base_order = 6
[analysis]
feature = "zero_crossing"
"#;
    let dir = tempfile::tempdir().unwrap();
    let out = run(text, dir.path(), 1);
    let v = out.report.task(Task::Velocity).unwrap();
    assert_eq!(v.status, Some(TaskStatus::Error));
    assert!(v.error.as_ref().unwrap().contains("velocity"));
    assert_eq!(out.report.task(Task::Frontcheck).unwrap().status, Some(TaskStatus::Ok));
    assert!(out.report.has_errors());
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_emfield")).args(args).output().unwrap()
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_string_lossy().into_owned();

    fs::write(path("bad.toml"), "[source]\nsigma = 0.01\npolarization = [0.0, 0.0, 2.0]\n").unwrap();
    let out = cli(&["run", &path("bad.toml")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("polarization must be unit"));

    assert_eq!(cli(&["run", &path("missing.toml")]).status.code(), Some(1));
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(1));

    fs::write(path("ok.toml"), "tasks = [\"frontcheck\"]\n[source]\nsigma = 0.01\n").unwrap();
    let out = cli(&["run", &path("ok.toml"), "--validate-only"]);
    assert_eq!(out.status.code(), Some(0));
    let echoed = String::from_utf8(out.stdout).unwrap();
    assert_eq!(parse_config(&echoed).unwrap(), parse_config("tasks = [\"frontcheck\"]\n[source]\nsigma = 0.01\n").unwrap());

    let failing = "tasks = [\"scaling\"]\n[source]\nsigma = 0.01\n[observation]\nradii = [1.0, 2.0]\ntimes = { start = 0.0, stop = 1.0, count = 3 }\n[quadrature]\nbase_order = 4\n";
    fs::write(path("fail.toml"), failing).unwrap();
    let out = cli(&["run", &path("fail.toml"), "--output-dir", &path("out"), "--threads", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(dir.path().join("out/report.json").is_file());
}

#[test]
fn frozen_negative_velocity_config_parses() {
    let text = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/negative_velocity.cfg")).unwrap();
    let c = parse_config(&text).unwrap();
    assert!(c.warnings().is_empty());
    assert_eq!(c.tasks, vec![Task::Velocity, Task::Frontcheck]);
}
