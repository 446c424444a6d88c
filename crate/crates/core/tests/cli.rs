use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ztedge(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ztedge"))
        .args(args)
        .current_dir(cwd)
        .env_remove("ZTEDGE_CONFIG")
        .output()
        .expect("spawn ztedge")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn gen_then_replay_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = ztedge(&["run", "--scenarios", "6", "--emit-verdicts", "--out", "a", "--format", "csv"], d);
    assert!(run.status.success(), "{}", stderr(&run));
    let gen = ztedge(&["gen", "--scenario", "6", "--out", "t/s6.jsonl"], d);
    assert!(gen.status.success(), "{}", stderr(&gen));
    let replay = ztedge(&["replay", "--trace", "t/s6.jsonl", "--scenario", "6", "--out", "b", "--format", "csv"], d);
    assert!(replay.status.success(), "{}", stderr(&replay));

    assert_eq!(fs::read(d.join("a/scenario_06.verdicts.jsonl")).unwrap(), fs::read(d.join("b/verdicts.jsonl")).unwrap());
    assert_eq!(fs::read(d.join("a/report.json")).unwrap(), fs::read(d.join("b/report.json")).unwrap());
    assert_eq!(run.stdout, replay.stdout);
    let csv = String::from_utf8(run.stdout).unwrap();
    assert!(csv.starts_with("scenario,accuracy,precision,recall,f1\n6,"));
}

#[test]
fn verdict_lines_have_the_documented_shape() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(ztedge(&["run", "--scenarios", "4", "--emit-verdicts", "--emit-trace", "--out", "o"], d).status.success());
    let verdicts = fs::read_to_string(d.join("o/scenario_04.verdicts.jsonl")).unwrap();
    let traces = fs::read_to_string(d.join("o/scenario_04.trace.jsonl")).unwrap();
    assert_eq!(verdicts.lines().count(), traces.lines().count());
    let drop = verdicts.lines().find(|l| l.contains("\"drop\"")).unwrap();
    let v: serde_json::Value = serde_json::from_str(drop).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["action", "reason", "stage", "ts_ns"]);
    assert_eq!(v["stage"], "ext_spoof");
    assert_eq!(v["reason"], "hl_out_of_band");
}

#[test]
fn malformed_line_is_reported_with_its_number() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(ztedge(&["gen", "--scenario", "3", "--out", "t.jsonl"], d).status.success());
    let text = fs::read_to_string(d.join("t.jsonl")).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines[6] = r#"{"ts_ns":1,"port":3,"src":"fd00::zz","dst":"::1","hl":64,"l4":{"kind":"other"}}"#;
    fs::write(d.join("bad.jsonl"), lines.join("\n")).unwrap();
    let out = ztedge(&["replay", "--trace", "bad.jsonl"], d);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("line 7"), "{err}");
    assert!(err.contains("src"), "{err}");
    assert!(!d.join("out/verdicts.jsonl").exists());
}

#[test]
fn unlabeled_trace_yields_verdicts_only() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(ztedge(&["gen", "--scenario", "1", "--out", "t.jsonl"], d).status.success());
    let text = fs::read_to_string(d.join("t.jsonl")).unwrap();
    let stripped: String = text
        .lines()
        .map(|l| {
            let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
            v.as_object_mut().unwrap().remove("truth");
            v.to_string() + "\n"
        })
        .collect();
    fs::write(d.join("u.jsonl"), stripped).unwrap();
    let out = ztedge(&["replay", "--trace", "u.jsonl", "--out", "r"], d);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(fs::read_to_string(d.join("r/verdicts.jsonl")).unwrap().lines().count(), text.lines().count());
    assert!(!d.join("r/report.json").exists());
    assert!(out.stdout.is_empty());
}

#[test]
fn config_and_argument_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(ztedge(&["gen", "--scenario", "16"], d).status.code(), Some(2));
    assert_eq!(ztedge(&["run", "--scenarios", "0"], d).status.code(), Some(2));
    assert_eq!(ztedge(&["--config", "missing.toml", "run"], d).status.code(), Some(2));
    fs::write(d.join("bad.toml"), "[thresholds]\ntheta_u = 3\ntheta_m = 3\n").unwrap();
    let out = ztedge(&["--config", "bad.toml", "run"], d);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("theta_m"), "{}", stderr(&out));
    assert_eq!(ztedge(&["replay", "--trace", "nope.jsonl"], d).status.code(), Some(3));
    assert_eq!(ztedge(&["bogus"], d).status.code(), Some(2));
}

#[test]
fn config_file_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("c.toml"), "scenarios = [2]\n[traffic]\nduration_windows = 2\n[output]\ndir = \"envout\"\nformat = \"json\"\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ztedge"))
        .arg("run")
        .current_dir(d)
        .env("ZTEDGE_CONFIG", "c.toml")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let reports: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 1);
    assert_eq!(reports[0]["scenario"], 2);
    assert!(d.join("envout/report.csv").exists());
}

#[test]
fn empty_config_runs_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("empty.toml"), "").unwrap();
    let with = ztedge(&["--config", "empty.toml", "run", "--scenarios", "3", "--out", "x"], d);
    let without = ztedge(&["run", "--scenarios", "3", "--out", "y"], d);
    assert!(with.status.success());
    assert_eq!(with.stdout, without.stdout);
    assert_eq!(fs::read(d.join("x/report.json")).unwrap(), fs::read(d.join("y/report.json")).unwrap());
}
