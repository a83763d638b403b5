use rico_gateway::runner::WALL_CLOCK_FIELDS;
use std::path::PathBuf;
use std::process::{Command, Output};

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn rico(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rico")).args(args).output().expect("binary runs")
}

fn config(name: &str) -> String {
    configs().join(name).display().to_string()
}

fn metrics(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not metrics JSON ({e}): {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn strip_wall_clock(mut v: serde_json::Value) -> serde_json::Value {
    for f in WALL_CLOCK_FIELDS {
        v.as_object_mut().unwrap().remove(*f);
    }
    v
}

#[test]
fn same_seed_same_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let run = |i: usize| {
        let m = dir.path().join(format!("m{i}.json"));
        let ev = dir.path().join(format!("e{i}.jsonl"));
        let out = rico(&[
            "--config", &config("patrol_hot.toml"), "--scenario", "patrol", "--seed", "42",
            "--metrics", m.to_str().unwrap(), "--events", ev.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&m).unwrap()).unwrap();
        let mut v = strip_wall_clock(v);
        v.as_object_mut().unwrap().remove("event_log");
        (v, std::fs::read(&ev).unwrap())
    };
    let (m1, e1) = run(1);
    let (m2, e2) = run(2);
    assert_eq!(m1, m2);
    assert_eq!(e1, e2);
    assert_eq!(m1["hazard_reported"], true);
    assert_eq!(m1["status"], "success");
    assert!(m1["sim_time"].as_f64().unwrap() <= 300.0);
}

#[test]
fn transport_fixtures_meet_expectations() {
    for (file, status) in [
        ("transport_centered.toml", "success"),
        ("transport_edge.toml", "anomaly"),
        ("transport_light.toml", "anomaly"),
    ] {
        let out = rico(&["--config", &config(file), "--scenario", "transport"]);
        assert_eq!(out.status.code(), Some(0), "{file}");
        let m = metrics(&out);
        assert_eq!(m["status"], status, "{file}");
        assert_eq!(m["expected"], status, "{file}");
    }
}

#[test]
fn missed_expectation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("transport_centered.toml"))
        .unwrap()
        .replace("expect = \"success\"", "expect = \"anomaly\"");
    let path = dir.path().join("wrong.toml");
    std::fs::write(&path, text).unwrap();
    let out = rico(&["--config", path.to_str().unwrap(), "--scenario", "transport"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(metrics(&out)["status"], "success");
}

#[test]
fn comprehension_trials() {
    let out = rico(&["--config", &config("comprehension.toml"), "--scenario", "comprehension", "--trials", "200"]);
    assert!(out.status.success());
    let m = metrics(&out);
    let rate = m["comprehension"]["success_rate"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&rate));
    assert_eq!(m["comprehension"]["trials"], 200);
}

#[test]
fn missing_config_names_the_path() {
    let out = rico(&["--config", "/nonexistent/rico.toml", "--scenario", "patrol"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/nonexistent/rico.toml"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_config_points_at_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[world]\nbounds = [0.0, 0.0, 8.0, 6.0]\nseed = \"seven\"\n").unwrap();
    let out = rico(&["--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn unknown_scenario_is_a_usage_error() {
    let out = rico(&["--config", &config("room.toml"), "--scenario", "juggle"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn realtime_and_fast_conflict() {
    let out = rico(&["--config", &config("room.toml"), "--serve", "127.0.0.1:0", "--realtime", "--fast"]);
    assert_eq!(out.status.code(), Some(2));
}
