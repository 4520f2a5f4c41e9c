mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::scenario_path;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multiaccess"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_into(name: &str, dir: &Path) -> Output {
    let path = scenario_path(name);
    cli(&["run", path.to_str().unwrap(), "--out", dir.to_str().unwrap()])
}

#[test]
fn run_twice_gives_byte_identical_traces() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for name in ["table1_mn", "attenuation_sweep", "policy_change"] {
        assert!(run_into(name, &a).status.success());
        assert!(run_into(name, &b).status.success());
        let ta = std::fs::read(a.join("trace.txt")).unwrap();
        let tb = std::fs::read(b.join("trace.txt")).unwrap();
        assert!(!ta.is_empty());
        assert_eq!(ta, tb, "{name}");
    }
}

#[test]
fn report_and_stats_read_back_the_trace() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run_into("table1_mr", tmp.path()).status.success());
    let trace = tmp.path().join("trace.txt");
    let report = cli(&["report", trace.to_str().unwrap()]);
    assert!(report.status.success());
    let v: serde_json::Value = serde_json::from_slice(&report.stdout).unwrap();
    assert_eq!(v[0]["points_ms"], serde_json::json!([10, 1, 19, 16, 302]));
    assert_eq!(v[0]["total_ms"], 348);
    let stats = cli(&["stats", trace.to_str().unwrap()]);
    assert!(stats.status.success());
    assert_eq!(stats.stdout, std::fs::read(tmp.path().join("stats.json")).unwrap());
}

#[test]
fn report_of_trace_without_handovers_is_empty() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run_into("static_single", tmp.path()).status.success());
    let out = cli(&["report", tmp.path().join("trace.txt").to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v, serde_json::json!([]));
}

#[test]
fn malformed_scenario_exits_2_naming_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario_path("static_single")).unwrap();
    let bad = tmp.path().join("bad.scenario");
    std::fs::write(&bad, text.replace("\"total_resources\"", "\"total_resource\"")).unwrap();
    let out = cli(&["run", bad.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("cells[0]") && err.contains("total_resource"), "{err}");
}

#[test]
fn dangling_timeline_target_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario_path("static_single")).unwrap();
    let bad = tmp.path().join("bad.scenario");
    std::fs::write(&bad, text.replace("\"target\": \"wlan1\"", "\"target\": \"wlan9\"")).unwrap();
    let out = cli(&["run", bad.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("timeline[0].target"));
}

#[test]
fn unreadable_trace_fails() {
    let out = cli(&["stats", "/nonexistent/trace.txt"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bench_degenerate_sizes_are_well_formed() {
    for (subs, events) in [("1", "1"), ("0", "1000")] {
        let out = cli(&["bench-trg", "--subscribers", subs, "--events", events]);
        assert!(out.status.success());
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["events"].as_u64().unwrap().to_string(), events);
        assert!(v["median_ms"].as_f64().unwrap() >= 0.0);
        if subs == "0" {
            assert_eq!(v["deliveries"], 0);
        }
    }
}

#[test]
fn runaway_correlation_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario_path("static_single")).unwrap();
    let looping = text.replace(
        "\"cells\"",
        "\"trg\": {\"correlations\": [{\"rule_id\": \"loop\", \"pattern\": [\"link-quality-report\", \"echo\"], \
         \"window_ms\": 1000, \"output_type\": \"echo\", \"reset_on_fire\": false}]},\n  \"cells\"",
    )
    .replace(
        "\"timeline\": [",
        "\"timeline\": [\n    {\"at\": 1000, \"kind\": \"upper-trigger\", \"target\": \"echo\"},",
    );
    let path = tmp.path().join("loop.scenario");
    std::fs::write(&path, looping).unwrap();
    let out = cli(&["run", path.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cascade"));
}
