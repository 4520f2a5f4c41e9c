mod common;

use std::collections::BTreeMap;

use multiaccess::harness::{compute_stats, report_breakdown, run_scenario, RunOutput};
use multiaccess::mrrm::HandoverSemantics;
use multiaccess::simenv::{parse_line, ScenarioAction, TraceRecord};
use multiaccess::trg::Value;

use common::*;

fn text<'a>(r: &'a TraceRecord, key: &str) -> Option<&'a str> {
    r.attrs.get(key).and_then(|v| v.as_str())
}

fn action(at: u64, kind: &str, target: &str, params: &[(&str, Value)]) -> ScenarioAction {
    ScenarioAction {
        at: multiaccess::simenv::SimTime(at),
        kind: kind.into(),
        target: target.into(),
        params: params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
    }
}

fn position(out: &RunOutput, pred: impl Fn(&TraceRecord) -> bool) -> Option<usize> {
    out.trace.records().iter().position(pred)
}

#[test]
fn breakdown_total_is_sum_and_request_to_completion() {
    for name in SHIPPED {
        let out = run(name);
        let completes: BTreeMap<&str, u64> = events(&out, "handover-complete")
            .map(|r| (text(r, "p.handover").unwrap(), r.at.0))
            .collect();
        assert_eq!(out.breakdown.len(), completes.len(), "{name}");
        for b in &out.breakdown {
            assert_eq!(b.total_ms, b.points_ms.iter().sum::<u64>(), "{name}");
            assert_eq!(b.total_ms, completes[b.handover.as_str()] - b.requested_at, "{name}");
        }
    }
}

#[test]
fn trace_replay_gives_identical_stats_and_breakdown() {
    for name in SHIPPED {
        let out = run(name);
        let text = out.trace.render();
        let parsed: Vec<TraceRecord> = text.lines().map(|l| parse_line(l).expect("parsable line")).collect();
        assert_eq!(parsed.len(), out.trace.len(), "{name}");
        assert_eq!(compute_stats(&parsed), out.stats, "{name}");
        assert_eq!(report_breakdown(&parsed), out.breakdown, "{name}");
        assert_eq!(compute_stats(&parsed), compute_stats(&parsed));
    }
}

#[test]
fn trace_time_never_decreases() {
    for name in SHIPPED {
        let out = run(name);
        assert!(out.trace.records().windows(2).all(|w| w[0].at <= w[1].at), "{name}");
    }
}

#[test]
fn accounting_identity_holds_everywhere() {
    for name in SHIPPED {
        let s = run(name).stats;
        assert!(s.handovers_completed + s.handovers_failed <= s.handovers_attempted, "{name}");
    }
}

#[test]
fn make_before_break_attaches_target_before_releasing_source() {
    let out = run("attenuation_sweep");
    let is_event = |ev: &'static str, cell: &'static str| {
        move |r: &TraceRecord| text(r, "event") == Some(ev) && text(r, "p.cell") == Some(cell) && r.kind.as_str() == "event"
    };
    let up = position(&out, is_event("link-up", "umts1")).expect("target attached");
    let complete = position(&out, |r| text(r, "event") == Some("handover-complete")).expect("completed");
    let down = position(&out, is_event("link-down", "wlan1")).expect("source released");
    assert!(up < complete && complete < down);
}

#[test]
fn break_before_make_gap_is_attach_plus_pipeline() {
    let mut sc = shipped("policy_change");
    sc.mobility.semantics = HandoverSemantics::BreakBeforeMake;
    let out = run_scenario(sc).unwrap();
    assert_eq!(out.stats.handovers_completed, 1);
    // Attach latency 50 ms plus the MN pipeline of 3034 ms.
    assert_eq!(out.stats.service_gap_total_ms, 50 + 3034);
    let down = position(&out, |r| text(r, "event") == Some("link-down")).unwrap();
    let up = position(&out, |r| text(r, "event") == Some("link-up")).unwrap();
    assert!(down < up);
}

#[test]
fn forced_failure_is_counted_and_recovered() {
    let out = run("forced_failure");
    let s = &out.stats;
    assert!(s.handovers_failed >= 1);
    assert_eq!(s.handovers_completed + s.handovers_failed, s.handovers_attempted);
    let failed: Vec<_> = events(&out, "handover-failed").collect();
    assert_eq!(text(failed[0], "p.to"), Some("wlan1"));
    assert_eq!(text(failed[0], "p.reason"), Some("target-lost"));
    // The failure lands 100 ms after the request under the MR model.
    let req = events(&out, "handover-execution-request").next().unwrap();
    assert_eq!(failed[0].at.0 - req.at.0, 100);
    assert_eq!(out.breakdown.len(), 1);
    assert_eq!(out.breakdown[0].total_ms, 348);
}

#[test]
fn static_single_has_no_handovers() {
    let out = run("static_single");
    assert_eq!(out.stats.handovers_attempted, 0);
    assert!(out.breakdown.is_empty());
    assert_eq!(out.stats.service_gap_total_ms, 0);
}

#[test]
fn jitter_is_seeded() {
    let mut sc = shipped("table1_mn");
    sc.mobility.jitter_ms = 20;
    let totals: Vec<u64> = (0..6)
        .map(|seed| {
            let mut s = sc.clone();
            s.seed = seed;
            let a = run_scenario(s.clone()).unwrap();
            let b = run_scenario(s).unwrap();
            assert_eq!(a.trace.render(), b.trace.render());
            a.breakdown[0].total_ms
        })
        .collect();
    assert!(totals.iter().all(|t| (3034..=3034 + 5 * 20).contains(t)), "{totals:?}");
    assert!(totals.iter().any(|t| *t != totals[0]), "{totals:?}");
}

#[test]
fn upper_layer_qos_unsatisfied_starts_full_scan() {
    let mut sc = shipped("static_single");
    sc.timeline.push(action(2000, "upper-trigger", "qos-unsatisfied", &[("flow", "web".into())]));
    let out = run_scenario(sc).unwrap();
    assert_eq!(out.stats.scans_full, 1);
    let ev = events(&out, "qos-unsatisfied").next().unwrap();
    assert_eq!(text(ev, "src"), Some("app"));
}

#[test]
fn reporting_interval_change_applies_from_next_tick() {
    let mut sc = shipped("cadence_background");
    sc.timeline.push(action(5000, "upper-trigger", "reporting-interval-change", &[("interval_ms", 200.0.into())]));
    let out = run_scenario(sc).unwrap();
    let times = periodic_batch_times(&out);
    let before: Vec<_> = times.iter().filter(|t| **t <= 5000).copied().collect();
    let after: Vec<_> = times.iter().filter(|t| **t >= 5000).copied().collect();
    assert!(before.windows(2).all(|w| w[1] - w[0] == 500));
    assert!(after.len() > 50);
    assert!(after.windows(2).all(|w| w[1] - w[0] == 200), "{after:?}");
}

#[test]
fn realtime_departure_slows_cadence() {
    let mut sc = shipped("cadence_realtime");
    sc.duration_ms = Some(20_000);
    sc.timeline.push(action(10_000, "flow-departure", "voice", &[]));
    let out = run_scenario(sc).unwrap();
    let times = periodic_batch_times(&out);
    let late: Vec<_> = times.iter().filter(|t| **t >= 10_000).copied().collect();
    assert!(times.iter().filter(|t| **t < 10_000).collect::<Vec<_>>().windows(2).all(|w| w[1] - w[0] == 100));
    assert!(late.windows(2).all(|w| w[1] - w[0] == 500), "{late:?}");
}

#[test]
fn unserved_flow_attaches_to_best_access() {
    let out = run("scan_targeted");
    let up = events(&out, "link-up").next().expect("attached");
    assert_eq!(text(up, "p.cell"), Some("wlan1"));
    // Scan takes 50 ms, attach another 50 ms.
    assert_eq!(up.at.0, 100);
}

#[test]
fn unanswered_policy_check_leaves_flow_unserved() {
    let mut sc = shipped("scan_targeted");
    sc.trg.policy_store.responsive = false;
    let out = run_scenario(sc).unwrap();
    assert_eq!(events(&out, "link-up").count(), 0);
    assert!(out
        .trace
        .records()
        .iter()
        .any(|r| text(r, "what") == Some("policies-check-timeout")));
}

#[test]
fn delayed_policy_answer_defers_attach() {
    let mut sc = shipped("scan_targeted");
    sc.trg.policy_store.answer_delay_ms = 300;
    let out = run_scenario(sc).unwrap();
    let up = events(&out, "link-up").next().expect("attached");
    assert_eq!(up.at.0, 50 + 300 + 50);
}

#[test]
fn flow_departure_releases_the_access() {
    let mut sc = shipped("scan_targeted");
    sc.timeline.push(action(3000, "flow-departure", "f1", &[]));
    let out = run_scenario(sc).unwrap();
    let down = events(&out, "link-down").next().expect("detached");
    assert_eq!(down.at.0, 3000);
    assert_eq!(text(down, "p.reason"), Some("requested"));
}

#[test]
fn policy_change_is_correlated_with_the_handover() {
    let out = run("policy_change");
    let synth: Vec<_> = events(&out, "policy-handover").collect();
    assert_eq!(synth.len(), 1);
    assert_eq!(synth[0].attrs.get("synthetic").and_then(|v| v.as_bool()), Some(true));
    let app = out
        .trace
        .records()
        .iter()
        .filter(|r| r.kind.as_str() == "delivery" && text(r, "consumer") == Some("app"))
        .count();
    assert!(app >= 2);
}

#[test]
fn terminal_mode_hides_load_of_unattached_cells() {
    let load_of = |out: &RunOutput| {
        events(out, "link-quality-report")
            .find(|r| text(r, "p.cell") == Some("umts1"))
            .and_then(|r| r.attrs.get("p.load").and_then(|v| v.as_f64()))
            .unwrap()
    };
    let net = run("attenuation_sweep");
    assert_eq!(load_of(&net), 0.25);
    let mut sc = shipped("attenuation_sweep");
    sc.mrrm_location = multiaccess::simenv::MrrmLocation::Terminal;
    assert_eq!(load_of(&run_scenario(sc).unwrap()), 0.0);
}

#[test]
fn overloaded_target_is_never_chosen() {
    let mut sc = shipped("policy_change");
    sc.mrrm_location = multiaccess::simenv::MrrmLocation::Network;
    let umts = sc.cells.iter_mut().find(|c| c.cell_id == "umts1").unwrap();
    umts.used_resources = 38;
    let out = run_scenario(sc).unwrap();
    assert_eq!(out.stats.handovers_attempted, 0);
    assert!(events(&out, "handover-execution-request").next().is_none());
}
