//! Run statistics, computed in one pass over trace records.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::breakdown::event_is;
use crate::simenv::{RecordKind, TraceRecord};
use crate::trg::types;

/// A return to the previous access within this window counts as ping-pong.
pub const PING_PONG_WINDOW_MS: u64 = 10_000;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub handovers_attempted: u64,
    pub handovers_completed: u64,
    pub handovers_failed: u64,
    pub ping_pong: u64,
    /// Time each flow spent unserved while some access was feasible, ms.
    pub service_gap_ms: BTreeMap<String, u64>,
    pub service_gap_total_ms: u64,
    pub scans_targeted: u64,
    pub scans_full: u64,
    pub energy: f64,
    pub trigger_deliveries: u64,
    pub events_published: u64,
    pub end_ms: u64,
}

#[derive(Default)]
struct FlowTrack {
    gap_since: Option<u64>,
    gap: u64,
    last: Option<(String, String, u64)>,
}

pub fn compute_stats(records: &[TraceRecord]) -> RunStats {
    let mut s = RunStats::default();
    let mut flows: BTreeMap<String, FlowTrack> = BTreeMap::new();
    let mut requests: BTreeMap<String, (String, String)> = BTreeMap::new();
    for r in records {
        s.end_ms = s.end_ms.max(r.at.0);
        match r.kind {
            RecordKind::Delivery => s.trigger_deliveries += 1,
            RecordKind::Event => {
                s.events_published += 1;
                if event_is(r, types::HANDOVER_EXECUTION_REQUEST) {
                    s.handovers_attempted += 1;
                    if let Some(id) = r.text("p.handover") {
                        let from = r.text("p.from").unwrap_or_default().to_string();
                        let to = r.text("p.to").unwrap_or_default().to_string();
                        requests.insert(id.to_string(), (from, to));
                    }
                } else if event_is(r, types::HANDOVER_FAILED) {
                    s.handovers_failed += 1;
                } else if event_is(r, types::HANDOVER_COMPLETE) {
                    s.handovers_completed += 1;
                    let (Some(id), Some(flow)) = (r.text("p.handover"), r.text("p.flow")) else { continue };
                    let Some((from, to)) = requests.get(id).cloned() else { continue };
                    let t = flows.entry(flow.to_string()).or_default();
                    if let Some((pf, pt, at)) = &t.last {
                        if *pf == to && *pt == from && r.at.0 - at <= PING_PONG_WINDOW_MS {
                            s.ping_pong += 1;
                        }
                    }
                    t.last = Some((from, to, r.at.0));
                } else if event_is(r, types::SCAN_COMPLETE) {
                    match r.text("p.mode") {
                        Some("targeted") => s.scans_targeted += 1,
                        Some("full") => s.scans_full += 1,
                        _ => {}
                    }
                    s.energy += r.num("p.energy").unwrap_or(0.0);
                }
            }
            RecordKind::Status if r.component == "mrrm" => {
                let Some(flow) = r.text("flow") else { continue };
                let t = flows.entry(flow.to_string()).or_default();
                let gap_now = r.flag("connected") == Some(false)
                    && r.flag("feasible") == Some(true)
                    && r.flag("departed") != Some(true);
                match (t.gap_since, gap_now) {
                    (None, true) => t.gap_since = Some(r.at.0),
                    (Some(since), false) => {
                        t.gap += r.at.0 - since;
                        t.gap_since = None;
                    }
                    _ => {}
                }
            }
            _ => {}
        }
    }
    for (id, t) in flows {
        let gap = t.gap + t.gap_since.map_or(0, |since| s.end_ms - since);
        s.service_gap_total_ms += gap;
        s.service_gap_ms.insert(id, gap);
    }
    s
}
