//! Per-handover timing breakdown recovered from a trace.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::simenv::{RecordKind, TraceRecord};
use crate::trg::types;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BreakdownReport {
    pub handover: String,
    pub flow: String,
    pub requested_at: u64,
    /// Duration of each trace point, ms.
    pub points_ms: [u64; 5],
    pub total_ms: u64,
}

#[derive(Default)]
struct Partial {
    flow: String,
    requested_at: Option<u64>,
    points: BTreeMap<u64, u64>,
    completed_at: Option<u64>,
}

pub(crate) fn event_is(r: &TraceRecord, event_type: &str) -> bool {
    r.kind == RecordKind::Event && r.text("event") == Some(event_type)
}

/// Breakdowns of every completed handover, in request order. Handovers
/// that failed or are missing trace points are left out.
pub fn report_breakdown(records: &[TraceRecord]) -> Vec<BreakdownReport> {
    let mut parts: BTreeMap<String, Partial> = BTreeMap::new();
    let mut order = Vec::new();
    for r in records {
        if event_is(r, types::HANDOVER_EXECUTION_REQUEST) {
            let Some(id) = r.text("p.handover") else { continue };
            order.push(id.to_string());
            let p = parts.entry(id.to_string()).or_default();
            p.requested_at = Some(r.at.0);
            p.flow = r.text("p.flow").unwrap_or_default().to_string();
        } else if r.kind == RecordKind::TracePoint {
            let (Some(id), Some(point)) = (r.text("handover"), r.num("point")) else { continue };
            parts.entry(id.to_string()).or_default().points.insert(point as u64, r.at.0);
        } else if event_is(r, types::HANDOVER_COMPLETE) {
            let Some(id) = r.text("p.handover") else { continue };
            parts.entry(id.to_string()).or_default().completed_at = Some(r.at.0);
        }
    }
    order
        .into_iter()
        .filter_map(|id| {
            let p = parts.get(&id)?;
            let start = p.requested_at?;
            p.completed_at?;
            let mut points_ms = [0u64; 5];
            let mut prev = start;
            for (k, slot) in points_ms.iter_mut().enumerate() {
                let at = *p.points.get(&(k as u64 + 1))?;
                *slot = at - prev;
                prev = at;
            }
            Some(BreakdownReport {
                handover: id,
                flow: p.flow.clone(),
                requested_at: start,
                points_ms,
                total_ms: points_ms.iter().sum(),
            })
        })
        .collect()
}
