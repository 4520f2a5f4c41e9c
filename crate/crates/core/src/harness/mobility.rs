//! Stand-in for the network-layer mobility protocol: turns a handover
//! execution request into five timed trace points and a completion.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::simenv::{Ctx, Handle, RecordKind, Wakeup};
use crate::trg::{types, Event, Trigger};

pub const MOBILITY_CONSUMER: &str = "mobility";

/// Fixed per-trace-point delays: (1) event capture and address
/// configuration, (2) trigger processing, (3) trigger production and
/// delivery, (4) mobility protocol trigger handling, (5) update signaling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MobilityDelayModel {
    pub delays_ms: [u64; 5],
}

impl MobilityDelayModel {
    pub fn total(&self) -> u64 {
        self.delays_ms.iter().sum()
    }
}

#[derive(Debug)]
struct InFlight {
    flow: String,
    from: String,
    to: String,
    handles: Vec<Handle>,
}

pub struct MobilityExecutor {
    model: MobilityDelayModel,
    jitter_ms: u64,
    inflight: BTreeMap<String, InFlight>,
}

impl MobilityExecutor {
    pub fn new(model: MobilityDelayModel, jitter_ms: u64) -> Self {
        MobilityExecutor {
            model,
            jitter_ms,
            inflight: BTreeMap::new(),
        }
    }

    pub fn model(&self) -> &MobilityDelayModel {
        &self.model
    }

    pub fn in_flight(&self) -> usize {
        self.inflight.len()
    }

    pub fn on_trigger(&mut self, t: &Trigger, ctx: &mut Ctx) {
        if t.is(types::HANDOVER_EXECUTION_REQUEST) {
            self.execute(t, ctx);
        } else if t.is(types::LINK_DOWN) || t.is(types::ACCESS_LOST) {
            let Some(cell) = t.text("cell") else { return };
            let lost: Vec<String> = self
                .inflight
                .iter()
                .filter(|(_, h)| h.to == cell)
                .map(|(id, _)| id.clone())
                .collect();
            for id in lost {
                let h = self.inflight.remove(&id).expect("listed above");
                for handle in h.handles {
                    ctx.cancel(handle);
                }
                ctx.publish(
                    Event::new(types::HANDOVER_FAILED, MOBILITY_CONSUMER)
                        .with("handover", id.as_str())
                        .with("flow", h.flow)
                        .with("from", h.from)
                        .with("to", h.to)
                        .with("reason", "target-lost"),
                );
            }
        }
    }

    fn execute(&mut self, t: &Trigger, ctx: &mut Ctx) {
        let (Some(id), Some(flow), Some(to)) = (t.text("handover"), t.text("flow"), t.text("to")) else {
            return;
        };
        let mut offset = 0;
        let mut handles = Vec::with_capacity(5);
        for (i, d) in self.model.delays_ms.iter().enumerate() {
            let jitter = if self.jitter_ms > 0 {
                ctx.rng.gen_range(0..=self.jitter_ms)
            } else {
                0
            };
            offset += d + jitter;
            handles.push(ctx.schedule_in(
                offset,
                Wakeup::TracePoint {
                    handover: id.to_string(),
                    point: i as u8 + 1,
                },
            ));
        }
        self.inflight.insert(
            id.to_string(),
            InFlight {
                flow: flow.to_string(),
                from: t.text("from").unwrap_or_default().to_string(),
                to: to.to_string(),
                handles,
            },
        );
    }

    pub fn on_trace_point(&mut self, handover: &str, point: u8, ctx: &mut Ctx) {
        let Some(h) = self.inflight.get(handover) else { return };
        let rec = ctx
            .note(MOBILITY_CONSUMER, RecordKind::TracePoint)
            .with("handover", handover)
            .with("point", point as u64)
            .with("flow", h.flow.as_str());
        ctx.record(rec);
        if point as usize == self.model.delays_ms.len() {
            let h = self.inflight.remove(handover).expect("checked above");
            ctx.publish(
                Event::new(types::HANDOVER_COMPLETE, MOBILITY_CONSUMER)
                    .with("handover", handover)
                    .with("flow", h.flow)
                    .with("from", h.from)
                    .with("to", h.to),
            );
        }
    }
}
