use std::collections::VecDeque;

use rand_chacha::ChaCha8Rng;

use super::{CellField, Handle, RecordKind, Scheduler, SimTime, Trace, TraceRecord};
use crate::trg::Event;

/// Deferred work on the run's event loop.
#[derive(Clone, Debug, PartialEq)]
pub enum Wakeup {
    /// Index into the scenario timeline.
    Action(usize),
    RampPoint { cell: String, field: CellField, value: f64 },
    GllTick { generation: u64 },
    ScanDone { scan: u64 },
    AttachDone { cell: String, attempt: u64 },
    PolicyTimeout { operator: String, request: u64 },
    /// An event whose publication was delayed (e.g. a policy store answer).
    Publish(Event),
    TracePoint { handover: String, point: u8 },
    End,
}

/// What a component may touch while handling one step: the clock, the
/// scheduler, the outgoing event queue, the trace and the run's generator.
pub struct Ctx<'a> {
    pub now: SimTime,
    pub sched: &'a mut Scheduler<Wakeup>,
    pub outbox: &'a mut VecDeque<Event>,
    pub trace: &'a mut Trace,
    pub rng: &'a mut ChaCha8Rng,
}

impl Ctx<'_> {
    /// Queues `event` for publication later in the same step.
    pub fn publish(&mut self, event: Event) {
        self.outbox.push_back(event);
    }

    pub fn schedule_in(&mut self, delay_ms: u64, wakeup: Wakeup) -> Handle {
        self.sched.schedule_in(delay_ms, wakeup)
    }

    pub fn cancel(&mut self, handle: Handle) -> bool {
        self.sched.cancel(handle)
    }

    pub fn record(&mut self, record: TraceRecord) {
        self.trace.push(record);
    }

    pub fn note(&self, component: &str, kind: RecordKind) -> TraceRecord {
        TraceRecord::new(self.now, component, kind)
    }
}
