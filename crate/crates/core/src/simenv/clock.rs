use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet};
use std::fmt;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use super::SimError;

/// Integer milliseconds since run start.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub fn from_ms(ms: u64) -> Self {
        SimTime(ms)
    }

    pub fn as_ms(self) -> u64 {
        self.0
    }

    /// Elapsed milliseconds since `earlier`, saturating at zero.
    pub fn since(self, earlier: SimTime) -> u64 {
        self.0.saturating_sub(earlier.0)
    }
}

impl Add<u64> for SimTime {
    type Output = SimTime;
    fn add(self, ms: u64) -> SimTime {
        SimTime(self.0 + ms)
    }
}

impl Sub<SimTime> for SimTime {
    type Output = u64;
    fn sub(self, rhs: SimTime) -> u64 {
        self.0 - rhs.0
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Opaque handle for a scheduled entry; usable to cancel it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Handle(u64);

struct Entry<E> {
    at: SimTime,
    seq: u64,
    payload: E,
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        self.at == other.at && self.seq == other.seq
    }
}
impl<E> Eq for Entry<E> {}
impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<E> Ord for Entry<E> {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.at, self.seq).cmp(&(other.at, other.seq))
    }
}

/// Discrete-event queue ordered by `(time, insertion)`.
pub struct Scheduler<E> {
    now: SimTime,
    next_seq: u64,
    queue: BinaryHeap<Reverse<Entry<E>>>,
    cancelled: HashSet<u64>,
}

impl<E> Default for Scheduler<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> Scheduler<E> {
    pub fn new() -> Self {
        Scheduler {
            now: SimTime::ZERO,
            next_seq: 0,
            queue: BinaryHeap::new(),
            cancelled: HashSet::new(),
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn pending(&self) -> usize {
        self.queue.len() - self.cancelled.len()
    }

    pub fn schedule(&mut self, at: SimTime, payload: E) -> Result<Handle, SimError> {
        if at < self.now {
            return Err(SimError::ScheduleInPast { at, now: self.now });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(Reverse(Entry { at, seq, payload }));
        Ok(Handle(seq))
    }

    /// Schedules `delay_ms` after the current clock; never in the past.
    pub fn schedule_in(&mut self, delay_ms: u64, payload: E) -> Handle {
        let at = self.now + delay_ms;
        self.schedule(at, payload)
            .expect("relative schedule is never in the past")
    }

    /// Returns true if the handle was still pending.
    pub fn cancel(&mut self, handle: Handle) -> bool {
        let live = self.queue.iter().any(|Reverse(e)| e.seq == handle.0);
        live && self.cancelled.insert(handle.0)
    }

    /// Pops the next entry due at or before `end`, advancing the clock to its time.
    pub fn pop_until(&mut self, end: SimTime) -> Option<(SimTime, E)> {
        loop {
            let due = matches!(self.queue.peek(), Some(Reverse(e)) if e.at <= end);
            if !due {
                return None;
            }
            let Reverse(entry) = self.queue.pop().expect("peeked");
            if self.cancelled.remove(&entry.seq) {
                continue;
            }
            debug_assert!(entry.at >= self.now);
            self.now = entry.at;
            return Some((entry.at, entry.payload));
        }
    }

    /// Moves the clock forward to `end` once no earlier entries remain.
    pub fn advance_to(&mut self, end: SimTime) -> Result<SimTime, SimError> {
        if end < self.now {
            return Err(SimError::ScheduleInPast { at: end, now: self.now });
        }
        self.now = end;
        Ok(end)
    }

    /// Executes every entry with time ≤ `end` in `(time, insertion)` order, then sets the
    /// clock to `end`. The handler may schedule further entries.
    pub fn run_until<F>(&mut self, end: SimTime, mut handler: F) -> Result<SimTime, SimError>
    where
        F: FnMut(&mut Self, SimTime, E),
    {
        if end < self.now {
            return Err(SimError::ScheduleInPast { at: end, now: self.now });
        }
        while let Some((at, payload)) = self.pop_until(end) {
            handler(self, at, payload);
        }
        self.advance_to(end)
    }
}
