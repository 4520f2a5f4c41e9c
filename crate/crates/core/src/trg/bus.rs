use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::correlation::{CorrelationRule, Correlator};
use super::event::{Event, Trigger};
use super::registry::UciRegistry;
use super::subscription::{Subscription, TypePattern};
use super::TrgError;
use crate::simenv::SimTime;

pub const TRG_SOURCE: &str = "trg";

/// Upper bound on events produced by one publish, counting correlation outputs.
pub const MAX_CASCADE: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubscriptionHandle(u64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleHandle(usize);

/// Bus-level rule discarding matching events before any subscription sees them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DropRule {
    pub types: Vec<TypePattern>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl DropRule {
    fn matches(&self, event: &Event) -> bool {
        self.types.iter().any(|p| p.matches(&event.event_type))
            && self.source.as_ref().is_none_or(|s| *s == event.source)
    }
}

struct Live {
    id: u64,
    sub: Subscription,
    last_delivery: Option<SimTime>,
}

/// One event's pass through the bus.
#[derive(Debug)]
pub struct PublishStep {
    pub event: Arc<Event>,
    pub synthetic: bool,
    pub dropped: bool,
    pub triggers: Vec<Trigger>,
}

/// Everything a single `publish` call caused, in order: the original event
/// first, followed by any synthetic events the correlation rules produced.
#[derive(Debug)]
pub struct Publication {
    pub steps: Vec<PublishStep>,
}

impl Publication {
    /// Deliveries of the originally published event.
    pub fn delivered(&self) -> usize {
        self.steps.first().map_or(0, |s| s.triggers.len())
    }

    pub fn delivered_to(&self, consumer: &str) -> bool {
        self.steps
            .first()
            .is_some_and(|s| s.triggers.iter().any(|t| t.delivered_to == consumer))
    }

    pub fn triggers(&self) -> impl Iterator<Item = &Trigger> {
        self.steps.iter().flat_map(|s| s.triggers.iter())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BusCounters {
    pub published: u64,
    pub synthetic: u64,
    pub dropped: u64,
    pub unmatched: u64,
    pub delivered: u64,
}

/// Upper-layer trigger destinations inside the node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Downward {
    Mrrm,
    Gll,
}

impl Downward {
    pub fn consumer(self) -> &'static str {
        match self {
            Downward::Mrrm => "mrrm",
            Downward::Gll => "gll",
        }
    }
}

/// In-process trigger bus. Delivery is synchronous and ordered: subscriptions
/// see events in publish order, and one event reaches consumers in
/// subscription-creation order.
#[derive(Default)]
pub struct Bus {
    subs: Vec<Live>,
    next_id: u64,
    drops: Vec<DropRule>,
    correlators: Vec<Correlator>,
    registry: UciRegistry,
    counters: BusCounters,
}

impl Bus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn subscribe(&mut self, sub: Subscription) -> Result<SubscriptionHandle, TrgError> {
        sub.validate()?;
        if let Some(existing) = self.subs.iter().find(|l| l.sub == sub) {
            return Ok(SubscriptionHandle(existing.id));
        }
        let id = self.next_id;
        self.next_id += 1;
        self.subs.push(Live {
            id,
            sub,
            last_delivery: None,
        });
        Ok(SubscriptionHandle(id))
    }

    pub fn unsubscribe(&mut self, handle: SubscriptionHandle) -> Result<(), TrgError> {
        let pos = self
            .subs
            .iter()
            .position(|l| l.id == handle.0)
            .ok_or(TrgError::UnknownHandle)?;
        self.subs.remove(pos);
        Ok(())
    }

    pub fn subscription_count(&self) -> usize {
        self.subs.len()
    }

    pub fn is_subscribed(&self, consumer: &str) -> bool {
        self.subs.iter().any(|l| l.sub.consumer == consumer)
    }

    pub fn add_drop_rule(&mut self, rule: DropRule) {
        self.drops.push(rule);
    }

    pub fn define_correlation(&mut self, rule: CorrelationRule) -> Result<RuleHandle, TrgError> {
        let c = Correlator::new(rule)?;
        self.correlators.push(c);
        Ok(RuleHandle(self.correlators.len() - 1))
    }

    pub fn registry(&self) -> &UciRegistry {
        &self.registry
    }

    pub fn registry_mut(&mut self) -> &mut UciRegistry {
        &mut self.registry
    }

    pub fn counters(&self) -> BusCounters {
        self.counters
    }

    /// Publishes `event` stamped at `now`.
    pub fn publish(&mut self, mut event: Event, now: SimTime) -> Result<Publication, TrgError> {
        if event.event_type.is_empty() || event.source.is_empty() {
            return Err(TrgError::InvalidEvent);
        }
        event.at = now;
        let mut pending = VecDeque::from([(event, false)]);
        let mut steps = Vec::new();
        while let Some((event, synthetic)) = pending.pop_front() {
            if steps.len() == MAX_CASCADE {
                return Err(TrgError::Cascade(event.event_type));
            }
            let step = self.dispatch(event, synthetic, now, &mut pending);
            steps.push(step);
        }
        Ok(Publication { steps })
    }

    /// Publishes an upper-layer trigger addressed at MRRM or GLL.
    pub fn send_downward(
        &mut self,
        event: Event,
        target: Downward,
        now: SimTime,
    ) -> Result<Publication, TrgError> {
        if !self.is_subscribed(target.consumer()) {
            return Err(TrgError::NotSubscribed(target.consumer().to_string()));
        }
        self.publish(event, now)
    }

    fn dispatch(
        &mut self,
        event: Event,
        synthetic: bool,
        now: SimTime,
        pending: &mut VecDeque<(Event, bool)>,
    ) -> PublishStep {
        self.counters.published += 1;
        if synthetic {
            self.counters.synthetic += 1;
        }
        let event = Arc::new(event);
        if self.drops.iter().any(|d| d.matches(&event)) {
            self.counters.dropped += 1;
            return PublishStep {
                event,
                synthetic,
                dropped: true,
                triggers: Vec::new(),
            };
        }
        let mut triggers = Vec::new();
        for live in &mut self.subs {
            if !live.sub.matches(&event) {
                continue;
            }
            if let (Some(min), Some(last)) = (live.sub.min_interval_ms, live.last_delivery) {
                if now.since(last) < min {
                    continue;
                }
            }
            live.last_delivery = Some(now);
            triggers.push(Trigger {
                event: Arc::clone(&event),
                synthetic,
                delivered_to: live.sub.consumer.clone(),
            });
        }
        if triggers.is_empty() {
            self.counters.unmatched += 1;
        }
        self.counters.delivered += triggers.len() as u64;
        for c in &mut self.correlators {
            if c.observe(&event.event_type, now) {
                let rule = c.rule();
                let mut out = Event::new(rule.output_type.clone(), TRG_SOURCE)
                    .with("rule", rule.rule_id.as_str());
                out.at = now;
                pending.push_back((out, true));
            }
        }
        PublishStep {
            event,
            synthetic,
            dropped: false,
            triggers,
        }
    }
}
