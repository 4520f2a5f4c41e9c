//! Trigger management: collects events from producers, filters them against
//! consumer subscriptions, synthesizes correlated triggers and keeps the
//! local context-identifier registry.

mod bus;
mod correlation;
mod event;
mod policy_store;
mod registry;
mod subscription;

pub use bus::{
    Bus, BusCounters, DropRule, Downward, Publication, PublishStep, RuleHandle, MAX_CASCADE,
    SubscriptionHandle, TRG_SOURCE,
};
pub use correlation::{CorrelationRule, Correlator};
pub use event::{types, Event, Payload, Trigger, Value};
pub use policy_store::{PolicyRecord, PolicyStore, PolicyStoreConfig, Verdict};
pub use registry::{UciRecord, UciRegistry};
pub use subscription::{Comparator, Predicate, Subscription, TypePattern};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TrgError {
    #[error("subscription consumer id is empty")]
    EmptyConsumer,
    #[error("malformed predicate: {0}")]
    MalformedPredicate(String),
    #[error("malformed correlation rule: {0}")]
    MalformedRule(String),
    #[error("unknown subscription handle")]
    UnknownHandle,
    #[error("event type and source must be non-empty")]
    InvalidEvent,
    #[error("consumer `{0}` has no subscription")]
    NotSubscribed(String),
    #[error("uci must be non-empty")]
    EmptyUci,
    #[error("uci `{uci}` already registered by `{owner}`")]
    UciConflict { uci: String, owner: String },
    #[error("uci `{0}` not found")]
    UciNotFound(String),
    #[error("correlation cascade still producing `{0}` after {max} events", max = bus::MAX_CASCADE)]
    Cascade(String),
}
