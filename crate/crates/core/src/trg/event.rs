use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::simenv::SimTime;

/// Reserved event type strings. The vocabulary is open; these are the ones the
/// built-in components produce or consume.
pub mod types {
    pub const LINK_UP: &str = "link-up";
    pub const LINK_DOWN: &str = "link-down";
    pub const ATTACH_FAILED: &str = "attach-failed";
    pub const ACCESS_LOST: &str = "access-lost";
    pub const LINK_QUALITY_REPORT: &str = "link-quality-report";
    pub const SCAN_COMPLETE: &str = "scan-complete";
    pub const CANDIDATE_REPORT: &str = "candidate-report";
    pub const NEW_ACCESS_DETECTED: &str = "new-access-detected";
    pub const HANDOVER_EXECUTION_REQUEST: &str = "handover-execution-request";
    pub const HANDOVER_COMPLETE: &str = "handover-complete";
    pub const HANDOVER_FAILED: &str = "handover-failed";
    pub const QOS_UNSATISFIED: &str = "qos-unsatisfied";
    pub const POLICY_CHANGED: &str = "policy-changed";
    pub const POLICIES_CHECK_REQUEST: &str = "policies-check-request";
    pub const POLICIES_CHECK_ANSWER: &str = "policies-check-answer";
    pub const ROUTER_ADVERTISEMENT: &str = "router-advertisement";
    pub const FLOW_ARRIVAL: &str = "flow-arrival";
    pub const FLOW_DEPARTURE: &str = "flow-departure";
    pub const REPORTING_INTERVAL_CHANGE: &str = "reporting-interval-change";
}

/// Named scalar attribute value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Flag(bool),
    Number(f64),
    Text(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Number(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Flag(b) => Some(*b),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Flag(b) => write!(f, "{b}"),
            Value::Number(n) => write!(f, "{n}"),
            Value::Text(s) => write!(f, "{s}"),
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Number(v)
    }
}
impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Number(v as f64)
    }
}
impl From<u32> for Value {
    fn from(v: u32) -> Self {
        Value::Number(v as f64)
    }
}
impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Number(v as f64)
    }
}
impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Flag(v)
    }
}
impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}
impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}
impl From<&String> for Value {
    fn from(v: &String) -> Self {
        Value::Text(v.clone())
    }
}

pub type Payload = BTreeMap<String, Value>;

/// A typed, timestamped notification. `at` is assigned by the bus on publish.
#[derive(Clone, Debug, PartialEq)]
pub struct Event {
    pub event_type: String,
    pub source: String,
    pub at: SimTime,
    pub payload: Payload,
}

impl Event {
    pub fn new(event_type: impl Into<String>, source: impl Into<String>) -> Self {
        Event {
            event_type: event_type.into(),
            source: source.into(),
            at: SimTime::ZERO,
            payload: Payload::new(),
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<Value>) -> Self {
        self.payload.insert(key.into(), value.into());
        self
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.payload.insert(key.into(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.payload.get(key)
    }

    pub fn num(&self, key: &str) -> Option<f64> {
        self.get(key).and_then(Value::as_f64)
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        self.get(key).and_then(Value::as_str)
    }

    pub fn flag(&self, key: &str) -> Option<bool> {
        self.get(key).and_then(Value::as_bool)
    }

    pub fn is(&self, event_type: &str) -> bool {
        self.event_type == event_type
    }
}

/// An event as delivered to one consumer.
#[derive(Clone, Debug)]
pub struct Trigger {
    pub event: Arc<Event>,
    pub synthetic: bool,
    pub delivered_to: String,
}

impl std::ops::Deref for Trigger {
    type Target = Event;
    fn deref(&self) -> &Event {
        &self.event
    }
}
