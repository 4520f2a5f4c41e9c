//! Temporal correlation of event sequences.
//!
//! A rule fires when its event types occur in order (other events may
//! intervene) and the completing event lies within `window_ms` of the first
//! matched element. With `reset_on_fire` every partial match is discarded
//! after a firing, so no event participates in two firings.

use serde::{Deserialize, Serialize};

use super::TrgError;
use crate::simenv::SimTime;

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationRule {
    pub rule_id: String,
    pub pattern: Vec<String>,
    pub window_ms: u64,
    pub output_type: String,
    #[serde(default = "default_true")]
    pub reset_on_fire: bool,
}

impl CorrelationRule {
    pub fn new<I, S>(rule_id: &str, pattern: I, window_ms: u64, output_type: &str) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        CorrelationRule {
            rule_id: rule_id.to_string(),
            pattern: pattern.into_iter().map(Into::into).collect(),
            window_ms,
            output_type: output_type.to_string(),
            reset_on_fire: true,
        }
    }

    pub fn validate(&self) -> Result<(), TrgError> {
        let bad = |why: &str| Err(TrgError::MalformedRule(format!("{}: {why}", self.rule_id)));
        if self.rule_id.is_empty() {
            return bad("empty rule id");
        }
        if self.pattern.len() < 2 {
            return bad("pattern needs at least two event types");
        }
        if self.pattern.iter().any(String::is_empty) {
            return bad("empty event type in pattern");
        }
        if self.window_ms == 0 {
            return bad("window must be positive");
        }
        if self.output_type.is_empty() {
            return bad("empty output type");
        }
        Ok(())
    }
}

/// Incremental matcher for one rule.
///
/// `anchors[k]` holds the latest start time among partial matches that have
/// consumed the first `k` pattern elements; the latest start is the one with
/// the most remaining window, so it dominates all others of the same length.
#[derive(Clone, Debug)]
pub struct Correlator {
    rule: CorrelationRule,
    anchors: Vec<Option<SimTime>>,
    fired: u64,
}

impl Correlator {
    pub fn new(rule: CorrelationRule) -> Result<Self, TrgError> {
        rule.validate()?;
        let len = rule.pattern.len();
        Ok(Correlator {
            rule,
            anchors: vec![None; len + 1],
            fired: 0,
        })
    }

    pub fn rule(&self) -> &CorrelationRule {
        &self.rule
    }

    pub fn fired(&self) -> u64 {
        self.fired
    }

    /// Feeds one event; returns true if the rule fires on it.
    pub fn observe(&mut self, event_type: &str, at: SimTime) -> bool {
        let window = self.rule.window_ms;
        for anchor in self.anchors.iter_mut() {
            if anchor.is_some_and(|a| at.since(a) > window) {
                *anchor = None;
            }
        }
        let len = self.rule.pattern.len();
        // Descending so one event never advances the same match twice.
        for k in (1..len).rev() {
            if self.rule.pattern[k] == event_type {
                if let Some(start) = self.anchors[k] {
                    let slot = &mut self.anchors[k + 1];
                    *slot = Some(slot.map_or(start, |s| s.max(start)));
                }
            }
        }
        if self.rule.pattern[0] == event_type {
            self.anchors[1] = Some(at);
        }
        if self.anchors[len].is_some() {
            self.fired += 1;
            if self.rule.reset_on_fire {
                self.anchors.iter_mut().for_each(|a| *a = None);
            } else {
                self.anchors[len] = None;
            }
            return true;
        }
        false
    }
}
