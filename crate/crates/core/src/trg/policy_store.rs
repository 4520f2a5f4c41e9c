use serde::{Deserialize, Serialize};

use super::bus::TRG_SOURCE;
use super::event::{types, Event};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    #[default]
    Allow,
    Deny,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Allow => "allow",
            Verdict::Deny => "deny",
        }
    }

    pub fn parse(s: &str) -> Option<Verdict> {
        match s {
            "allow" => Some(Verdict::Allow),
            "deny" => Some(Verdict::Deny),
            _ => None,
        }
    }
}

/// Stored policy for one operator, optionally narrowed to one RAT.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyRecord {
    pub operator: String,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rat: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preference: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolicyStoreConfig {
    pub default_verdict: Verdict,
    pub records: Vec<PolicyRecord>,
    pub answer_delay_ms: u64,
    /// When false the store never answers; requests time out on the MRRM side.
    pub responsive: bool,
}

impl Default for PolicyStoreConfig {
    fn default() -> Self {
        PolicyStoreConfig {
            default_verdict: Verdict::Allow,
            records: Vec::new(),
            answer_delay_ms: 0,
            responsive: true,
        }
    }
}

/// Answers Policies-Check requests from stored operator records.
#[derive(Clone, Debug, Default)]
pub struct PolicyStore {
    cfg: PolicyStoreConfig,
}

impl PolicyStore {
    pub const CONSUMER: &'static str = "trg-policy";

    pub fn new(cfg: PolicyStoreConfig) -> Self {
        PolicyStore { cfg }
    }

    pub fn answer_delay_ms(&self) -> u64 {
        self.cfg.answer_delay_ms
    }

    /// Builds the answer for a `policies-check-request`, or `None` when the
    /// store is configured unresponsive or the request is not one.
    pub fn answer(&self, request: &Event) -> Option<Event> {
        if !self.cfg.responsive || !request.is(types::POLICIES_CHECK_REQUEST) {
            return None;
        }
        let operator = request.text("operator")?;
        let rat = request.text("rat");
        let record = self
            .cfg
            .records
            .iter()
            .find(|r| r.operator == operator && r.rat.as_deref().is_some_and(|x| Some(x) == rat))
            .or_else(|| {
                self.cfg
                    .records
                    .iter()
                    .find(|r| r.operator == operator && r.rat.is_none())
            });
        let verdict = record.map_or(self.cfg.default_verdict, |r| r.verdict);
        let mut answer = Event::new(types::POLICIES_CHECK_ANSWER, TRG_SOURCE)
            .with("operator", operator)
            .with("verdict", verdict.as_str())
            .with("stored", record.is_some());
        if let Some(id) = request.get("request") {
            answer.set("request", id.clone());
        }
        if let Some(rat) = rat {
            answer.set("rat", rat);
        }
        if let Some(pref) = record.and_then(|r| r.preference) {
            answer.set("preference", pref);
        }
        Some(answer)
    }
}
