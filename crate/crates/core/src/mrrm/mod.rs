//! Multi-radio resource management: candidate bookkeeping, two-stage per-flow
//! access selection and handover requests.

mod engine;
mod select;
mod types;

use serde::{Deserialize, Serialize};

pub use engine::{CandidateReport, FlowPhase, Mrrm, MRRM_SOURCE};
pub use select::{
    dynamic_score, passes_hard_termination, policy_admits, policy_filter, rank_order, select_access,
};
pub use types::{
    CandidateProfile, Flow, PolicySet, PreferenceEntry, RankedEntry, RankedList, SelectionConfig,
    SelectionWeights, TerminalCapabilities,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MrrmError {
    #[error("invalid flow: {0}")]
    InvalidFlow(String),
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("invalid selection configuration: {0}")]
    InvalidConfig(String),
    #[error("no scan has completed yet")]
    NoScanYet,
}

/// Order in which a handover switches links.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HandoverSemantics {
    /// Attach the target before releasing the source.
    #[default]
    MakeBeforeBreak,
    /// Release the source first; the flow is unserved until completion.
    BreakBeforeMake,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MrrmConfig {
    pub policies: PolicySet<f64>,
    pub selection: SelectionConfig<f64>,
    pub capabilities: TerminalCapabilities<f64>,
    /// How long a candidate is skipped after a failed handover or attach.
    pub cooldown_ms: u64,
    /// Unanswered Policies-Check requests leave the operator excluded after this.
    pub policy_check_timeout_ms: u64,
}

impl Default for MrrmConfig {
    fn default() -> Self {
        MrrmConfig {
            policies: PolicySet::default(),
            selection: SelectionConfig::default(),
            capabilities: TerminalCapabilities::default(),
            cooldown_ms: 5000,
            policy_check_timeout_ms: 1000,
        }
    }
}

impl MrrmConfig {
    pub fn validate(&self) -> Result<(), MrrmError> {
        self.policies.validate()?;
        self.selection.validate()?;
        self.capabilities.validate()?;
        if self.policy_check_timeout_ms == 0 {
            return Err(MrrmError::InvalidConfig("policy_check_timeout_ms must be positive".into()));
        }
        Ok(())
    }
}
