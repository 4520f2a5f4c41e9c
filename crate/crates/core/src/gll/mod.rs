//! Generic link layer: the only technology-aware part of the node. Turns raw
//! per-RAT measurements into normalized metrics, scans, attaches and reports.

mod layer;
mod metrics;
mod scan;
mod types;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use layer::{
    candidate_from_event, report_event, report_from_event, AttachOutcome, Gll, ScanCounters, GLL_SOURCE,
};
pub use metrics::{map_link_quality, qos_feasible, residual_error_rate, residual_for_scheme, resource_ratio};
pub use scan::{scan, ScanMode, ScanOutcome};
pub use types::{
    AccessCandidate, AccessHistory, LinkMeasurement, LinkQualityReport, MacScheme, MappingConfig,
    MappingWeights, PerClass, Rat, ReportingConfig, ServiceClass, DEFAULT_HISTORY_LIMIT,
    MAX_RETRANSMISSIONS,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GllError {
    #[error("invalid access candidate `{0}`")]
    InvalidCandidate(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("invalid link layer configuration: {0}")]
    InvalidConfig(String),
    #[error("reporting intervals must be positive")]
    InvalidInterval,
    #[error("`{0}` is not attached")]
    NotAttached(String),
    #[error("unknown cell `{0}`")]
    UnknownCell(String),
    #[error("cell `{0}` is not covered")]
    NotCovered(String),
    #[error(transparent)]
    Resources(#[from] crate::simenv::SimError),
}

/// Scan time and energy model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub targeted_probe_ms: u64,
    pub full_per_rat_ms: u64,
    /// Energy charged per probe, by RAT.
    pub probe_energy: BTreeMap<Rat, f64>,
    pub default_probe_energy: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            targeted_probe_ms: 50,
            full_per_rat_ms: 200,
            probe_energy: BTreeMap::new(),
            default_probe_energy: 1.0,
        }
    }
}

impl ScanConfig {
    pub fn energy(&self, rat: &Rat) -> f64 {
        self.probe_energy
            .get(rat)
            .copied()
            .unwrap_or(self.default_probe_energy)
    }

    pub fn validate(&self) -> Result<(), GllError> {
        let energies = std::iter::once(self.default_probe_energy).chain(self.probe_energy.values().copied());
        if energies.clone().any(|e| !(e >= 0.0) || !e.is_finite()) {
            return Err(GllError::InvalidConfig("probe energy must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistoryEntry {
    pub rat: Rat,
    pub frequency: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GllConfig {
    pub mapping: MappingConfig<f64>,
    pub reporting: ReportingConfig,
    pub mac: MacScheme,
    pub scan: ScanConfig,
    pub attach_latency_ms: u64,
    /// Previously used accesses, most recent first.
    pub history: Vec<HistoryEntry>,
    pub history_limit: usize,
}

impl Default for GllConfig {
    fn default() -> Self {
        GllConfig {
            mapping: MappingConfig::default(),
            reporting: ReportingConfig::default(),
            mac: MacScheme::default(),
            scan: ScanConfig::default(),
            attach_latency_ms: 50,
            history: Vec::new(),
            history_limit: DEFAULT_HISTORY_LIMIT,
        }
    }
}

impl GllConfig {
    pub fn validate(&self) -> Result<(), GllError> {
        self.mapping.validate()?;
        self.reporting.validate()?;
        self.mac.validate()?;
        self.scan.validate()?;
        if self.history_limit == 0 {
            return Err(GllError::InvalidConfig("history_limit must be positive".into()));
        }
        Ok(())
    }

    pub fn initial_history(&self) -> AccessHistory {
        AccessHistory::from_entries(
            self.history.iter().map(|h| (h.rat.clone(), h.frequency.clone())),
            self.history_limit,
        )
    }
}
