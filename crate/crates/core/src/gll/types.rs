use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::GllError;
use crate::scalar::Scalar;
use crate::simenv::SimTime;

/// Radio access technology kind. Open set: `WLAN`, `UMTS`, `GSM`, `LAN`, ...
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rat(pub String);

impl Rat {
    pub fn new(s: impl Into<String>) -> Self {
        Rat(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Rat {
    fn from(s: &str) -> Self {
        Rat(s.to_string())
    }
}

/// Identity of one usable access.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AccessCandidate {
    pub rat: Rat,
    pub operator_id: String,
    pub cell_id: String,
    pub frequency: String,
}

impl AccessCandidate {
    pub fn new(rat: &str, operator_id: &str, cell_id: &str, frequency: &str) -> Self {
        AccessCandidate {
            rat: Rat::new(rat),
            operator_id: operator_id.into(),
            cell_id: cell_id.into(),
            frequency: frequency.into(),
        }
    }

    pub fn validate(&self) -> Result<(), GllError> {
        if self.rat.0.is_empty()
            || self.operator_id.is_empty()
            || self.cell_id.is_empty()
            || self.frequency.is_empty()
        {
            return Err(GllError::InvalidCandidate(self.cell_id.clone()));
        }
        Ok(())
    }

    /// Lexicographic key used to break score ties.
    pub fn tie_key(&self) -> (&str, &str, &str, &str) {
        (
            &self.operator_id,
            self.rat.as_str(),
            &self.cell_id,
            &self.frequency,
        )
    }
}

impl fmt::Display for AccessCandidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}/{}@{}",
            self.operator_id, self.rat, self.cell_id, self.frequency
        )
    }
}

#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "kebab-case")]
pub enum ServiceClass {
    RealTime,
    Interactive,
    #[default]
    Background,
}

impl ServiceClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ServiceClass::RealTime => "real-time",
            ServiceClass::Interactive => "interactive",
            ServiceClass::Background => "background",
        }
    }

    pub fn parse(s: &str) -> Option<ServiceClass> {
        match s {
            "real-time" => Some(ServiceClass::RealTime),
            "interactive" => Some(ServiceClass::Interactive),
            "background" => Some(ServiceClass::Background),
            _ => None,
        }
    }
}

/// Raw per-access measurement as taken by the link layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LinkMeasurement<T> {
    pub candidate: AccessCandidate,
    pub residual_error_rate: T,
    /// bit/s available to a new flow.
    pub achievable_rate: T,
    /// One-way delay, ms.
    pub delay: T,
    /// used / total resources.
    pub load: T,
    pub covered: bool,
    pub taken_at: SimTime,
    /// Resource units still unallocated in the cell.
    pub free_resources: u64,
    pub security_level: u8,
    pub cost_per_mb: T,
}

impl<T: Scalar> LinkMeasurement<T> {
    pub fn validate(&self) -> Result<(), GllError> {
        let unit = |v: T| v >= T::zero() && v <= T::one();
        if !unit(self.residual_error_rate) || !unit(self.load) {
            return Err(GllError::OutOfRange(format!(
                "measurement for {} has probability outside [0,1]",
                self.candidate.cell_id
            )));
        }
        if self.achievable_rate < T::zero() || self.delay < T::zero() || self.cost_per_mb < T::zero()
        {
            return Err(GllError::OutOfRange(format!(
                "measurement for {} has a negative field",
                self.candidate.cell_id
            )));
        }
        Ok(())
    }
}

/// Abstracted per-access metrics, every field in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LinkQualityReport<T> {
    pub candidate: AccessCandidate,
    pub q_error: T,
    pub q_rate: T,
    pub q_delay: T,
    pub q_load: T,
    pub quality: T,
    pub relative_resources: T,
    pub raw: LinkMeasurement<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct MappingWeights<T> {
    pub error: T,
    pub rate: T,
    pub delay: T,
    pub load: T,
}

/// A value per service class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerClass<V> {
    pub real_time: V,
    pub interactive: V,
    pub background: V,
}

impl<V: Clone> PerClass<V> {
    pub fn uniform(v: V) -> Self {
        PerClass {
            real_time: v.clone(),
            interactive: v.clone(),
            background: v,
        }
    }
}

impl<V> PerClass<V> {
    pub fn get(&self, class: ServiceClass) -> &V {
        match class {
            ServiceClass::RealTime => &self.real_time,
            ServiceClass::Interactive => &self.interactive,
            ServiceClass::Background => &self.background,
        }
    }

    pub fn get_mut(&mut self, class: ServiceClass) -> &mut V {
        match class {
            ServiceClass::RealTime => &mut self.real_time,
            ServiceClass::Interactive => &mut self.interactive,
            ServiceClass::Background => &mut self.background,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields, default)]
pub struct MappingConfig<T> {
    pub weights: MappingWeights<T>,
    /// Residual frame error rate at which the error sub-metric reaches zero.
    pub fer_max: T,
    /// bit/s at which the rate sub-metric saturates, per service class.
    pub reference_rate: PerClass<T>,
    /// ms at which the delay sub-metric reaches zero.
    pub delay_max: T,
}

impl<T: Scalar> Default for MappingConfig<T> {
    fn default() -> Self {
        let q = T::lit(0.25);
        MappingConfig {
            weights: MappingWeights {
                error: q,
                rate: q,
                delay: q,
                load: q,
            },
            fer_max: T::lit(0.1),
            reference_rate: PerClass::uniform(T::lit(2e6)),
            delay_max: T::lit(200.0),
        }
    }
}

impl<T: Scalar> MappingConfig<T> {
    pub fn validate(&self) -> Result<(), GllError> {
        let w = &self.weights;
        let ws = [w.error, w.rate, w.delay, w.load];
        if ws.iter().any(|v| !(*v >= T::zero())) {
            return Err(GllError::InvalidConfig("mapping weights must be non-negative".into()));
        }
        let sum = ws.iter().fold(T::zero(), |a, b| a + *b);
        if (sum - T::one()).abs() > T::lit(1e-9).max(T::epsilon() * T::lit(4.0)) {
            return Err(GllError::InvalidConfig(format!(
                "mapping weights sum to {sum}, expected 1"
            )));
        }
        let refs = [
            self.fer_max,
            self.delay_max,
            self.reference_rate.real_time,
            self.reference_rate.interactive,
            self.reference_rate.background,
        ];
        if refs.iter().any(|v| !(*v > T::zero())) {
            return Err(GllError::InvalidConfig("mapping reference values must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportingConfig {
    pub interval_ms: PerClass<u64>,
    pub enabled: bool,
}

impl Default for ReportingConfig {
    fn default() -> Self {
        ReportingConfig {
            interval_ms: PerClass {
                real_time: 100,
                interactive: 500,
                background: 500,
            },
            enabled: true,
        }
    }
}

impl ReportingConfig {
    pub fn validate(&self) -> Result<(), GllError> {
        let i = &self.interval_ms;
        if [i.real_time, i.interactive, i.background].contains(&0) {
            return Err(GllError::InvalidInterval);
        }
        Ok(())
    }

    /// Interval for the most demanding active class; the background interval
    /// when nothing is active.
    pub fn interval_for(&self, class: Option<ServiceClass>) -> u64 {
        *self
            .interval_ms
            .get(class.unwrap_or(ServiceClass::Background))
    }
}

pub const MAX_RETRANSMISSIONS: u32 = 16;

/// MAC-level retransmission limits per RAT.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MacScheme {
    pub default_max_retransmissions: u32,
    pub per_rat: BTreeMap<Rat, u32>,
}

impl MacScheme {
    pub fn uniform(max_retransmissions: u32) -> Self {
        MacScheme {
            default_max_retransmissions: max_retransmissions,
            per_rat: BTreeMap::new(),
        }
    }

    pub fn max_retransmissions(&self, rat: &Rat) -> u32 {
        self.per_rat
            .get(rat)
            .copied()
            .unwrap_or(self.default_max_retransmissions)
    }

    pub fn validate(&self) -> Result<(), GllError> {
        let over = std::iter::once(self.default_max_retransmissions)
            .chain(self.per_rat.values().copied())
            .any(|r| r > MAX_RETRANSMISSIONS);
        if over {
            return Err(GllError::InvalidConfig(format!(
                "max_retransmissions above {MAX_RETRANSMISSIONS}"
            )));
        }
        Ok(())
    }
}

pub const DEFAULT_HISTORY_LIMIT: usize = 16;

/// Previously used `(rat, frequency)` pairs, most recent first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AccessHistory {
    entries: Vec<(Rat, String)>,
    limit: usize,
}

impl Default for AccessHistory {
    fn default() -> Self {
        AccessHistory::with_limit(DEFAULT_HISTORY_LIMIT)
    }
}

impl AccessHistory {
    pub fn with_limit(limit: usize) -> Self {
        AccessHistory {
            entries: Vec::new(),
            limit: limit.max(1),
        }
    }

    /// Builds from oldest-last order; duplicates keep their first position.
    pub fn from_entries<I>(entries: I, limit: usize) -> Self
    where
        I: IntoIterator<Item = (Rat, String)>,
    {
        let mut h = AccessHistory::with_limit(limit);
        for (rat, freq) in entries {
            if !h.contains(&rat, &freq) && h.entries.len() < h.limit {
                h.entries.push((rat, freq));
            }
        }
        h
    }

    pub fn contains(&self, rat: &Rat, frequency: &str) -> bool {
        self.entries.iter().any(|(r, f)| r == rat && f == frequency)
    }

    /// Moves `(rat, frequency)` to the front.
    pub fn record(&mut self, rat: &Rat, frequency: &str) {
        self.entries.retain(|(r, f)| !(r == rat && f == frequency));
        self.entries.insert(0, (rat.clone(), frequency.to_string()));
        self.entries.truncate(self.limit);
    }

    pub fn entries(&self) -> &[(Rat, String)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}
