use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::MrrmError;
use crate::gll::{AccessCandidate, Rat, ServiceClass};
use crate::scalar::Scalar;
use crate::simenv::SimTime;

/// A user traffic flow; the unit of access selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Flow<T> {
    pub flow_id: String,
    pub service_class: ServiceClass,
    /// bit/s.
    pub min_rate: T,
    /// ms.
    pub max_delay: T,
    pub max_loss: T,
    pub resource_demand: u64,
    pub serving: Option<AccessCandidate>,
}

impl<T: Scalar> Flow<T> {
    pub fn new(
        flow_id: &str,
        service_class: ServiceClass,
        min_rate: T,
        max_delay: T,
        max_loss: T,
        resource_demand: u64,
    ) -> Self {
        Flow {
            flow_id: flow_id.into(),
            service_class,
            min_rate,
            max_delay,
            max_loss,
            resource_demand,
            serving: None,
        }
    }

    pub fn validate(&self) -> Result<(), MrrmError> {
        let bad = |why: &str| Err(MrrmError::InvalidFlow(format!("{}: {why}", self.flow_id)));
        if self.flow_id.is_empty() {
            return bad("empty flow id");
        }
        if !(self.min_rate >= T::zero()) || !(self.max_delay >= T::zero()) {
            return bad("QoS fields must be non-negative");
        }
        if !(self.max_loss >= T::zero() && self.max_loss <= T::one()) {
            return bad("max_loss outside [0,1]");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct PreferenceEntry<T> {
    pub operator: String,
    pub rat: Rat,
    pub preference: T,
}

/// Slow-changing policy inputs of the first selection stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields, default)]
pub struct PolicySet<T> {
    /// Empty means every operator is allowed.
    pub allowed_operators: BTreeSet<String>,
    pub denied_operators: BTreeSet<String>,
    pub min_security_level: u8,
    /// `None` means no cost cap.
    pub max_cost_per_mb: Option<T>,
    pub roaming_allowed: bool,
    /// Operator the terminal is subscribed with; other operators count as roaming.
    pub home_operator: Option<String>,
    pub static_preference: Vec<PreferenceEntry<T>>,
    pub default_preference: T,
}

impl<T: Scalar> Default for PolicySet<T> {
    fn default() -> Self {
        PolicySet {
            allowed_operators: BTreeSet::new(),
            denied_operators: BTreeSet::new(),
            min_security_level: 0,
            max_cost_per_mb: None,
            roaming_allowed: true,
            home_operator: None,
            static_preference: Vec::new(),
            default_preference: T::lit(0.5),
        }
    }
}

impl<T: Scalar> PolicySet<T> {
    pub fn validate(&self) -> Result<(), MrrmError> {
        if let Some(op) = self.allowed_operators.intersection(&self.denied_operators).next() {
            return Err(MrrmError::InvalidPolicy(format!(
                "operator `{op}` is both allowed and denied"
            )));
        }
        let unit = |v: T| v >= T::zero() && v <= T::one();
        if !unit(self.default_preference) || self.static_preference.iter().any(|e| !unit(e.preference)) {
            return Err(MrrmError::InvalidPolicy("preferences must lie in [0,1]".into()));
        }
        if self.max_cost_per_mb.is_some_and(|c| !(c >= T::zero())) {
            return Err(MrrmError::InvalidPolicy("negative cost cap".into()));
        }
        Ok(())
    }

    pub fn preference(&self, operator: &str, rat: &Rat) -> T {
        self.static_preference
            .iter()
            .find(|e| e.operator == operator && &e.rat == rat)
            .map_or(self.default_preference, |e| e.preference)
    }

    pub fn set_preference(&mut self, operator: &str, rat: &Rat, preference: T) {
        let preference = preference.unit_clamp();
        match self
            .static_preference
            .iter_mut()
            .find(|e| e.operator == operator && &e.rat == rat)
        {
            Some(e) => e.preference = preference,
            None => self.static_preference.push(PreferenceEntry {
                operator: operator.into(),
                rat: rat.clone(),
                preference,
            }),
        }
    }

    pub fn allow_operator(&mut self, operator: &str) {
        self.denied_operators.remove(operator);
        if !self.allowed_operators.is_empty() {
            self.allowed_operators.insert(operator.into());
        }
    }

    pub fn deny_operator(&mut self, operator: &str) {
        self.allowed_operators.remove(operator);
        self.denied_operators.insert(operator.into());
    }

    pub fn operator_allowed(&self, operator: &str) -> bool {
        !self.denied_operators.contains(operator)
            && (self.allowed_operators.is_empty() || self.allowed_operators.contains(operator))
    }

    pub fn roaming_ok(&self, operator: &str) -> bool {
        self.roaming_allowed
            || self
                .home_operator
                .as_deref()
                .is_none_or(|home| home == operator)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct SelectionWeights<T> {
    pub qos: T,
    pub link: T,
    pub cell: T,
    pub terminal: T,
    pub policy: T,
}

impl<T: Scalar> SelectionWeights<T> {
    pub fn scaled(&self, c: T) -> Self {
        SelectionWeights {
            qos: self.qos * c,
            link: self.link * c,
            cell: self.cell * c,
            terminal: self.terminal * c,
            policy: self.policy * c,
        }
    }

    fn all(&self) -> [T; 5] {
        [self.qos, self.link, self.cell, self.terminal, self.policy]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields, default)]
pub struct SelectionConfig<T> {
    pub weights: SelectionWeights<T>,
    /// Cells at or above this load are dropped before scoring.
    pub load_threshold: T,
    pub hysteresis_delta: T,
    /// Below this link quality the serving access is considered unsatisfactory.
    pub quality_floor: T,
}

impl<T: Scalar> Default for SelectionConfig<T> {
    fn default() -> Self {
        SelectionConfig {
            weights: SelectionWeights {
                qos: T::lit(0.3),
                link: T::lit(0.3),
                cell: T::lit(0.2),
                terminal: T::lit(0.1),
                policy: T::lit(0.1),
            },
            load_threshold: T::lit(0.9),
            hysteresis_delta: T::lit(0.05),
            quality_floor: T::lit(0.1),
        }
    }
}

impl<T: Scalar> SelectionConfig<T> {
    pub fn validate(&self) -> Result<(), MrrmError> {
        let ws = self.weights.all();
        if ws.iter().any(|w| !(*w >= T::zero())) {
            return Err(MrrmError::InvalidConfig("selection weights must be non-negative".into()));
        }
        let sum = ws.iter().fold(T::zero(), |a, b| a + *b);
        if (sum - T::one()).abs() > T::lit(1e-9).max(T::epsilon() * T::lit(8.0)) {
            return Err(MrrmError::InvalidConfig(format!(
                "selection weights sum to {sum}, expected 1"
            )));
        }
        let unit = |v: T| v >= T::zero() && v <= T::one();
        if !unit(self.load_threshold) || !unit(self.hysteresis_delta) || !unit(self.quality_floor) {
            return Err(MrrmError::InvalidConfig(
                "threshold, hysteresis and floor must lie in [0,1]".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields, default)]
pub struct TerminalCapabilities<T> {
    /// Empty means every RAT is supported.
    pub supported_rats: BTreeSet<Rat>,
    /// Relative energy penalty per RAT, `[0,1]`; missing RATs cost nothing.
    pub energy_cost: BTreeMap<Rat, T>,
}

impl<T: Scalar> TerminalCapabilities<T> {
    pub fn supports(&self, rat: &Rat) -> bool {
        self.supported_rats.is_empty() || self.supported_rats.contains(rat)
    }

    pub fn energy_cost(&self, rat: &Rat) -> T {
        self.energy_cost.get(rat).copied().unwrap_or_else(T::zero)
    }

    pub fn validate(&self) -> Result<(), MrrmError> {
        if self
            .energy_cost
            .values()
            .any(|c| !(*c >= T::zero() && *c <= T::one()))
        {
            return Err(MrrmError::InvalidConfig("energy costs must lie in [0,1]".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RankedEntry<T> {
    pub candidate: AccessCandidate,
    pub score: T,
}

/// Per-flow ordering of the accesses that passed both filters, best first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RankedList<T> {
    pub flow_id: String,
    pub entries: Vec<RankedEntry<T>>,
    pub decided_at: SimTime,
}

impl<T: Scalar> RankedList<T> {
    pub fn head(&self) -> Option<&RankedEntry<T>> {
        self.entries.first()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn score_of(&self, candidate: &AccessCandidate) -> Option<T> {
        self.entries
            .iter()
            .find(|e| &e.candidate == candidate)
            .map(|e| e.score)
    }
}

/// Static attributes the policy stage looks at.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateProfile<T> {
    pub candidate: AccessCandidate,
    pub security_level: u8,
    pub cost_per_mb: T,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_configs_valid() {
        SelectionConfig::<f64>::default().validate().unwrap();
        PolicySet::<f64>::default().validate().unwrap();
        TerminalCapabilities::<f64>::default().validate().unwrap();
        SelectionConfig::<f32>::default().validate().unwrap();
    }

    #[test]
    fn allowed_and_denied_must_be_disjoint() {
        let mut p = PolicySet::<f64>::default();
        p.allowed_operators.insert("OpA".into());
        p.denied_operators.insert("OpA".into());
        assert!(p.validate().is_err());
    }

    #[test]
    fn preference_lookup_and_override() {
        let mut p = PolicySet::<f64>::default();
        let wlan = Rat::from("WLAN");
        assert_eq!(p.preference("OpA", &wlan), 0.5);
        p.set_preference("OpA", &wlan, 0.9);
        assert_eq!(p.preference("OpA", &wlan), 0.9);
        p.set_preference("OpA", &wlan, 1.7);
        assert_eq!(p.preference("OpA", &wlan), 1.0);
    }

    #[test]
    fn allow_and_deny_merge() {
        let mut p = PolicySet::<f64>::default();
        p.deny_operator("OpC");
        assert!(!p.operator_allowed("OpC"));
        p.allow_operator("OpC");
        assert!(p.operator_allowed("OpC"));
        assert!(p.allowed_operators.is_empty());
    }

    #[test]
    fn roaming_rule() {
        let mut p = PolicySet::<f64>::default();
        p.home_operator = Some("OpA".into());
        assert!(p.roaming_ok("OpB"));
        p.roaming_allowed = false;
        assert!(p.roaming_ok("OpA"));
        assert!(!p.roaming_ok("OpB"));
    }

    #[test]
    fn selection_weight_sum_checked() {
        let mut c = SelectionConfig::<f64>::default();
        c.weights.qos = 0.5;
        assert!(c.validate().is_err());
    }
}
