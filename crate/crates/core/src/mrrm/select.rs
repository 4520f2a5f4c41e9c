//! Two-stage per-flow access selection: a policy stage over slow-changing
//! inputs, then a dynamic weighted score over current link reports.

use std::cmp::Ordering;

use super::types::{
    CandidateProfile, Flow, PolicySet, RankedEntry, RankedList, SelectionConfig,
    TerminalCapabilities,
};
use crate::gll::{qos_feasible, AccessCandidate, LinkQualityReport};
use crate::scalar::Scalar;
use crate::simenv::SimTime;

impl<T: Scalar> CandidateProfile<T> {
    pub fn from_report(report: &LinkQualityReport<T>) -> Self {
        CandidateProfile {
            candidate: report.candidate.clone(),
            security_level: report.raw.security_level,
            cost_per_mb: report.raw.cost_per_mb,
        }
    }
}

/// Whether one access passes every policy and capability predicate.
pub fn policy_admits<T: Scalar>(
    profile: &CandidateProfile<T>,
    policies: &PolicySet<T>,
    caps: &TerminalCapabilities<T>,
) -> bool {
    let c = &profile.candidate;
    policies.operator_allowed(&c.operator_id)
        && profile.security_level >= policies.min_security_level
        && policies
            .max_cost_per_mb
            .is_none_or(|cap| profile.cost_per_mb <= cap)
        && policies.roaming_ok(&c.operator_id)
        && caps.supports(&c.rat)
}

/// Allowed candidates, most preferred first; ties by `(operator, rat, cell, frequency)`.
pub fn policy_filter<T: Scalar>(
    candidates: &[CandidateProfile<T>],
    policies: &PolicySet<T>,
    caps: &TerminalCapabilities<T>,
) -> Vec<AccessCandidate> {
    let mut kept: Vec<(T, &AccessCandidate)> = candidates
        .iter()
        .filter(|p| policy_admits(p, policies, caps))
        .map(|p| {
            let c = &p.candidate;
            (policies.preference(&c.operator_id, &c.rat), c)
        })
        .collect();
    kept.sort_by(|(pa, a), (pb, b)| {
        pb.partial_cmp(pa)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.tie_key().cmp(&b.tie_key()))
    });
    kept.into_iter().map(|(_, c)| c.clone()).collect()
}

/// Weighted combination of QoS fit, link quality, cell resources, terminal
/// energy cost and static preference.
pub fn dynamic_score<T: Scalar>(
    flow: &Flow<T>,
    report: &LinkQualityReport<T>,
    policies: &PolicySet<T>,
    caps: &TerminalCapabilities<T>,
    cfg: &SelectionConfig<T>,
) -> T {
    let w = &cfg.weights;
    let c = &report.candidate;
    let f_qos = if qos_feasible(flow, &report.raw) {
        T::one()
    } else {
        T::zero()
    };
    w.qos * f_qos
        + w.link * report.quality
        + w.cell * report.relative_resources
        + w.terminal * (T::one() - caps.energy_cost(&c.rat))
        + w.policy * policies.preference(&c.operator_id, &c.rat)
}

/// Hard termination: accesses at or above the load threshold are not candidates.
pub fn passes_hard_termination<T: Scalar>(report: &LinkQualityReport<T>, cfg: &SelectionConfig<T>) -> bool {
    report.raw.load < cfg.load_threshold
}

/// Orders two scored entries: score descending, the serving access first,
/// then the lexicographic tie key.
pub fn rank_order<T: Scalar>(
    a: &RankedEntry<T>,
    b: &RankedEntry<T>,
    serving: Option<&AccessCandidate>,
) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| {
            let sa = Some(&a.candidate) == serving;
            let sb = Some(&b.candidate) == serving;
            sb.cmp(&sa)
        })
        .then_with(|| a.candidate.tie_key().cmp(&b.candidate.tie_key()))
}

pub fn select_access<T: Scalar>(
    flow: &Flow<T>,
    reports: &[LinkQualityReport<T>],
    policies: &PolicySet<T>,
    caps: &TerminalCapabilities<T>,
    cfg: &SelectionConfig<T>,
    now: SimTime,
) -> RankedList<T> {
    let mut entries: Vec<RankedEntry<T>> = reports
        .iter()
        .filter(|r| policy_admits(&CandidateProfile::from_report(r), policies, caps))
        .filter(|r| passes_hard_termination(r, cfg))
        .map(|r| RankedEntry {
            candidate: r.candidate.clone(),
            score: dynamic_score(flow, r, policies, caps, cfg),
        })
        .collect();
    entries.sort_by(|a, b| rank_order(a, b, flow.serving.as_ref()));
    RankedList {
        flow_id: flow.flow_id.clone(),
        entries,
        decided_at: now,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gll::{map_link_quality, LinkMeasurement, MappingConfig, Rat, ServiceClass};

    fn report(op: &str, rat: &str, cell: &str, load: f64) -> LinkQualityReport<f64> {
        let m = LinkMeasurement {
            candidate: AccessCandidate::new(rat, op, cell, "f"),
            residual_error_rate: 0.0,
            achievable_rate: 2e6,
            delay: 0.0,
            load,
            covered: true,
            taken_at: SimTime(0),
            free_resources: 10,
            security_level: 1,
            cost_per_mb: 0.0,
        };
        map_link_quality(&m, &MappingConfig::default(), ServiceClass::RealTime)
    }

    fn flow() -> Flow<f64> {
        Flow::new("f1", ServiceClass::RealTime, 1e6, 100.0, 0.01, 1)
    }

    fn profiles(reports: &[LinkQualityReport<f64>]) -> Vec<CandidateProfile<f64>> {
        reports.iter().map(CandidateProfile::from_report).collect()
    }

    #[test]
    fn denied_operator_excluded() {
        let rs = [report("OpA", "WLAN", "a", 0.1), report("OpB", "UMTS", "b", 0.1), report("OpC", "WLAN", "c", 0.1)];
        let mut p = PolicySet::default();
        p.deny_operator("OpC");
        p.set_preference("OpB", &Rat::from("UMTS"), 0.8);
        let out = policy_filter(&profiles(&rs), &p, &TerminalCapabilities::default());
        let ids: Vec<_> = out.iter().map(|c| c.cell_id.as_str()).collect();
        assert_eq!(ids, vec!["b", "a"]);
    }

    #[test]
    fn empty_policy_is_identity_in_preference_order() {
        let rs = [report("OpB", "WLAN", "b", 0.1), report("OpA", "UMTS", "a", 0.1)];
        let out = policy_filter(&profiles(&rs), &PolicySet::default(), &TerminalCapabilities::default());
        let ids: Vec<_> = out.iter().map(|c| c.cell_id.as_str()).collect();
        assert_eq!(ids, vec!["a", "b"]);
    }

    #[test]
    fn unsupported_rat_excluded_regardless_of_preference() {
        let rs = [report("OpA", "WLAN", "a", 0.1), report("OpA", "GSM", "g", 0.1)];
        let mut p = PolicySet::default();
        p.set_preference("OpA", &Rat::from("GSM"), 1.0);
        let mut caps = TerminalCapabilities::default();
        caps.supported_rats.insert(Rat::from("WLAN"));
        let out = policy_filter(&profiles(&rs), &p, &caps);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].cell_id, "a");
    }

    #[test]
    fn security_cost_and_roaming_gates() {
        let mut rs = vec![report("OpA", "WLAN", "a", 0.1), report("OpB", "WLAN", "b", 0.1)];
        rs[0].raw.security_level = 0;
        rs[1].raw.cost_per_mb = 5.0;
        let mut p = PolicySet::default();
        p.min_security_level = 1;
        assert_eq!(policy_filter(&profiles(&rs), &p, &TerminalCapabilities::default()).len(), 1);
        p.max_cost_per_mb = Some(1.0);
        assert!(policy_filter(&profiles(&rs), &p, &TerminalCapabilities::default()).is_empty());
        let mut p = PolicySet::default();
        p.home_operator = Some("OpA".into());
        p.roaming_allowed = false;
        let out = policy_filter(&profiles(&rs), &p, &TerminalCapabilities::default());
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].operator_id, "OpA");
    }

    fn unit_report() -> LinkQualityReport<f64> {
        let mut r = report("OpA", "WLAN", "a", 0.0);
        r.quality = 1.0;
        r.relative_resources = 1.0;
        r
    }

    #[test]
    fn all_factors_one_scores_one() {
        let mut p = PolicySet::default();
        p.default_preference = 1.0;
        let s = dynamic_score(&flow(), &unit_report(), &p, &TerminalCapabilities::default(), &SelectionConfig::default());
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_qos_loses_qos_weight() {
        let mut p = PolicySet::default();
        p.default_preference = 1.0;
        let mut f = flow();
        f.min_rate = 1e9;
        let s = dynamic_score(&f, &unit_report(), &p, &TerminalCapabilities::default(), &SelectionConfig::default());
        assert!((s - 0.7).abs() < 1e-12);
    }

    #[test]
    fn hand_evaluated_score() {
        let mut r = unit_report();
        r.quality = 0.6875;
        r.relative_resources = 0.6;
        let mut caps = TerminalCapabilities::default();
        caps.energy_cost.insert(Rat::from("WLAN"), 0.2);
        let s = dynamic_score(&flow(), &r, &PolicySet::default(), &caps, &SelectionConfig::default());
        assert!((s - 0.75625).abs() < 1e-12, "{s}");
    }

    #[test]
    fn singleton_list() {
        let r = report("OpA", "WLAN", "a", 0.1);
        let cfg = SelectionConfig::default();
        let l = select_access(&flow(), std::slice::from_ref(&r), &PolicySet::default(), &TerminalCapabilities::default(), &cfg, SimTime(5));
        assert_eq!(l.entries.len(), 1);
        let expect = dynamic_score(&flow(), &r, &PolicySet::default(), &TerminalCapabilities::default(), &cfg);
        assert_eq!(l.entries[0].score, expect);
        assert_eq!(l.decided_at, SimTime(5));
    }

    #[test]
    fn overloaded_cell_removed_even_if_best() {
        let mut hot = report("OpA", "WLAN", "hot", 0.95);
        hot.quality = 1.0;
        hot.relative_resources = 1.0;
        let cool = report("OpB", "UMTS", "cool", 0.5);
        let l = select_access(&flow(), &[hot, cool], &PolicySet::default(), &TerminalCapabilities::default(), &SelectionConfig::default(), SimTime(0));
        assert_eq!(l.entries.len(), 1);
        assert_eq!(l.entries[0].candidate.cell_id, "cool");
    }

    #[test]
    fn serving_wins_exact_ties() {
        let a = report("OpA", "WLAN", "a", 0.1);
        let b = report("OpB", "WLAN", "b", 0.1);
        let mut f = flow();
        let cfg = SelectionConfig::default();
        let l = select_access(&f, &[a.clone(), b.clone()], &PolicySet::default(), &TerminalCapabilities::default(), &cfg, SimTime(0));
        assert_eq!(l.entries[0].candidate.cell_id, "a");
        f.serving = Some(b.candidate.clone());
        let l = select_access(&f, &[a, b], &PolicySet::default(), &TerminalCapabilities::default(), &cfg, SimTime(0));
        assert_eq!(l.entries[0].candidate.cell_id, "b");
    }
}
