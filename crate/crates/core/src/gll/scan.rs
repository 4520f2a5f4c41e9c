use std::collections::BTreeSet;

use super::{AccessCandidate, AccessHistory, Rat, ScanConfig};
use crate::simenv::Environment;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScanMode {
    /// Probe only previously used `(rat, frequency)` pairs.
    Targeted,
    /// Probe every cell of every supported RAT.
    Full,
}

impl ScanMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ScanMode::Targeted => "targeted",
            ScanMode::Full => "full",
        }
    }

    pub fn parse(s: &str) -> Option<ScanMode> {
        match s {
            "targeted" => Some(ScanMode::Targeted),
            "full" => Some(ScanMode::Full),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanOutcome {
    pub mode: ScanMode,
    pub candidates: Vec<AccessCandidate>,
    pub probes: u64,
    pub cost_ms: u64,
    pub energy: f64,
}

/// Probes the environment. Targeted results follow history order (cells on
/// one entry sorted by operator, then cell); full results are sorted by
/// `(rat, operator, cell)`.
pub fn scan(
    mode: ScanMode,
    history: &AccessHistory,
    env: &Environment,
    supports: impl Fn(&Rat) -> bool,
    cfg: &ScanConfig,
) -> ScanOutcome {
    let mut out = ScanOutcome {
        mode,
        candidates: Vec::new(),
        probes: 0,
        cost_ms: 0,
        energy: 0.0,
    };
    match mode {
        ScanMode::Targeted => {
            for (rat, freq) in history.entries() {
                if !supports(rat) {
                    continue;
                }
                out.probes += 1;
                out.cost_ms += cfg.targeted_probe_ms;
                out.energy += cfg.energy(rat);
                let mut found: Vec<AccessCandidate> = env
                    .cells()
                    .filter(|c| c.covered && &c.rat == rat && &c.frequency == freq)
                    .map(|c| c.candidate())
                    .collect();
                found.sort_by(|a, b| (&a.operator_id, &a.cell_id).cmp(&(&b.operator_id, &b.cell_id)));
                for c in found {
                    if !out.candidates.contains(&c) {
                        out.candidates.push(c);
                    }
                }
            }
        }
        ScanMode::Full => {
            let mut rats = BTreeSet::new();
            for cell in env.cells().filter(|c| supports(&c.rat)) {
                rats.insert(cell.rat.clone());
                out.probes += 1;
                out.energy += cfg.energy(&cell.rat);
                if cell.covered {
                    out.candidates.push(cell.candidate());
                }
            }
            out.cost_ms = rats.len() as u64 * cfg.full_per_rat_ms;
            out.candidates.sort_by(|a, b| {
                (&a.rat, &a.operator_id, &a.cell_id).cmp(&(&b.rat, &b.operator_id, &b.cell_id))
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simenv::Cell;

    fn env() -> Environment {
        let mut off = Cell::new("wlan9", "WLAN", "OpC", "ch11", 10, 1e6);
        off.covered = false;
        Environment::new([
            Cell::new("wlan1", "WLAN", "OpA", "ch6", 10, 1e6),
            Cell::new("umts1", "UMTS", "OpB", "f1", 10, 1e6),
            Cell::new("gsm1", "GSM", "OpA", "900", 10, 1e5),
            off,
        ])
    }

    fn history(pairs: &[(&str, &str)]) -> AccessHistory {
        AccessHistory::from_entries(pairs.iter().map(|(r, f)| (Rat::new(*r), f.to_string())), 16)
    }

    #[test]
    fn targeted_finds_remembered_frequency() {
        let out = scan(ScanMode::Targeted, &history(&[("WLAN", "ch6")]), &env(), |_| true, &ScanConfig::default());
        assert_eq!(out.candidates.len(), 1);
        assert_eq!(out.candidates[0].cell_id, "wlan1");
        assert_eq!((out.probes, out.cost_ms), (1, 50));
    }

    #[test]
    fn empty_history_is_vacuous() {
        let out = scan(ScanMode::Targeted, &AccessHistory::default(), &env(), |_| true, &ScanConfig::default());
        assert!(out.candidates.is_empty());
        assert_eq!(out.cost_ms, 0);
    }

    #[test]
    fn full_returns_covered_sorted() {
        let out = scan(ScanMode::Full, &AccessHistory::default(), &env(), |_| true, &ScanConfig::default());
        let ids: Vec<_> = out.candidates.iter().map(|c| c.cell_id.as_str()).collect();
        assert_eq!(ids, vec!["gsm1", "umts1", "wlan1"]);
        assert_eq!(out.probes, 4);
        assert_eq!(out.cost_ms, 600);
    }

    #[test]
    fn unsupported_rats_not_probed() {
        let out = scan(ScanMode::Full, &AccessHistory::default(), &env(), |r| r.as_str() == "WLAN", &ScanConfig::default());
        assert_eq!(out.candidates.len(), 1);
        assert_eq!(out.cost_ms, 200);
    }

    #[test]
    fn targeted_subset_of_full() {
        let e = env();
        let h = history(&[("UMTS", "f1"), ("WLAN", "ch11"), ("WLAN", "ch6")]);
        let t = scan(ScanMode::Targeted, &h, &e, |_| true, &ScanConfig::default());
        let f = scan(ScanMode::Full, &h, &e, |_| true, &ScanConfig::default());
        assert_eq!(t.candidates.iter().map(|c| c.cell_id.as_str()).collect::<Vec<_>>(), vec!["umts1", "wlan1"]);
        assert!(t.candidates.iter().all(|c| f.candidates.contains(c)));
    }
}
