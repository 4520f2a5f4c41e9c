//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use multiaccess::gll::{
    map_link_quality, AccessCandidate, LinkMeasurement, LinkQualityReport, MappingConfig, Rat, ServiceClass,
};
use multiaccess::harness::{run_scenario, RunOutput};
use multiaccess::mrrm::{Flow, PolicySet, SelectionConfig, SelectionWeights, TerminalCapabilities};
use multiaccess::simenv::{load_scenario, Scenario, SimTime};
use rand::seq::SliceRandom;
use rand::Rng;

pub const SHIPPED: [&str; 10] = [
    "attenuation_sweep",
    "cadence_background",
    "cadence_realtime",
    "forced_failure",
    "policy_change",
    "scan_full",
    "scan_targeted",
    "static_single",
    "table1_mn",
    "table1_mr",
];

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(format!("{name}.scenario"))
}

pub fn shipped(name: &str) -> Scenario {
    load_scenario(scenario_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn run(name: &str) -> RunOutput {
    run_scenario(shipped(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Times of periodic report batches, taken from the first report of each batch.
pub fn periodic_batch_times(out: &RunOutput) -> Vec<u64> {
    out.trace
        .records()
        .iter()
        .filter(|r| {
            r.attrs.get("event").and_then(|v| v.as_str()) == Some("link-quality-report")
                && r.attrs.get("p.periodic").and_then(|v| v.as_bool()) == Some(true)
                && r.attrs.get("p.batch_index").and_then(|v| v.as_f64()) == Some(0.0)
        })
        .map(|r| r.at.0)
        .collect()
}

pub fn events<'a>(out: &'a RunOutput, event: &'a str) -> impl Iterator<Item = &'a multiaccess::simenv::TraceRecord> {
    out.trace
        .records()
        .iter()
        .filter(move |r| r.attrs.get("event").and_then(|v| v.as_str()) == Some(event) && r.kind.as_str() == "event")
}

// ---------------------------------------------------------------------------
// Selection instances and the brute-force oracle.

pub struct Instance {
    pub flows: Vec<Flow<f64>>,
    pub reports: Vec<LinkQualityReport<f64>>,
    pub policies: PolicySet<f64>,
    pub caps: TerminalCapabilities<f64>,
    pub cfg: SelectionConfig<f64>,
}

const RATS: [&str; 4] = ["GSM", "LAN", "UMTS", "WLAN"];
const OPS: [&str; 3] = ["OpA", "OpB", "OpC"];
const CLASSES: [ServiceClass; 3] = [ServiceClass::RealTime, ServiceClass::Interactive, ServiceClass::Background];

fn pick<'a, R: Rng>(rng: &mut R, xs: &'a [&'a str]) -> &'a str {
    xs.choose(rng).copied().expect("non-empty")
}

/// Coarse grids make exact score ties common enough to exercise tie-breaking.
fn grid<R: Rng>(rng: &mut R, steps: u32, max: f64) -> f64 {
    f64::from(rng.gen_range(0..=steps)) * max / f64::from(steps)
}

pub fn random_measurement<R: Rng>(rng: &mut R, i: usize) -> LinkMeasurement<f64> {
    let total = rng.gen_range(1..=50u64);
    LinkMeasurement {
        candidate: AccessCandidate::new(pick(rng, &RATS), pick(rng, &OPS), &format!("c{i}"), &format!("f{}", i % 2)),
        residual_error_rate: grid(rng, 10, 0.2),
        achievable_rate: grid(rng, 8, 4e6),
        delay: grid(rng, 6, 300.0),
        load: *[0.0, 0.25, 0.5, 0.75, 0.85, 0.9, 0.95, 1.0].choose(rng).expect("non-empty"),
        covered: rng.gen_bool(0.9),
        taken_at: SimTime(0),
        free_resources: rng.gen_range(0..=total),
        security_level: rng.gen_range(0..=3),
        cost_per_mb: grid(rng, 4, 2.0),
    }
}

pub fn random_instance<R: Rng>(rng: &mut R) -> Instance {
    let mapping = MappingConfig::default();
    let class = *CLASSES.choose(rng).expect("non-empty");
    let n = rng.gen_range(0..=6);
    let reports: Vec<_> = (0..n)
        .map(|i| map_link_quality(&random_measurement(rng, i), &mapping, class))
        .collect();

    let nf = rng.gen_range(1..=4);
    let flows = (0..nf)
        .map(|i| {
            let mut f = Flow::new(
                &format!("f{i}"),
                *CLASSES.choose(rng).expect("non-empty"),
                grid(rng, 4, 2e6),
                grid(rng, 4, 400.0),
                grid(rng, 4, 0.2),
                rng.gen_range(1..=3),
            );
            if !reports.is_empty() && rng.gen_bool(0.5) {
                f.serving = Some(reports[rng.gen_range(0..reports.len())].candidate.clone());
            }
            f
        })
        .collect();

    let mut policies = PolicySet::default();
    for op in OPS {
        match rng.gen_range(0..4) {
            0 => {
                policies.allowed_operators.insert(op.to_string());
            }
            1 => {
                policies.denied_operators.insert(op.to_string());
            }
            _ => {}
        }
    }
    policies.min_security_level = rng.gen_range(0..=2);
    policies.max_cost_per_mb = rng.gen_bool(0.3).then(|| grid(rng, 4, 2.0));
    policies.roaming_allowed = rng.gen_bool(0.6);
    policies.home_operator = rng.gen_bool(0.5).then(|| pick(rng, &OPS).to_string());
    policies.default_preference = grid(rng, 4, 1.0);
    for _ in 0..rng.gen_range(0..4) {
        let (op, rat) = (pick(rng, &OPS), pick(rng, &RATS));
        policies.set_preference(op, &Rat::from(rat), grid(rng, 4, 1.0));
    }

    let mut caps = TerminalCapabilities::default();
    if rng.gen_bool(0.5) {
        caps.supported_rats = RATS.iter().filter(|_| rng.gen_bool(0.7)).map(|r| Rat::from(*r)).collect();
    }
    for r in RATS {
        if rng.gen_bool(0.5) {
            caps.energy_cost.insert(Rat::from(r), grid(rng, 4, 1.0));
        }
    }

    let raw: Vec<f64> = (0..5).map(|_| f64::from(rng.gen_range(0..=4u32))).collect();
    let sum: f64 = raw.iter().sum::<f64>().max(1.0);
    let cfg = SelectionConfig {
        weights: SelectionWeights {
            qos: raw[0] / sum,
            link: raw[1] / sum,
            cell: raw[2] / sum,
            terminal: raw[3] / sum,
            policy: raw[4] / sum,
        },
        load_threshold: *[0.5, 0.75, 0.9, 1.0].choose(rng).expect("non-empty"),
        hysteresis_delta: 0.05,
        quality_floor: 0.1,
    };
    Instance {
        flows,
        reports,
        policies,
        caps,
        cfg,
    }
}

/// Filter + score written out directly from the selection rules, without
/// sorting: admissibility, hard termination, weighted sum, then a linear scan
/// for the maximum with the serving-first and lexicographic tie-breaks.
pub fn oracle_head(inst: &Instance, flow: &Flow<f64>) -> Option<AccessCandidate> {
    let p = &inst.policies;
    let w = &inst.cfg.weights;
    let mut best: Option<(f64, &AccessCandidate)> = None;
    for r in &inst.reports {
        let c = &r.candidate;
        let m = &r.raw;
        let op = c.operator_id.as_str();
        let allowed = !p.denied_operators.contains(op)
            && (p.allowed_operators.is_empty() || p.allowed_operators.contains(op));
        let roaming = p.roaming_allowed || p.home_operator.as_deref().is_none_or(|h| h == op);
        let cost = p.max_cost_per_mb.is_none_or(|cap| m.cost_per_mb <= cap);
        let supported = inst.caps.supported_rats.is_empty() || inst.caps.supported_rats.contains(&c.rat);
        if !(allowed && roaming && cost && supported && m.security_level >= p.min_security_level) {
            continue;
        }
        if m.load >= inst.cfg.load_threshold {
            continue;
        }
        let qos = m.covered
            && m.achievable_rate >= flow.min_rate
            && m.delay <= flow.max_delay
            && m.residual_error_rate <= flow.max_loss;
        let pref = p
            .static_preference
            .iter()
            .find(|e| e.operator == op && e.rat == c.rat)
            .map_or(p.default_preference, |e| e.preference);
        let energy = inst.caps.energy_cost.get(&c.rat).copied().unwrap_or(0.0);
        let cell = (1.0 - m.load).clamp(0.0, 1.0);
        let score = w.qos * if qos { 1.0 } else { 0.0 }
            + w.link * r.quality
            + w.cell * cell
            + w.terminal * (1.0 - energy)
            + w.policy * pref;
        let better = match best {
            None => true,
            Some((bs, bc)) => {
                if score != bs {
                    score > bs
                } else {
                    let serving = flow.serving.as_ref();
                    match (Some(c) == serving, Some(bc) == serving) {
                        (true, false) => true,
                        (false, true) => false,
                        _ => (op, c.rat.as_str(), c.cell_id.as_str(), c.frequency.as_str())
                            < (
                                bc.operator_id.as_str(),
                                bc.rat.as_str(),
                                bc.cell_id.as_str(),
                                bc.frequency.as_str(),
                            ),
                    }
                }
            }
        };
        if better {
            best = Some((score, c));
        }
    }
    best.map(|(_, c)| c.clone())
}

// ---------------------------------------------------------------------------
// Link metric oracle.

/// Quality recomputed from the mapping definition.
pub fn oracle_quality(m: &LinkMeasurement<f64>, cfg: &MappingConfig<f64>, class: ServiceClass) -> f64 {
    if !m.covered || m.achievable_rate <= 0.0 {
        return 0.0;
    }
    let reference = match class {
        ServiceClass::RealTime => cfg.reference_rate.real_time,
        ServiceClass::Interactive => cfg.reference_rate.interactive,
        ServiceClass::Background => cfg.reference_rate.background,
    };
    let e = 1.0 - (m.residual_error_rate / cfg.fer_max).min(1.0);
    let r = (m.achievable_rate / reference).min(1.0);
    let d = (1.0 - m.delay / cfg.delay_max).max(0.0);
    let l = 1.0 - m.load;
    let w = &cfg.weights;
    (w.error * e + w.rate * r + w.delay * d + w.load * l).clamp(0.0, 1.0)
}

pub fn rat_set(rats: &[&str]) -> BTreeSet<Rat> {
    rats.iter().map(|r| Rat::from(*r)).collect()
}
