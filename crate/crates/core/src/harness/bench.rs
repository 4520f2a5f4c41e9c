//! Wall-clock cost of filtering and delivering one event on a standalone bus.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::simenv::SimTime;
use crate::trg::{types, Bus, Comparator, Event, Predicate, Subscription};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub subscribers: usize,
    pub events: usize,
    pub deliveries: u64,
    pub min_ms: f64,
    pub median_ms: f64,
    pub p99_ms: f64,
    pub mean_ms: f64,
}

const TYPES: [&str; 6] = [
    types::LINK_QUALITY_REPORT,
    types::LINK_DOWN,
    types::LINK_UP,
    types::CANDIDATE_REPORT,
    types::HANDOVER_COMPLETE,
    types::POLICY_CHANGED,
];

fn subscription(i: usize) -> Subscription {
    let consumer = format!("c{i}");
    match i % 4 {
        0 => Subscription::new(consumer, [TYPES[i % TYPES.len()]]),
        1 => Subscription::new(consumer, ["link-*"]).from_source("gll"),
        2 => Subscription::new(consumer, [types::CANDIDATE_REPORT, types::LINK_QUALITY_REPORT])
            .when(Predicate::new("quality", Comparator::Lt, 0.5)),
        _ => Subscription::new(consumer, ["*"])
            .when(Predicate::new("load", Comparator::Ge, 0.2))
            .when(Predicate::new("cell", Comparator::Ne, "umts1")),
    }
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    let idx = ((sorted.len() as f64 - 1.0) * p).round() as usize;
    sorted[idx.min(sorted.len() - 1)]
}

pub fn bench_trg(subscribers: usize, events: usize) -> BenchSummary {
    let mut bus = Bus::new();
    for i in 0..subscribers {
        bus.subscribe(subscription(i)).expect("benchmark subscriptions are well formed");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut samples = Vec::with_capacity(events);
    for k in 0..events {
        let ty = TYPES[rng.gen_range(0..TYPES.len())];
        let ev = Event::new(ty, if k % 2 == 0 { "gll" } else { "mrrm" })
            .with("cell", if k % 3 == 0 { "umts1" } else { "wlan1" })
            .with("quality", rng.gen::<f64>())
            .with("load", rng.gen::<f64>());
        let start = Instant::now();
        let publication = bus.publish(ev, SimTime(k as u64));
        let elapsed = start.elapsed();
        std::hint::black_box(publication.ok());
        samples.push(elapsed.as_secs_f64() * 1e3);
    }
    let deliveries = bus.counters().delivered;
    if samples.is_empty() {
        return BenchSummary {
            subscribers,
            events,
            deliveries,
            min_ms: 0.0,
            median_ms: 0.0,
            p99_ms: 0.0,
            mean_ms: 0.0,
        };
    }
    let mean_ms = samples.iter().sum::<f64>() / samples.len() as f64;
    samples.sort_by(f64::total_cmp);
    BenchSummary {
        subscribers,
        events,
        deliveries,
        min_ms: samples[0],
        median_ms: percentile(&samples, 0.5),
        p99_ms: percentile(&samples, 0.99),
        mean_ms,
    }
}
