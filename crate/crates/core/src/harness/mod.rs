//! Scenario runner, mobility executor stub, trace analysis and the trigger
//! bus benchmark.

mod bench;
mod breakdown;
mod mobility;
mod stats;
mod world;

use std::path::Path;

pub use bench::{bench_trg, BenchSummary};
pub use breakdown::{report_breakdown, BreakdownReport};
pub use mobility::{MobilityDelayModel, MobilityExecutor, MOBILITY_CONSUMER};
pub use stats::{compute_stats, RunStats, PING_PONG_WINDOW_MS};
pub use world::{run_scenario, RunError, RunOutput, Simulation, ENV_SOURCE};

use crate::simenv::{parse_line, TraceRecord};

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("cannot read trace {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed trace record")]
    Malformed { path: String, line: usize },
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<Vec<TraceRecord>, TraceError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| TraceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            parse_line(l).ok_or_else(|| TraceError::Malformed {
                path: path.display().to_string(),
                line: i + 1,
            })
        })
        .collect()
}
