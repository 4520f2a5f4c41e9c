//! Discrete-event core, the simulated radio world and scenario ingestion.

mod clock;
mod env;
mod runtime;
mod scenario;
mod trace;

pub use clock::{Handle, Scheduler, SimTime};
pub use env::{apply_action, ramp_points, Action, Cell, CellField, EnvChange, Environment, FlowSpec};
pub use runtime::{Ctx, Wakeup};
pub use scenario::{
    load_scenario, parse_scenario, MobilityConfig, MrrmLocation, NodeRole, Scenario, ScenarioAction,
    ScenarioError, TrgConfig,
};
pub use trace::{format_value, parse_line, RecordKind, Trace, TraceRecord};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("cannot schedule at {at}, clock is already at {now}")]
    ScheduleInPast { at: SimTime, now: SimTime },
    #[error("unknown target `{0}`")]
    UnknownTarget(String),
    #[error("ramp on `{0}` needs a positive duration")]
    NonPositiveRamp(String),
    #[error("cell `{cell}`: {why}")]
    InvalidValue { cell: String, why: String },
    #[error("cell `{cell}` would use {used} of {total} resources")]
    ResourceOverflow { cell: String, used: u64, total: u64 },
    #[error("cell `{cell}` has {free} free resources, {demand} requested")]
    InsufficientResources { cell: String, demand: u64, free: u64 },
    #[error("invariant violated: {0}")]
    Invariant(String),
}
