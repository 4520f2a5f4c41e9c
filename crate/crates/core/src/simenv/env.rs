use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{SimError, SimTime};
use crate::gll::{AccessCandidate, Rat, ServiceClass};
use crate::mrrm::Flow;
use crate::trg::{Payload, Value};

fn default_true() -> bool {
    true
}

/// One radio cell (or wired attachment point) of the simulated world.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cell {
    pub cell_id: String,
    pub rat: Rat,
    pub operator_id: String,
    pub frequency: String,
    #[serde(default = "default_true")]
    pub covered: bool,
    /// Codes, slots or channels.
    pub total_resources: u64,
    /// Background usage; flows mapped onto the cell add to it.
    #[serde(default)]
    pub used_resources: u64,
    #[serde(default)]
    pub raw_error_rate: f64,
    /// bit/s available to a new flow.
    pub achievable_rate: f64,
    /// One-way link delay, ms.
    #[serde(default)]
    pub base_delay: f64,
    #[serde(default)]
    pub security_level: u8,
    #[serde(default)]
    pub cost_per_mb: f64,
    #[serde(skip)]
    reserved: BTreeMap<String, u64>,
}

impl Cell {
    pub fn new(cell_id: &str, rat: &str, operator_id: &str, frequency: &str, total_resources: u64, achievable_rate: f64) -> Self {
        Cell {
            cell_id: cell_id.into(),
            rat: Rat::new(rat),
            operator_id: operator_id.into(),
            frequency: frequency.into(),
            covered: true,
            total_resources,
            used_resources: 0,
            raw_error_rate: 0.0,
            achievable_rate,
            base_delay: 0.0,
            security_level: 0,
            cost_per_mb: 0.0,
            reserved: BTreeMap::new(),
        }
    }

    pub fn candidate(&self) -> AccessCandidate {
        AccessCandidate {
            rat: self.rat.clone(),
            operator_id: self.operator_id.clone(),
            cell_id: self.cell_id.clone(),
            frequency: self.frequency.clone(),
        }
    }

    /// Background usage plus every flow reservation.
    pub fn total_used(&self) -> u64 {
        self.used_resources + self.reserved.values().sum::<u64>()
    }

    pub fn free_resources(&self) -> u64 {
        self.total_resources.saturating_sub(self.total_used())
    }

    pub fn load(&self) -> f64 {
        if self.total_resources == 0 {
            return 1.0;
        }
        (self.total_used() as f64 / self.total_resources as f64).min(1.0)
    }

    pub fn reservation(&self, flow_id: &str) -> Option<u64> {
        self.reserved.get(flow_id).copied()
    }

    pub fn reservations(&self) -> impl Iterator<Item = (&str, u64)> {
        self.reserved.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Maps `demand` units of `flow_id` onto the cell. Re-reserving an
    /// existing flow is a no-op.
    pub fn reserve(&mut self, flow_id: &str, demand: u64) -> Result<(), SimError> {
        if self.reserved.contains_key(flow_id) {
            return Ok(());
        }
        if demand > self.free_resources() {
            return Err(SimError::InsufficientResources {
                cell: self.cell_id.clone(),
                demand,
                free: self.free_resources(),
            });
        }
        self.reserved.insert(flow_id.to_string(), demand);
        Ok(())
    }

    pub fn release(&mut self, flow_id: &str) -> Option<u64> {
        self.reserved.remove(flow_id)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.cell_id.is_empty() || self.rat.as_str().is_empty() || self.operator_id.is_empty() || self.frequency.is_empty() {
            return Err("cell_id, rat, operator_id and frequency must be non-empty".into());
        }
        if self.total_resources == 0 {
            return Err("total_resources must be positive".into());
        }
        if self.used_resources > self.total_resources {
            return Err(format!(
                "used_resources {} exceeds total_resources {}",
                self.used_resources, self.total_resources
            ));
        }
        if !(0.0..=1.0).contains(&self.raw_error_rate) {
            return Err(format!("raw_error_rate {} outside [0,1]", self.raw_error_rate));
        }
        if !(self.achievable_rate >= 0.0) || !self.achievable_rate.is_finite() {
            return Err(format!("achievable_rate {} must be non-negative", self.achievable_rate));
        }
        if !(self.base_delay >= 0.0) {
            return Err(format!("base_delay {} must be non-negative", self.base_delay));
        }
        if self.security_level > 3 {
            return Err(format!("security_level {} outside 0..=3", self.security_level));
        }
        if !(self.cost_per_mb >= 0.0) {
            return Err(format!("cost_per_mb {} must be non-negative", self.cost_per_mb));
        }
        Ok(())
    }

    fn set_field(&mut self, field: CellField, value: f64) -> Result<(), SimError> {
        let bad = |why: String| SimError::InvalidValue {
            cell: self.cell_id.clone(),
            why,
        };
        let integer = |v: f64| -> Result<u64, SimError> {
            if v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 {
                Ok(v as u64)
            } else {
                Err(bad(format!("{} needs a non-negative integer, got {v}", field.as_str())))
            }
        };
        match field {
            CellField::UsedResources => {
                let used = integer(value)?;
                let reserved: u64 = self.reserved.values().sum();
                if used + reserved > self.total_resources {
                    return Err(SimError::ResourceOverflow {
                        cell: self.cell_id.clone(),
                        used: used + reserved,
                        total: self.total_resources,
                    });
                }
                self.used_resources = used;
            }
            CellField::TotalResources => {
                let total = integer(value)?;
                if total == 0 || self.total_used() > total {
                    return Err(SimError::ResourceOverflow {
                        cell: self.cell_id.clone(),
                        used: self.total_used(),
                        total,
                    });
                }
                self.total_resources = total;
            }
            CellField::RawErrorRate => {
                if !(0.0..=1.0).contains(&value) {
                    return Err(bad(format!("raw_error_rate {value} outside [0,1]")));
                }
                self.raw_error_rate = value;
            }
            CellField::AchievableRate => {
                if !(value >= 0.0) {
                    return Err(bad(format!("achievable_rate {value} negative")));
                }
                self.achievable_rate = value;
            }
            CellField::BaseDelay => {
                if !(value >= 0.0) {
                    return Err(bad(format!("base_delay {value} negative")));
                }
                self.base_delay = value;
            }
            CellField::SecurityLevel => {
                let level = integer(value)?;
                if level > 3 {
                    return Err(bad(format!("security_level {level} outside 0..=3")));
                }
                self.security_level = level as u8;
            }
            CellField::CostPerMb => {
                if !(value >= 0.0) {
                    return Err(bad(format!("cost_per_mb {value} negative")));
                }
                self.cost_per_mb = value;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CellField {
    UsedResources,
    TotalResources,
    RawErrorRate,
    AchievableRate,
    BaseDelay,
    SecurityLevel,
    CostPerMb,
}

impl CellField {
    pub fn parse(s: &str) -> Option<CellField> {
        Some(match s {
            "used_resources" => CellField::UsedResources,
            "total_resources" => CellField::TotalResources,
            "raw_error_rate" => CellField::RawErrorRate,
            "achievable_rate" => CellField::AchievableRate,
            "base_delay" => CellField::BaseDelay,
            "security_level" => CellField::SecurityLevel,
            "cost_per_mb" => CellField::CostPerMb,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CellField::UsedResources => "used_resources",
            CellField::TotalResources => "total_resources",
            CellField::RawErrorRate => "raw_error_rate",
            CellField::AchievableRate => "achievable_rate",
            CellField::BaseDelay => "base_delay",
            CellField::SecurityLevel => "security_level",
            CellField::CostPerMb => "cost_per_mb",
        }
    }

    /// Fields a quality ramp may interpolate.
    pub fn rampable(self) -> bool {
        matches!(
            self,
            CellField::RawErrorRate | CellField::AchievableRate | CellField::BaseDelay
        )
    }
}

/// A flow as declared in a scenario; `serving` names a cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub flow_id: String,
    pub service_class: ServiceClass,
    #[serde(default)]
    pub min_rate: f64,
    #[serde(default = "FlowSpec::unbounded_delay")]
    pub max_delay: f64,
    #[serde(default = "FlowSpec::unbounded_loss")]
    pub max_loss: f64,
    #[serde(default = "FlowSpec::unit_demand")]
    pub resource_demand: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub serving: Option<String>,
}

impl FlowSpec {
    fn unbounded_delay() -> f64 {
        1e9
    }
    fn unbounded_loss() -> f64 {
        1.0
    }
    fn unit_demand() -> u64 {
        1
    }

    pub fn to_flow(&self) -> Flow<f64> {
        Flow::new(
            &self.flow_id,
            self.service_class,
            self.min_rate,
            self.max_delay,
            self.max_loss,
            self.resource_demand,
        )
    }

    pub fn to_payload(&self) -> Payload {
        let mut p = Payload::new();
        p.insert("flow".into(), Value::from(&self.flow_id));
        p.insert("service_class".into(), self.service_class.as_str().into());
        p.insert("min_rate".into(), self.min_rate.into());
        p.insert("max_delay".into(), self.max_delay.into());
        p.insert("max_loss".into(), self.max_loss.into());
        p.insert("resource_demand".into(), self.resource_demand.into());
        p
    }

    pub fn from_payload(p: &Payload) -> Option<FlowSpec> {
        let num = |k: &str| p.get(k).and_then(Value::as_f64);
        Some(FlowSpec {
            flow_id: p.get("flow")?.as_str()?.to_string(),
            service_class: ServiceClass::parse(p.get("service_class")?.as_str()?)?,
            min_rate: num("min_rate")?,
            max_delay: num("max_delay")?,
            max_loss: num("max_loss")?,
            resource_demand: num("resource_demand")? as u64,
            serving: None,
        })
    }
}

/// A validated, typed environment mutation.
#[derive(Clone, Debug, PartialEq)]
pub enum Action {
    SetCellField { cell: String, field: CellField, value: f64 },
    CellUp { cell: String },
    CellDown { cell: String },
    FlowArrival(FlowSpec),
    FlowDeparture { flow: String },
    LinkDownCable { cell: String },
    RouterAdvertisement { cell: String },
    QualityRamp {
        cell: String,
        field: CellField,
        from: f64,
        to: f64,
        duration_ms: u64,
        step_ms: Option<u64>,
    },
    /// Trigger injected by an upper-layer producer (application, policy manager).
    UpperTrigger { event_type: String, source: String, payload: Payload },
}

impl Action {
    pub fn kind(&self) -> &'static str {
        match self {
            Action::SetCellField { .. } => "set-cell-field",
            Action::CellUp { .. } => "cell-up",
            Action::CellDown { .. } => "cell-down",
            Action::FlowArrival(_) => "flow-arrival",
            Action::FlowDeparture { .. } => "flow-departure",
            Action::LinkDownCable { .. } => "link-down-cable",
            Action::RouterAdvertisement { .. } => "emit-router-advertisement",
            Action::QualityRamp { .. } => "quality-ramp",
            Action::UpperTrigger { .. } => "upper-trigger",
        }
    }

    pub fn target(&self) -> &str {
        match self {
            Action::SetCellField { cell, .. }
            | Action::CellUp { cell }
            | Action::CellDown { cell }
            | Action::LinkDownCable { cell }
            | Action::RouterAdvertisement { cell }
            | Action::QualityRamp { cell, .. } => cell,
            Action::FlowArrival(spec) => &spec.flow_id,
            Action::FlowDeparture { flow } => flow,
            Action::UpperTrigger { event_type, .. } => event_type,
        }
    }
}

/// What an applied action changed, for the link layer and MRRM to consume.
#[derive(Clone, Debug, PartialEq)]
pub enum EnvChange {
    FieldChanged { cell: String, field: CellField, value: f64 },
    CoverageChanged { cell: String, covered: bool, cable: bool },
    RouterAdvertisement { cell: String },
    FlowArrived(FlowSpec),
    FlowDeparted { flow: String },
    RampPlanned { cell: String, field: CellField, points: Vec<(SimTime, f64)> },
    UpperTrigger { event_type: String, source: String, payload: Payload },
}

/// Cells of the simulated world, keyed and iterated by id.
#[derive(Clone, Debug, Default)]
pub struct Environment {
    cells: BTreeMap<String, Cell>,
}

impl Environment {
    pub fn new(cells: impl IntoIterator<Item = Cell>) -> Self {
        Environment {
            cells: cells.into_iter().map(|c| (c.cell_id.clone(), c)).collect(),
        }
    }

    pub fn cell(&self, id: &str) -> Option<&Cell> {
        self.cells.get(id)
    }

    pub fn cell_mut(&mut self, id: &str) -> Option<&mut Cell> {
        self.cells.get_mut(id)
    }

    pub fn cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells.values()
    }

    pub fn is_covered(&self, id: &str) -> bool {
        self.cells.get(id).is_some_and(|c| c.covered)
    }

    fn existing(&mut self, id: &str) -> Result<&mut Cell, SimError> {
        self.cells
            .get_mut(id)
            .ok_or_else(|| SimError::UnknownTarget(id.to_string()))
    }

    /// Checks used ≤ total on every cell.
    pub fn check_conservation(&self) -> Result<(), SimError> {
        for c in self.cells.values() {
            if c.total_used() > c.total_resources {
                return Err(SimError::ResourceOverflow {
                    cell: c.cell_id.clone(),
                    used: c.total_used(),
                    total: c.total_resources,
                });
            }
        }
        Ok(())
    }
}

/// Interpolation points for a linear ramp sampled every `step_ms`, ending
/// exactly at `to` after `duration_ms`.
pub fn ramp_points(start: SimTime, from: f64, to: f64, duration_ms: u64, step_ms: u64) -> Vec<(SimTime, f64)> {
    let step = step_ms.max(1);
    let steps = duration_ms.div_ceil(step);
    (1..=steps)
        .map(|k| {
            let elapsed = (k * step).min(duration_ms);
            let frac = elapsed as f64 / duration_ms as f64;
            (start + elapsed, from + (to - from) * frac)
        })
        .collect()
}

/// Applies one action at `now`. `default_step_ms` is the link layer's current
/// reporting interval, used when a ramp names no step of its own.
pub fn apply_action(
    env: &mut Environment,
    action: &Action,
    now: SimTime,
    default_step_ms: u64,
) -> Result<Vec<EnvChange>, SimError> {
    let mut out = Vec::new();
    match action {
        Action::SetCellField { cell, field, value } => {
            env.existing(cell)?.set_field(*field, *value)?;
            out.push(EnvChange::FieldChanged {
                cell: cell.clone(),
                field: *field,
                value: *value,
            });
        }
        Action::CellUp { cell } | Action::CellDown { cell } | Action::LinkDownCable { cell } => {
            let covered = matches!(action, Action::CellUp { .. });
            let c = env.existing(cell)?;
            if c.covered != covered {
                c.covered = covered;
                out.push(EnvChange::CoverageChanged {
                    cell: cell.clone(),
                    covered,
                    cable: matches!(action, Action::LinkDownCable { .. }),
                });
            }
        }
        Action::RouterAdvertisement { cell } => {
            env.existing(cell)?;
            out.push(EnvChange::RouterAdvertisement { cell: cell.clone() });
        }
        Action::FlowArrival(spec) => out.push(EnvChange::FlowArrived(spec.clone())),
        Action::FlowDeparture { flow } => out.push(EnvChange::FlowDeparted { flow: flow.clone() }),
        Action::QualityRamp {
            cell,
            field,
            from,
            to,
            duration_ms,
            step_ms,
        } => {
            env.existing(cell)?;
            if *duration_ms == 0 {
                return Err(SimError::NonPositiveRamp(cell.clone()));
            }
            if !field.rampable() {
                return Err(SimError::InvalidValue {
                    cell: cell.clone(),
                    why: format!("{} cannot be ramped", field.as_str()),
                });
            }
            let points = ramp_points(now, *from, *to, *duration_ms, step_ms.unwrap_or(default_step_ms));
            env.existing(cell)?.set_field(*field, *from)?;
            out.push(EnvChange::FieldChanged {
                cell: cell.clone(),
                field: *field,
                value: *from,
            });
            out.push(EnvChange::RampPlanned {
                cell: cell.clone(),
                field: *field,
                points,
            });
        }
        Action::UpperTrigger {
            event_type,
            source,
            payload,
        } => out.push(EnvChange::UpperTrigger {
            event_type: event_type.clone(),
            source: source.clone(),
            payload: payload.clone(),
        }),
    }
    Ok(out)
}
