//! Scenario documents: configuration, initial world and a timeline of
//! environment mutations.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Action, Cell, CellField, FlowSpec, SimTime};
use crate::gll::GllConfig;
use crate::mrrm::{HandoverSemantics, MrrmConfig};
use crate::trg::{CorrelationRule, DropRule, Payload, PolicyStoreConfig, Subscription, UciRecord, Value};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeRole {
    /// Mobile node.
    #[default]
    MN,
    /// Mobile router.
    MR,
}

impl NodeRole {
    /// Per-trace-point delays used when a scenario does not give its own.
    pub fn default_delays(self) -> [u64; 5] {
        match self {
            NodeRole::MN => [209, 2, 1, 13, 2809],
            NodeRole::MR => [10, 1, 19, 16, 302],
        }
    }
}

/// Where access selection runs; the network side also sees the load of
/// cells the terminal is not attached to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MrrmLocation {
    #[default]
    Terminal,
    Network,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MobilityConfig {
    /// Fixed delay of each of the five trace points, ms. Defaults by node role.
    pub delays_ms: Option<[u64; 5]>,
    /// Uniform extra delay in `[0, jitter_ms]` per trace point, from the run's generator.
    pub jitter_ms: u64,
    pub semantics: HandoverSemantics,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrgConfig {
    /// Extra consumers (upper layers); MRRM, GLL and mobility subscribe on their own.
    pub subscriptions: Vec<Subscription>,
    pub correlations: Vec<CorrelationRule>,
    pub drop_rules: Vec<DropRule>,
    pub policy_store: PolicyStoreConfig,
    pub ucis: Vec<UciRecord>,
}

/// A timeline entry as written in the file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioAction {
    pub at: SimTime,
    pub kind: String,
    #[serde(default)]
    pub target: String,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub node_role: NodeRole,
    #[serde(default)]
    pub mrrm_location: MrrmLocation,
    /// Defaults to ten seconds past the last timeline entry.
    #[serde(default)]
    pub duration_ms: Option<u64>,
    #[serde(default)]
    pub gll: GllConfig,
    #[serde(default)]
    pub mrrm: MrrmConfig,
    #[serde(default)]
    pub mobility: MobilityConfig,
    #[serde(default)]
    pub trg: TrgConfig,
    pub cells: Vec<Cell>,
    #[serde(default)]
    pub flows: Vec<FlowSpec>,
    #[serde(default)]
    pub timeline: Vec<ScenarioAction>,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("invalid scenario at `{path}`: {message}")]
    Invalid { path: String, message: String },
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        path: path.into(),
        message: message.into(),
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| ScenarioError::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    scenario.validate()?;
    Ok(scenario)
}

impl Scenario {
    pub fn delays(&self) -> [u64; 5] {
        self.mobility
            .delays_ms
            .unwrap_or_else(|| self.node_role.default_delays())
    }

    pub fn duration(&self) -> u64 {
        self.duration_ms.unwrap_or_else(|| {
            self.timeline.iter().map(|a| a.at.0).max().unwrap_or(0) + 10_000
        })
    }

    /// Timeline in application order: stable sort by time keeps file order on ties.
    pub fn ordered_timeline(&self) -> Vec<(usize, &ScenarioAction)> {
        let mut v: Vec<(usize, &ScenarioAction)> = self.timeline.iter().enumerate().collect();
        v.sort_by_key(|(_, a)| a.at);
        v
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.gll.validate().map_err(|e| invalid("gll", e.to_string()))?;
        self.mrrm.validate().map_err(|e| invalid("mrrm", e.to_string()))?;
        if self.cells.is_empty() {
            return Err(invalid("cells", "at least one cell is required"));
        }
        let mut ids = BTreeSet::new();
        for (i, c) in self.cells.iter().enumerate() {
            c.validate()
                .map_err(|m| invalid(format!("cells[{i}] ({})", c.cell_id), m))?;
            if !ids.insert(c.cell_id.as_str()) {
                return Err(invalid(format!("cells[{i}].cell_id"), format!("duplicate cell `{}`", c.cell_id)));
            }
        }
        let cells: BTreeMap<&str, &Cell> = self.cells.iter().map(|c| (c.cell_id.as_str(), c)).collect();
        let mut flows = BTreeSet::new();
        let mut demand: BTreeMap<&str, u64> = BTreeMap::new();
        for (i, f) in self.flows.iter().enumerate() {
            f.to_flow()
                .validate()
                .map_err(|e| invalid(format!("flows[{i}]"), e.to_string()))?;
            if !flows.insert(f.flow_id.clone()) {
                return Err(invalid(format!("flows[{i}].flow_id"), format!("duplicate flow `{}`", f.flow_id)));
            }
            if let Some(s) = &f.serving {
                let cell = cells
                    .get(s.as_str())
                    .ok_or_else(|| invalid(format!("flows[{i}].serving"), format!("unknown cell `{s}`")))?;
                if !cell.covered {
                    return Err(invalid(format!("flows[{i}].serving"), format!("cell `{s}` is not covered")));
                }
                let d = demand.entry(cell.cell_id.as_str()).or_default();
                *d += f.resource_demand;
                if cell.used_resources + *d > cell.total_resources {
                    return Err(invalid(
                        format!("flows[{i}].resource_demand"),
                        format!("initial flows exceed the resources of cell `{s}`"),
                    ));
                }
            }
        }
        for (i, a) in self.ordered_timeline() {
            let action = a.to_action(i)?;
            let path = format!("timeline[{i}].target");
            match &action {
                Action::FlowArrival(spec) => {
                    if !flows.insert(spec.flow_id.clone()) {
                        return Err(invalid(path, format!("flow `{}` already exists", spec.flow_id)));
                    }
                }
                Action::FlowDeparture { flow } => {
                    if !flows.remove(flow) {
                        return Err(invalid(path, format!("unknown flow `{flow}`")));
                    }
                }
                Action::UpperTrigger { .. } => {}
                other => {
                    if !cells.contains_key(other.target()) {
                        return Err(invalid(path, format!("unknown cell `{}`", other.target())));
                    }
                }
            }
        }
        if let Some(d) = self.duration_ms {
            if let Some(last) = self.timeline.iter().map(|a| a.at.0).max() {
                if last > d {
                    return Err(invalid("duration_ms", format!("timeline runs to {last} ms, past the end of the run")));
                }
            }
        }
        for (i, s) in self.trg.subscriptions.iter().enumerate() {
            s.validate()
                .map_err(|e| invalid(format!("trg.subscriptions[{i}]"), e.to_string()))?;
        }
        for (i, r) in self.trg.correlations.iter().enumerate() {
            r.validate()
                .map_err(|e| invalid(format!("trg.correlations[{i}]"), e.to_string()))?;
        }
        Ok(())
    }
}

impl ScenarioAction {
    /// Typed form of this entry; `index` names it in errors.
    pub fn to_action(&self, index: usize) -> Result<Action, ScenarioError> {
        let at = |k: &str| format!("timeline[{index}].params.{k}");
        let num = |k: &str| -> Result<f64, ScenarioError> {
            self.params
                .get(k)
                .and_then(Value::as_f64)
                .ok_or_else(|| invalid(at(k), "missing or not a number"))
        };
        let opt_num = |k: &str, default: f64| -> Result<f64, ScenarioError> {
            match self.params.get(k) {
                None => Ok(default),
                Some(v) => v.as_f64().ok_or_else(|| invalid(at(k), "not a number")),
            }
        };
        let text = |k: &str| -> Result<&str, ScenarioError> {
            self.params
                .get(k)
                .and_then(Value::as_str)
                .ok_or_else(|| invalid(at(k), "missing or not a string"))
        };
        let field = |k: &str| -> Result<CellField, ScenarioError> {
            let name = text(k)?;
            CellField::parse(name).ok_or_else(|| invalid(at(k), format!("unknown cell field `{name}`")))
        };
        let whole = |k: &str, v: f64| -> Result<u64, ScenarioError> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as u64)
            } else {
                Err(invalid(at(k), "must be a non-negative integer"))
            }
        };
        let allowed = |keys: &[&str]| -> Result<(), ScenarioError> {
            match self.params.keys().find(|k| !keys.contains(&k.as_str())) {
                Some(k) => Err(invalid(at(k), format!("unknown parameter for `{}`", self.kind))),
                None => Ok(()),
            }
        };
        if self.target.is_empty() {
            return Err(invalid(format!("timeline[{index}].target"), "missing target"));
        }
        let cell = self.target.clone();
        let action = match self.kind.as_str() {
            "set-cell-field" => {
                allowed(&["field", "value"])?;
                Action::SetCellField {
                    cell,
                    field: field("field")?,
                    value: num("value")?,
                }
            }
            "cell-up" | "cell-down" | "link-down-cable" | "emit-router-advertisement" => {
                allowed(&[])?;
                match self.kind.as_str() {
                    "cell-up" => Action::CellUp { cell },
                    "cell-down" => Action::CellDown { cell },
                    "link-down-cable" => Action::LinkDownCable { cell },
                    _ => Action::RouterAdvertisement { cell },
                }
            }
            "flow-arrival" => {
                allowed(&["service_class", "min_rate", "max_delay", "max_loss", "resource_demand"])?;
                let class = text("service_class")?;
                let service_class = crate::gll::ServiceClass::parse(class)
                    .ok_or_else(|| invalid(at("service_class"), format!("unknown service class `{class}`")))?;
                let spec = FlowSpec {
                    flow_id: self.target.clone(),
                    service_class,
                    min_rate: opt_num("min_rate", 0.0)?,
                    max_delay: opt_num("max_delay", 1e9)?,
                    max_loss: opt_num("max_loss", 1.0)?,
                    resource_demand: whole("resource_demand", opt_num("resource_demand", 1.0)?)?,
                    serving: None,
                };
                spec.to_flow()
                    .validate()
                    .map_err(|e| invalid(format!("timeline[{index}].params"), e.to_string()))?;
                Action::FlowArrival(spec)
            }
            "flow-departure" => {
                allowed(&[])?;
                Action::FlowDeparture { flow: self.target.clone() }
            }
            "quality-ramp" => {
                allowed(&["field", "from", "to", "duration_ms", "step_ms"])?;
                let f = field("field")?;
                if !f.rampable() {
                    return Err(invalid(at("field"), format!("`{}` cannot be ramped", f.as_str())));
                }
                let duration_ms = whole("duration_ms", num("duration_ms")?)?;
                if duration_ms == 0 {
                    return Err(invalid(at("duration_ms"), "ramp needs a positive duration"));
                }
                let step_ms = match self.params.get("step_ms") {
                    None => None,
                    Some(_) => Some(whole("step_ms", num("step_ms")?)?).filter(|s| *s > 0),
                };
                if self.params.contains_key("step_ms") && step_ms.is_none() {
                    return Err(invalid(at("step_ms"), "step must be positive"));
                }
                Action::QualityRamp {
                    cell,
                    field: f,
                    from: num("from")?,
                    to: num("to")?,
                    duration_ms,
                    step_ms,
                }
            }
            "upper-trigger" => {
                let mut payload: Payload = self.params.clone();
                let source = match payload.remove("source") {
                    None => "app".to_string(),
                    Some(Value::Text(s)) if !s.is_empty() => s,
                    Some(_) => return Err(invalid(at("source"), "must be a non-empty string")),
                };
                Action::UpperTrigger {
                    event_type: self.target.clone(),
                    source,
                    payload,
                }
            }
            other => {
                return Err(invalid(
                    format!("timeline[{index}].kind"),
                    format!("unknown action kind `{other}`"),
                ))
            }
        };
        Ok(action)
    }
}
