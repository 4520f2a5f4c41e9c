//! Line-oriented run trace: `at<TAB>component<TAB>kind` followed by one
//! `key=value` field per attribute, attributes sorted by key.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::SimTime;
use crate::trg::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RecordKind {
    Event,
    Delivery,
    Decision,
    Measurement,
    TracePoint,
    Action,
    Status,
    Log,
}

impl RecordKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordKind::Event => "event",
            RecordKind::Delivery => "delivery",
            RecordKind::Decision => "decision",
            RecordKind::Measurement => "measurement",
            RecordKind::TracePoint => "trace-point",
            RecordKind::Action => "action",
            RecordKind::Status => "status",
            RecordKind::Log => "log",
        }
    }

    pub fn parse(s: &str) -> Option<RecordKind> {
        Some(match s {
            "event" => RecordKind::Event,
            "delivery" => RecordKind::Delivery,
            "decision" => RecordKind::Decision,
            "measurement" => RecordKind::Measurement,
            "trace-point" => RecordKind::TracePoint,
            "action" => RecordKind::Action,
            "status" => RecordKind::Status,
            "log" => RecordKind::Log,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub at: SimTime,
    pub component: String,
    pub kind: RecordKind,
    pub attrs: BTreeMap<String, Value>,
}

impl TraceRecord {
    pub fn new(at: SimTime, component: &str, kind: RecordKind) -> Self {
        TraceRecord {
            at,
            component: component.to_string(),
            kind,
            attrs: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<Value>) -> Self {
        self.attrs.insert(key.into(), value.into());
        self
    }

    pub fn num(&self, key: &str) -> Option<f64> {
        self.attrs.get(key).and_then(Value::as_f64)
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        self.attrs.get(key).and_then(Value::as_str)
    }

    pub fn flag(&self, key: &str) -> Option<bool> {
        self.attrs.get(key).and_then(Value::as_bool)
    }

    pub fn to_line(&self) -> String {
        let mut line = format!("{}\t{}\t{}", self.at, self.component, self.kind.as_str());
        for (k, v) in &self.attrs {
            let _ = write!(line, "\t{k}={}", format_value(v));
        }
        line
    }
}

/// Text is JSON-quoted so tabs, `=` and newlines survive a round trip.
pub fn format_value(v: &Value) -> String {
    match v {
        Value::Flag(b) => b.to_string(),
        Value::Number(n) => format!("{n}"),
        Value::Text(s) => serde_json::to_string(s).unwrap_or_default(),
    }
}

fn parse_value(s: &str) -> Option<Value> {
    if s.starts_with('"') {
        return serde_json::from_str::<String>(s).ok().map(Value::Text);
    }
    match s {
        "true" => Some(Value::Flag(true)),
        "false" => Some(Value::Flag(false)),
        _ => s.parse::<f64>().ok().map(Value::Number),
    }
}

/// Parses one trace line; `None` for anything malformed.
pub fn parse_line(line: &str) -> Option<TraceRecord> {
    let mut fields = line.split('\t');
    let at = SimTime(fields.next()?.parse().ok()?);
    let component = fields.next()?.to_string();
    let kind = RecordKind::parse(fields.next()?)?;
    let mut attrs = BTreeMap::new();
    for f in fields {
        let (k, v) = f.split_once('=')?;
        attrs.insert(k.to_string(), parse_value(v)?);
    }
    Some(TraceRecord {
        at,
        component,
        kind,
        attrs,
    })
}

/// Append-only record list for one run.
#[derive(Clone, Debug, Default)]
pub struct Trace {
    records: Vec<TraceRecord>,
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: TraceRecord) {
        self.records.push(record);
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.to_line());
            out.push('\n');
        }
        out
    }

    pub fn into_records(self) -> Vec<TraceRecord> {
        self.records
    }
}
