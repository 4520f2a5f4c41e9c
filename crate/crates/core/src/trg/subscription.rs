use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::event::{Event, Value};
use super::TrgError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = "=", alias = "==")]
    Eq,
    #[serde(rename = "!=", alias = "≠")]
    Ne,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=", alias = "≤")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=", alias = "≥")]
    Ge,
}

impl Comparator {
    fn accepts(self, ord: Ordering) -> bool {
        match self {
            Comparator::Eq => ord == Ordering::Equal,
            Comparator::Ne => ord != Ordering::Equal,
            Comparator::Lt => ord == Ordering::Less,
            Comparator::Le => ord != Ordering::Greater,
            Comparator::Gt => ord == Ordering::Greater,
            Comparator::Ge => ord != Ordering::Less,
        }
    }

    fn is_equality(self) -> bool {
        matches!(self, Comparator::Eq | Comparator::Ne)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Predicate {
    pub attribute: String,
    pub op: Comparator,
    pub value: Value,
}

impl Predicate {
    pub fn new(attribute: impl Into<String>, op: Comparator, value: impl Into<Value>) -> Self {
        Predicate {
            attribute: attribute.into(),
            op,
            value: value.into(),
        }
    }

    fn validate(&self) -> Result<(), TrgError> {
        if self.attribute.is_empty() {
            return Err(TrgError::MalformedPredicate("empty attribute name".into()));
        }
        match &self.value {
            Value::Flag(_) if !self.op.is_equality() => Err(TrgError::MalformedPredicate(
                format!("ordering comparator on boolean attribute `{}`", self.attribute),
            )),
            Value::Number(n) if n.is_nan() => Err(TrgError::MalformedPredicate(format!(
                "NaN constant for `{}`",
                self.attribute
            ))),
            _ => Ok(()),
        }
    }

    /// Missing attributes and type mismatches evaluate to false.
    pub fn eval(&self, event: &Event) -> bool {
        let Some(actual) = event.payload.get(&self.attribute) else {
            return false;
        };
        let ord = match (actual, &self.value) {
            (Value::Number(a), Value::Number(b)) => a.partial_cmp(b),
            (Value::Text(a), Value::Text(b)) => Some(a.cmp(b)),
            (Value::Flag(a), Value::Flag(b)) => Some(a.cmp(b)),
            _ => None,
        };
        ord.is_some_and(|o| self.op.accepts(o))
    }
}

/// Event type pattern: exact, or a prefix when it ends in `*`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TypePattern(pub String);

impl TypePattern {
    pub fn matches(&self, event_type: &str) -> bool {
        match self.0.strip_suffix('*') {
            Some(prefix) => event_type.starts_with(prefix),
            None => self.0 == event_type,
        }
    }
}

impl From<&str> for TypePattern {
    fn from(s: &str) -> Self {
        TypePattern(s.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Subscription {
    pub consumer: String,
    pub types: Vec<TypePattern>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub predicates: Vec<Predicate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_interval_ms: Option<u64>,
}

impl Subscription {
    pub fn new<I, P>(consumer: impl Into<String>, types: I) -> Self
    where
        I: IntoIterator<Item = P>,
        P: Into<TypePattern>,
    {
        Subscription {
            consumer: consumer.into(),
            types: types.into_iter().map(Into::into).collect(),
            source: None,
            predicates: Vec::new(),
            min_interval_ms: None,
        }
    }

    pub fn from_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }

    pub fn when(mut self, predicate: Predicate) -> Self {
        self.predicates.push(predicate);
        self
    }

    pub fn rate_limited(mut self, min_interval_ms: u64) -> Self {
        self.min_interval_ms = Some(min_interval_ms);
        self
    }

    pub fn validate(&self) -> Result<(), TrgError> {
        if self.consumer.is_empty() {
            return Err(TrgError::EmptyConsumer);
        }
        if self.types.is_empty() || self.types.iter().any(|p| p.0.is_empty()) {
            return Err(TrgError::MalformedPredicate(format!(
                "subscription for `{}` has an empty type pattern",
                self.consumer
            )));
        }
        self.predicates.iter().try_for_each(Predicate::validate)
    }

    /// Type, source and payload filter; the rate limit is applied by the bus.
    pub fn matches(&self, event: &Event) -> bool {
        self.types.iter().any(|p| p.matches(&event.event_type))
            && self.source.as_ref().is_none_or(|s| *s == event.source)
            && self.predicates.iter().all(|p| p.eval(event))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_and_exact_patterns() {
        let p = TypePattern::from("link-*");
        assert!(p.matches("link-down"));
        assert!(p.matches("link-"));
        assert!(!p.matches("handover-complete"));
        let e = TypePattern::from("handover-complete");
        assert!(e.matches("handover-complete"));
        assert!(!e.matches("handover-completed"));
        assert!(TypePattern::from("*").matches("anything"));
    }

    #[test]
    fn comparator_evaluation() {
        let pred = Predicate::new("quality", Comparator::Lt, 0.2);
        let low = Event::new("candidate-report", "mrrm").with("quality", 0.15);
        let high = Event::new("candidate-report", "mrrm").with("quality", 0.25);
        assert!(pred.eval(&low));
        assert!(!pred.eval(&high));
        let cases = [
            (Comparator::Eq, 1.0, true),
            (Comparator::Ne, 1.0, false),
            (Comparator::Le, 1.0, true),
            (Comparator::Ge, 1.0, true),
            (Comparator::Gt, 0.5, true),
            (Comparator::Lt, 0.5, false),
        ];
        let e = Event::new("x", "s").with("v", 1.0);
        for (op, c, expect) in cases {
            assert_eq!(Predicate::new("v", op, c).eval(&e), expect, "{op:?} {c}");
        }
    }

    #[test]
    fn missing_or_mistyped_attribute_is_false() {
        let e = Event::new("x", "s").with("v", "text");
        assert!(!Predicate::new("absent", Comparator::Ne, 1.0).eval(&e));
        assert!(!Predicate::new("v", Comparator::Ne, 1.0).eval(&e));
        assert!(Predicate::new("v", Comparator::Eq, "text").eval(&e));
    }

    #[test]
    fn malformed_predicates_rejected() {
        let s = Subscription::new("c", ["x"]).when(Predicate::new("", Comparator::Eq, 1.0));
        assert!(s.validate().is_err());
        let s = Subscription::new("c", ["x"]).when(Predicate::new("f", Comparator::Lt, true));
        assert!(s.validate().is_err());
        assert!(Subscription::new("", ["x"]).validate().is_err());
        assert!(Subscription::new("c", Vec::<&str>::new()).validate().is_err());
    }

    #[test]
    fn comparator_serde_symbols() {
        let p: Predicate =
            serde_json::from_str(r#"{"attribute":"q","op":"≤","value":0.5}"#).unwrap();
        assert_eq!(p.op, Comparator::Le);
        let p: Predicate =
            serde_json::from_str(r#"{"attribute":"q","op":"!=","value":"a"}"#).unwrap();
        assert_eq!(p.op, Comparator::Ne);
    }
}
