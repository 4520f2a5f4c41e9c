use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::TrgError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UciRecord {
    pub uci: String,
    pub source: String,
    #[serde(default)]
    pub description: String,
}

impl UciRecord {
    pub fn new(uci: &str, source: &str, description: &str) -> Self {
        UciRecord {
            uci: uci.into(),
            source: source.into(),
            description: description.into(),
        }
    }
}

/// Local stand-in for the context information service: a per-run name table.
#[derive(Clone, Debug, Default)]
pub struct UciRegistry {
    records: BTreeMap<String, UciRecord>,
}

impl UciRegistry {
    pub fn register(&mut self, record: UciRecord) -> Result<(), TrgError> {
        if record.uci.is_empty() {
            return Err(TrgError::EmptyUci);
        }
        match self.records.get(&record.uci) {
            Some(existing) if existing.source != record.source => Err(TrgError::UciConflict {
                uci: record.uci,
                owner: existing.source.clone(),
            }),
            Some(_) => Ok(()),
            None => {
                self.records.insert(record.uci.clone(), record);
                Ok(())
            }
        }
    }

    pub fn resolve(&self, uci: &str) -> Result<&UciRecord, TrgError> {
        self.records
            .get(uci)
            .ok_or_else(|| TrgError::UciNotFound(uci.to_string()))
    }

    pub fn clear(&mut self) {
        self.records.clear();
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}
