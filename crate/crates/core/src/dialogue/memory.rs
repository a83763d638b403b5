use super::{Intent, IntentKind};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MemoryError {
    #[error("reading parameter memory: {0}")]
    Io(#[from] std::io::Error),
    #[error("decoding parameter memory: {0}")]
    Json(#[from] serde_json::Error),
}

/// Parameters the user has taught the robot to ask about, per task kind and
/// item, plus the most recent value given for each parameter key.
///
/// Required sets only ever grow within a session.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParameterMemory {
    required: BTreeMap<String, BTreeSet<String>>,
    values_last_used: BTreeMap<String, String>,
}

fn slot(kind: IntentKind, item: Option<&str>) -> String {
    format!("{}/{}", kind.as_str(), item.unwrap_or("*"))
}

impl ParameterMemory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `key` to the required set of `(kind, item)`. Idempotent; empty
    /// keys are ignored.
    pub fn learn(&mut self, kind: IntentKind, item: Option<&str>, key: &str) -> &mut Self {
        if !key.is_empty() {
            self.required.entry(slot(kind, item)).or_default().insert(key.to_string());
        }
        self
    }

    pub fn required(&self, kind: IntentKind, item: Option<&str>) -> BTreeSet<String> {
        self.required.get(&slot(kind, item)).cloned().unwrap_or_default()
    }

    /// Required keys for the intent's task that it does not carry.
    pub fn missing(&self, intent: &Intent) -> BTreeSet<String> {
        if intent.kind == IntentKind::Unknown {
            return BTreeSet::new();
        }
        self.required(intent.kind, intent.item.as_deref())
            .into_iter()
            .filter(|k| !intent.parameters.contains_key(k))
            .collect()
    }

    /// Learns every parameter the intent carries and remembers its value.
    pub fn absorb(&mut self, intent: &Intent) {
        if intent.kind == IntentKind::Unknown {
            return;
        }
        for (k, v) in &intent.parameters {
            self.learn(intent.kind, intent.item.as_deref(), k);
            self.values_last_used.insert(k.clone(), v.clone());
        }
    }

    pub fn last_value(&self, key: &str) -> Option<&str> {
        self.values_last_used.get(key).map(String::as_str)
    }

    pub fn save(&self, path: &Path) -> Result<(), MemoryError> {
        std::fs::write(path, serde_json::to_vec_pretty(self)?)?;
        Ok(())
    }

    /// Loads a session file; a missing file gives an empty memory.
    pub fn load(path: &Path) -> Result<Self, MemoryError> {
        match std::fs::read(path) {
            Ok(bytes) => Ok(serde_json::from_slice(&bytes)?),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::default()),
            Err(e) => Err(e.into()),
        }
    }
}
