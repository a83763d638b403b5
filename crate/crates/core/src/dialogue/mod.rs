//! Command comprehension: intent parsing, two-microphone confidence fusion,
//! the clarification policy, learned task parameters and the optional
//! remote understander.

mod grammar;
mod memory;
mod understander;

pub use grammar::{parse, parse_parameter_answer};
pub use memory::{MemoryError, ParameterMemory};
pub use understander::{Understander, Understood, API_KEY_ENV, ENDPOINT_ENV};

use crate::sensors::MicSample;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntentKind {
    Fetch,
    Patrol,
    GoTo,
    Stop,
    Help,
    Unknown,
}

impl IntentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            IntentKind::Fetch => "fetch",
            IntentKind::Patrol => "patrol",
            IntentKind::GoTo => "go_to",
            IntentKind::Stop => "stop",
            IntentKind::Help => "help",
            IntentKind::Unknown => "unknown",
        }
    }
}

impl fmt::Display for IntentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intent {
    pub kind: IntentKind,
    pub item: Option<String>,
    pub parameters: BTreeMap<String, String>,
    pub confidence: f64,
}

impl Intent {
    pub fn unknown() -> Self {
        Self { kind: IntentKind::Unknown, item: None, parameters: BTreeMap::new(), confidence: 0.0 }
    }

    /// Same command, ignoring confidence.
    pub fn same_command(&self, other: &Intent) -> bool {
        self.kind == other.kind && self.item == other.item && self.parameters == other.parameters
    }
}

/// Combined intelligibility of a capture: the better of the two microphones.
pub fn fuse_confidence(sample: &MicSample) -> f64 {
    sample.omni_score.max(sample.dir_score)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClarificationAction {
    Accept,
    AskRepeat,
    ApproachSpeaker,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClarificationPolicy {
    pub accept_threshold: f64,
    pub repeat_threshold: f64,
    /// From this attempt on, anything at or above `repeat_threshold` is accepted.
    pub max_attempts: u32,
}

impl Default for ClarificationPolicy {
    fn default() -> Self {
        Self { accept_threshold: 0.7, repeat_threshold: 0.4, max_attempts: 2 }
    }
}

impl ClarificationPolicy {
    pub fn decide(&self, confidence: f64, attempt: u32) -> ClarificationAction {
        if confidence >= self.accept_threshold {
            ClarificationAction::Accept
        } else if confidence >= self.repeat_threshold {
            if attempt >= self.max_attempts {
                ClarificationAction::Accept
            } else {
                ClarificationAction::AskRepeat
            }
        } else {
            ClarificationAction::ApproachSpeaker
        }
    }
}

pub fn clarification_policy(confidence: f64, attempt: u32) -> ClarificationAction {
    ClarificationPolicy::default().decide(confidence, attempt)
}
