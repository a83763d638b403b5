//! The assistive scenarios as resumable tasker tasks, the idle listening
//! behavior, and the engine that runs them against the world.

mod benchmark;
mod engine;
pub mod nav;
mod tasks;

pub use benchmark::{run_comprehension, ComprehensionReport, TrialResult};
pub use engine::{Engine, EngineError, TaskSpec};

use crate::sensors::Violation;
use crate::tasker::TaskId;
use serde::{Deserialize, Serialize};

/// One line of the event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub t: f64,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<TaskId>,
    pub payload: serde_json::Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeStatus {
    Success,
    Anomaly,
    Aborted,
}

impl OutcomeStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            OutcomeStatus::Success => "success",
            OutcomeStatus::Anomaly => "anomaly",
            OutcomeStatus::Aborted => "aborted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub task: TaskId,
    pub name: String,
    pub status: OutcomeStatus,
    pub reason: Option<String>,
    pub violations: Vec<Violation>,
    pub finished_at: f64,
    /// Log entries emitted by the task, in order.
    pub events: Vec<LogEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HazardReport {
    pub detected_at: f64,
    /// World-frame bearing from the robot at detection time, radians.
    pub bearing: f64,
    pub peak_temperature: f64,
    pub reported_at_base: bool,
}
