//! Priority task harmoniser with interrupt, postpone and resume semantics.
//!
//! At most one task is `Executing`. [`Tasker::harmonise`] installs the best
//! candidate among `Waiting` and `Suspended` tasks: highest priority, then
//! earliest submission, then lowest id. A running task is only preempted by
//! a strictly higher priority. Contexts are opaque byte strings the owner of
//! a task saves before it is suspended and loads when it resumes.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskId(pub u64);

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TaskState {
    Waiting,
    Executing,
    Suspended,
    Finished,
    Terminated,
}

impl TaskState {
    pub fn is_final(self) -> bool {
        matches!(self, TaskState::Finished | TaskState::Terminated)
    }

    pub fn can_transition_to(self, next: TaskState) -> bool {
        use TaskState::*;
        matches!(
            (self, next),
            (Waiting, Executing)
                | (Waiting, Terminated)
                | (Executing, Suspended)
                | (Executing, Finished)
                | (Executing, Terminated)
                | (Suspended, Executing)
                | (Suspended, Terminated)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub id: TaskId,
    pub name: String,
    pub priority: i64,
    pub state: TaskState,
    pub context: Vec<u8>,
    pub submitted_at: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", content = "id", rename_all = "snake_case")]
pub enum Action {
    Start(TaskId),
    Suspend(TaskId),
    Resume(TaskId),
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ScheduleDecision {
    pub active: Option<TaskId>,
    pub actions: Vec<Action>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TaskerError {
    #[error("unknown task {0}")]
    UnknownTask(TaskId),
    #[error("task {0} is {1:?}, not Executing")]
    NotExecuting(TaskId, TaskState),
    #[error("task {0} already ended as {1:?}")]
    AlreadyEnded(TaskId, TaskState),
}

/// One line of the decision trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub tick: u64,
    pub op: String,
    pub task: TaskId,
    pub before: Option<TaskState>,
    pub after: TaskState,
}

#[derive(Debug, Clone, Default)]
pub struct Tasker {
    tasks: BTreeMap<TaskId, TaskRecord>,
    next_id: u64,
    clock: f64,
    tick: u64,
    trace: Vec<TraceRecord>,
}

impl Tasker {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets the time stamped onto subsequent submissions.
    pub fn set_clock(&mut self, t: f64) {
        self.clock = t;
    }

    pub fn task(&self, id: TaskId) -> Option<&TaskRecord> {
        self.tasks.get(&id)
    }

    pub fn tasks(&self) -> impl Iterator<Item = &TaskRecord> {
        self.tasks.values()
    }

    pub fn executing(&self) -> Option<TaskId> {
        self.tasks.values().find(|t| t.state == TaskState::Executing).map(|t| t.id)
    }

    /// Tasks that may still run.
    pub fn live_count(&self) -> usize {
        self.tasks.values().filter(|t| !t.state.is_final()).count()
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    /// The decision trace as line-delimited JSON.
    pub fn trace_jsonl(&self) -> String {
        self.trace
            .iter()
            .map(|r| serde_json::to_string(r).expect("trace record serializes") + "\n")
            .collect()
    }

    fn record(&mut self, op: &str, task: TaskId, before: Option<TaskState>, after: TaskState) {
        self.trace.push(TraceRecord { tick: self.tick, op: op.to_string(), task, before, after });
    }

    fn set_state(&mut self, op: &str, id: TaskId, next: TaskState) {
        let rec = self.tasks.get_mut(&id).expect("caller checked the id");
        let before = rec.state;
        debug_assert!(before.can_transition_to(next), "{before:?} -> {next:?}");
        rec.state = next;
        self.record(op, id, Some(before), next);
    }

    pub fn submit(&mut self, name: impl Into<String>, priority: i64, initial_context: Vec<u8>) -> TaskId {
        self.tick += 1;
        let id = TaskId(self.next_id);
        self.next_id += 1;
        self.tasks.insert(
            id,
            TaskRecord {
                id,
                name: name.into(),
                priority,
                state: TaskState::Waiting,
                context: initial_context,
                submitted_at: self.clock,
            },
        );
        self.record("submit", id, None, TaskState::Waiting);
        id
    }

    fn best_candidate(&self) -> Option<&TaskRecord> {
        self.tasks
            .values()
            .filter(|t| matches!(t.state, TaskState::Waiting | TaskState::Suspended))
            .min_by(|a, b| {
                b.priority
                    .cmp(&a.priority)
                    .then(a.submitted_at.total_cmp(&b.submitted_at))
                    .then(a.id.cmp(&b.id))
            })
    }

    fn harmonise_inner(&mut self) -> ScheduleDecision {
        let running = self.executing();
        let Some(cand) = self.best_candidate().map(|c| (c.id, c.priority, c.state)) else {
            return ScheduleDecision { active: running, actions: Vec::new() };
        };
        let mut actions = Vec::new();
        if let Some(e) = running {
            if cand.1 <= self.tasks[&e].priority {
                return ScheduleDecision { active: running, actions };
            }
            self.set_state("suspend", e, TaskState::Suspended);
            actions.push(Action::Suspend(e));
        }
        if cand.2 == TaskState::Suspended {
            self.set_state("resume", cand.0, TaskState::Executing);
            actions.push(Action::Resume(cand.0));
        } else {
            self.set_state("start", cand.0, TaskState::Executing);
            actions.push(Action::Start(cand.0));
        }
        ScheduleDecision { active: Some(cand.0), actions }
    }

    pub fn harmonise(&mut self) -> ScheduleDecision {
        self.tick += 1;
        self.harmonise_inner()
    }

    /// Marks the executing task finished and reharmonises.
    pub fn complete(&mut self, id: TaskId) -> Result<ScheduleDecision, TaskerError> {
        let state = self.tasks.get(&id).ok_or(TaskerError::UnknownTask(id))?.state;
        if state != TaskState::Executing {
            return Err(TaskerError::NotExecuting(id, state));
        }
        self.tick += 1;
        self.set_state("complete", id, TaskState::Finished);
        Ok(self.harmonise_inner())
    }

    /// Ends a task without completion; reharmonises if it was running.
    pub fn terminate(&mut self, id: TaskId) -> Result<ScheduleDecision, TaskerError> {
        let state = self.tasks.get(&id).ok_or(TaskerError::UnknownTask(id))?.state;
        if state.is_final() {
            return Err(TaskerError::AlreadyEnded(id, state));
        }
        self.tick += 1;
        self.set_state("terminate", id, TaskState::Terminated);
        if state == TaskState::Executing {
            Ok(self.harmonise_inner())
        } else {
            Ok(ScheduleDecision { active: self.executing(), actions: Vec::new() })
        }
    }

    pub fn save_context(&mut self, id: TaskId, context: Vec<u8>) -> Result<(), TaskerError> {
        self.tasks.get_mut(&id).ok_or(TaskerError::UnknownTask(id))?.context = context;
        Ok(())
    }

    pub fn load_context(&self, id: TaskId) -> Result<&[u8], TaskerError> {
        Ok(&self.tasks.get(&id).ok_or(TaskerError::UnknownTask(id))?.context)
    }
}
