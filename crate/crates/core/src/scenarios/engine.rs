use super::tasks::{Body, Ctx, Done, FallResponse, GoTo, HazardReturn, Listening, Patrol, Request, Safety, Step, Transport};
use super::{HazardReport, LogEntry, OutcomeStatus, ScenarioOutcome};
use crate::config::{Config, ConfigError, ScriptEntry};
use crate::dialogue::{MemoryError, ParameterMemory, Understander};
use crate::tasker::{Action, ScheduleDecision, TaskId, TaskState, Tasker};
use crate::world::{WorldError, WorldEvent, WorldState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::collections::BTreeMap;
use thiserror::Error;

const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Memory(#[from] MemoryError),
    #[error("unknown scenario {0:?}; expected patrol, transport or idle")]
    UnknownScenario(String),
    #[error("scenario {0} needs {1} in the config")]
    MissingSetting(&'static str, &'static str),
}

/// A task to submit; the engine picks its name and priority.
#[derive(Debug, Clone, PartialEq)]
pub enum TaskSpec {
    Patrol { laps: Option<u32> },
    HazardReport(HazardReturn),
    Transport { item: String, requester: Option<String>, parameters: BTreeMap<String, String> },
    FallResponse { person_id: String },
    /// Answering a spoken call for help.
    Assist { person_id: String },
    GoTo { destination: String, speaker: Option<String> },
    Safety,
    Listening,
}

/// Owns the world, the tasker and every task body, and advances them
/// together one tick at a time. All mutation goes through here.
pub struct Engine {
    cfg: Config,
    world: WorldState,
    tasker: Tasker,
    memory: ParameterMemory,
    understander: Understander,
    rng: ChaCha8Rng,
    log: Vec<LogEntry>,
    active: Option<(TaskId, Body)>,
    script: Vec<(ScriptEntry, bool)>,
    scheduled: Vec<(f64, WorldEvent)>,
    log_cursor: usize,
    responses: BTreeMap<String, f64>,
    outcomes: Vec<ScenarioOutcome>,
    hazards: Vec<HazardReport>,
    estop: bool,
    dispatch: bool,
    main: Option<TaskId>,
    ticks: u64,
}

impl Engine {
    /// Builds the world from `cfg`; `seed` overrides the configured one.
    /// The idle listening task is submitted straight away.
    pub fn new(cfg: Config, seed: Option<u64>) -> Result<Self, EngineError> {
        let mut world = cfg.build_world()?;
        let seed = seed.unwrap_or(cfg.world.seed);
        world.rng_seed = seed;
        let memory = match &cfg.dialogue.memory_file {
            Some(p) => ParameterMemory::load(p)?,
            None => ParameterMemory::new(),
        };
        let script = cfg.script.iter().cloned().map(|s| (s, false)).collect();
        let mut engine = Self {
            cfg,
            world,
            tasker: Tasker::new(),
            memory,
            understander: Understander::offline(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            log: Vec::new(),
            active: None,
            script,
            scheduled: Vec::new(),
            log_cursor: 0,
            responses: BTreeMap::new(),
            outcomes: Vec::new(),
            hazards: Vec::new(),
            estop: false,
            dispatch: true,
            main: None,
            ticks: 0,
        };
        engine.submit(TaskSpec::Listening);
        Ok(engine)
    }

    pub fn with_understander(mut self, understander: Understander) -> Self {
        self.understander = understander;
        self
    }

    /// When off, accepted intents are logged but no task is submitted.
    pub fn set_dispatch(&mut self, on: bool) {
        self.dispatch = on;
    }

    pub fn config(&self) -> &Config {
        &self.cfg
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn tasker(&self) -> &Tasker {
        &self.tasker
    }

    pub fn memory(&self) -> &ParameterMemory {
        &self.memory
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    pub fn outcomes(&self) -> &[ScenarioOutcome] {
        &self.outcomes
    }

    pub fn outcome(&self, id: TaskId) -> Option<&ScenarioOutcome> {
        self.outcomes.iter().find(|o| o.task == id)
    }

    pub fn hazards(&self) -> &[HazardReport] {
        &self.hazards
    }

    pub fn estop(&self) -> bool {
        self.estop
    }

    pub fn ticks(&self) -> u64 {
        self.ticks
    }

    /// The task started by [`Engine::start`].
    pub fn main_task(&self) -> Option<TaskId> {
        self.main
    }

    /// The event log as line-delimited JSON.
    pub fn events_jsonl(&self) -> String {
        self.log.iter().map(|e| serde_json::to_string(e).expect("log entry serializes") + "\n").collect()
    }

    /// Appends an entry to the event log at the current clock.
    pub fn note(&mut self, kind: &str, payload: serde_json::Value) {
        self.emit(kind, None, payload);
    }

    fn emit(&mut self, kind: &str, task: Option<TaskId>, payload: serde_json::Value) {
        self.log.push(LogEntry { t: self.world.clock, kind: kind.to_string(), task, payload });
    }

    /// Submits the named scenario's main task. `idle` submits nothing.
    pub fn start(&mut self, scenario: &str) -> Result<Option<TaskId>, EngineError> {
        let spec = match scenario {
            "patrol" => {
                if self.cfg.waypoints.is_none() {
                    return Err(EngineError::MissingSetting("patrol", "[waypoints]"));
                }
                TaskSpec::Patrol { laps: self.cfg.patrol.laps }
            }
            "transport" => TaskSpec::Transport {
                item: self.cfg.transport.item.clone(),
                requester: self.cfg.transport.requester.clone(),
                parameters: self.cfg.transport.parameters.clone(),
            },
            "idle" => return Ok(None),
            other => return Err(EngineError::UnknownScenario(other.to_string())),
        };
        let id = self.submit(spec);
        self.main = Some(id);
        Ok(Some(id))
    }

    pub fn submit(&mut self, spec: TaskSpec) -> TaskId {
        let p = self.cfg.priorities;
        let now = self.world.clock;
        let (name, priority, body) = match spec {
            TaskSpec::Patrol { laps } => {
                let (a, b) = match (self.cfg.waypoint_a(), self.cfg.waypoint_b()) {
                    (Some(a), Some(b)) => (a, b),
                    _ => {
                        // patrolling without waypoints: stay at the current spot
                        let here = self.world.robot.position();
                        (here, here)
                    }
                };
                ("patrol", p.patrol, Body::Patrol(Patrol::new(a, b, laps)))
            }
            TaskSpec::HazardReport(r) => ("hazard_report", p.hazard_report, Body::HazardReport(r)),
            TaskSpec::Transport { item, requester, parameters } => {
                ("transport", p.transport, Body::Transport(Transport::new(item, requester, parameters)))
            }
            TaskSpec::FallResponse { person_id } => {
                ("fall_response", p.fall_response, Body::FallResponse(FallResponse::new(person_id, now)))
            }
            TaskSpec::Assist { person_id } => {
                ("assist", p.fall_response, Body::FallResponse(FallResponse::new(person_id, now)))
            }
            TaskSpec::GoTo { destination, speaker } => ("goto", p.goto, Body::GoTo(GoTo::new(destination, speaker))),
            TaskSpec::Safety => ("safety", p.safety, Body::Safety(Safety::default())),
            TaskSpec::Listening => ("listening", p.idle, Body::Listening(Listening::default())),
        };
        self.tasker.set_clock(now);
        let ctx = serde_json::to_vec(&body).expect("task body serializes");
        let id = self.tasker.submit(name, priority, ctx);
        self.emit("task_submitted", Some(id), json!({ "name": name, "priority": priority }));
        id
    }

    /// Applies an external event now. Falls raise a fall-response task.
    pub fn inject(&mut self, event: WorldEvent) -> Result<(), WorldError> {
        let payload = serde_json::to_value(&event).expect("event serializes");
        self.world.inject_event(event.clone())?;
        self.emit("world_event", None, payload);
        match event {
            WorldEvent::PersonFall { person_id } => {
                let handled = self.tasker.tasks().any(|t| {
                    !t.state.is_final()
                        && t.name == "fall_response"
                        && serde_json::from_slice::<Body>(&t.context)
                            .map(|b| matches!(&b, Body::FallResponse(f) if f.person() == person_id))
                            .unwrap_or(false)
                });
                let running = self
                    .active
                    .as_ref()
                    .is_some_and(|(_, b)| matches!(b, Body::FallResponse(f) if f.person() == person_id));
                if !handled && !running {
                    self.submit(TaskSpec::FallResponse { person_id });
                }
            }
            WorldEvent::PersonRespond { person_id, responsive: true } => {
                self.responses.insert(person_id, self.world.clock);
            }
            _ => {}
        }
        Ok(())
    }

    /// Teleoperation of the base; ignored while the emergency stop is on.
    pub fn command_base(&mut self, v: f64, w: f64) -> Result<bool, WorldError> {
        if self.estop {
            return Ok(false);
        }
        self.world.command_base(v, w)?;
        Ok(true)
    }

    /// Teleoperation of the head; ignored while the emergency stop is on.
    pub fn command_head(&mut self, pan: f64, tilt: f64) -> Result<bool, WorldError> {
        if self.estop {
            return Ok(false);
        }
        self.world.command_head(pan, tilt)?;
        Ok(true)
    }

    /// Engaging latches a zero base command and raises the safety task;
    /// releasing lets that task finish on its next step.
    pub fn set_estop(&mut self, engaged: bool) {
        if engaged == self.estop {
            return;
        }
        self.estop = engaged;
        self.emit("estop", None, json!({ "engaged": engaged }));
        if engaged {
            self.world.command_base(0.0, 0.0).expect("finite command");
            self.submit(TaskSpec::Safety);
        }
    }

    /// Advances everything by one tick: due script events, one
    /// harmonisation, one step of the active body, one world step.
    pub fn tick(&mut self) -> Result<(), EngineError> {
        self.fire_due_events();
        let decision = self.tasker.harmonise();
        self.apply(decision);
        if let Some((id, mut body)) = self.active.take() {
            let mut cx = Ctx {
                task: id,
                world: &mut self.world,
                cfg: &self.cfg,
                rng: &mut self.rng,
                memory: &mut self.memory,
                understander: &self.understander,
                log: &mut self.log,
                responses: &self.responses,
                estop: self.estop,
                dispatch: self.dispatch,
                requests: Vec::new(),
            };
            let step = body.step(&mut cx);
            let requests = std::mem::take(&mut cx.requests);
            match step {
                Step::Continue => self.active = Some((id, body)),
                Step::Done(done) => self.finish(id, done),
            }
            self.process(requests)?;
        }
        if self.estop {
            self.world.command_base(0.0, 0.0).expect("finite command");
        }
        self.world.step(self.cfg.run.tick)?;
        self.tasker.set_clock(self.world.clock);
        self.ticks += 1;
        self.arm_log_triggers();
        Ok(())
    }

    /// Ticks until `done` holds or the clock reaches `max_time`.
    pub fn run_until(&mut self, max_time: f64, mut done: impl FnMut(&Engine) -> bool) -> Result<bool, EngineError> {
        while self.world.clock < max_time - TIME_EPS {
            if done(self) {
                return Ok(true);
            }
            self.tick()?;
        }
        Ok(done(self))
    }

    /// No task other than the idle one is live and nothing is scheduled.
    pub fn settled(&self) -> bool {
        let busy = self.tasker.tasks().any(|t| !t.state.is_final() && t.name != "listening");
        let pending_script = self.script.iter().any(|(s, fired)| !fired && s.at.is_some());
        let active_idle = self.active.as_ref().is_none_or(|(_, b)| b.is_idle());
        !busy && active_idle && !pending_script && self.scheduled.is_empty() && self.world.pending_speech.is_empty()
    }

    fn fire_due_events(&mut self) {
        let now = self.world.clock;
        let mut due = Vec::new();
        for (entry, fired) in &mut self.script {
            if !*fired && entry.at.is_some_and(|t| t <= now + TIME_EPS) {
                *fired = true;
                due.push(entry.event.clone());
            }
        }
        let (ready, later): (Vec<_>, Vec<_>) = self.scheduled.drain(..).partition(|(t, _)| *t <= now + TIME_EPS);
        self.scheduled = later;
        due.extend(ready.into_iter().map(|(_, e)| e));
        for event in due {
            if let Err(e) = self.inject(event.clone()) {
                let kind = event.kind();
                self.emit("script_error", None, json!({ "event": kind, "error": e.to_string() }));
            }
        }
    }

    /// Schedules `on`-triggered script entries for log kinds seen since
    /// the last tick.
    fn arm_log_triggers(&mut self) {
        let new = &self.log[self.log_cursor..];
        for (entry, fired) in &mut self.script {
            if *fired {
                continue;
            }
            let Some(on) = &entry.on else { continue };
            if let Some(hit) = new.iter().find(|l| &l.kind == on) {
                *fired = true;
                self.scheduled.push((hit.t + entry.delay, entry.event.clone()));
            }
        }
        self.log_cursor = self.log.len();
    }

    fn apply(&mut self, decision: ScheduleDecision) {
        for action in decision.actions {
            match action {
                Action::Suspend(id) => {
                    let (aid, body) = self.active.take().expect("suspended task was active");
                    debug_assert_eq!(aid, id);
                    let bytes = serde_json::to_vec(&body).expect("task body serializes");
                    self.tasker.save_context(id, bytes).expect("task exists");
                    self.world.command_base(0.0, 0.0).expect("finite command");
                    self.emit("task_suspended", Some(id), json!({}));
                }
                Action::Start(id) | Action::Resume(id) => {
                    let mut body: Body =
                        serde_json::from_slice(self.tasker.load_context(id).expect("task exists")).expect("valid context");
                    let kind = if matches!(action, Action::Start(_)) {
                        "task_started"
                    } else {
                        body.on_resume(self.world.clock);
                        "task_resumed"
                    };
                    self.emit(kind, Some(id), json!({}));
                    self.active = Some((id, body));
                }
            }
        }
    }

    fn finish(&mut self, id: TaskId, done: Done) {
        let name = self.tasker.task(id).map(|t| t.name.clone()).unwrap_or_default();
        // the base is already held still under the safety task; a command
        // sent right after the release must survive
        if name != "safety" {
            self.world.command_base(0.0, 0.0).expect("finite command");
        }
        self.emit(
            "task_finished",
            Some(id),
            json!({ "name": name, "status": done.status, "reason": done.reason, "violations": done.violations }),
        );
        let decision = if done.status == OutcomeStatus::Aborted {
            self.tasker.terminate(id)
        } else {
            self.tasker.complete(id)
        }
        .expect("active task is executing");
        self.record_outcome(id, name, done);
        self.apply(decision);
    }

    fn record_outcome(&mut self, id: TaskId, name: String, done: Done) {
        let events = self.log.iter().filter(|e| e.task == Some(id)).cloned().collect();
        self.outcomes.push(ScenarioOutcome {
            task: id,
            name,
            status: done.status,
            reason: done.reason,
            violations: done.violations,
            finished_at: self.world.clock,
            events,
        });
    }

    fn process(&mut self, requests: Vec<Request>) -> Result<(), EngineError> {
        for r in requests {
            match r {
                Request::Submit(spec) => {
                    self.submit(spec);
                }
                Request::Schedule { at, event } => self.scheduled.push((at, event)),
                Request::Hazard(h) => self.hazards.push(h),
                Request::SaveMemory => {
                    if let Some(p) = &self.cfg.dialogue.memory_file {
                        self.memory.save(p)?;
                    }
                }
                Request::StopAll => {
                    let victims: Vec<(TaskId, String)> = self
                        .tasker
                        .tasks()
                        .filter(|t| !t.state.is_final() && t.state != TaskState::Executing && t.name != "listening")
                        .map(|t| (t.id, t.name.clone()))
                        .collect();
                    for (id, name) in victims {
                        self.tasker.terminate(id).expect("live task");
                        self.emit("task_finished", Some(id), json!({ "name": name, "status": "aborted", "reason": "stopped" }));
                        self.record_outcome(id, name, Done {
                            status: OutcomeStatus::Aborted,
                            reason: Some("stopped".into()),
                            violations: Vec::new(),
                        });
                    }
                    self.world.command_base(0.0, 0.0).expect("finite command");
                }
            }
        }
        Ok(())
    }
}
