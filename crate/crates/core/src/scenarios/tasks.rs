//! Task bodies. Each is a step function called once per tick while its
//! task is Executing; bodies are serialized into the task context while
//! suspended.

use super::nav::{approach_points, face, stop, Nav, NavStatus};
use super::{HazardReport, LogEntry, OutcomeStatus};
use crate::config::Config;
use crate::dialogue::{
    fuse_confidence, parse_parameter_answer, ClarificationAction, Intent, IntentKind, ParameterMemory, Understander,
};
use crate::geometry::{normalize_angle, Vec2};
use crate::sensors::{
    analyze_table, capture_speech, detect_hotspots, read_tactile, render_thermal, verify_payload, Violation,
};
use crate::tasker::TaskId;
use crate::world::{WorldEvent, WorldState};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::time::Duration;

const FACE_TOLERANCE: f64 = 0.02;

/// What a body may ask of the engine besides driving the robot.
#[derive(Debug, Clone)]
pub(crate) enum Request {
    Submit(super::TaskSpec),
    Schedule { at: f64, event: WorldEvent },
    StopAll,
    Hazard(HazardReport),
    SaveMemory,
}

pub(crate) struct Ctx<'a> {
    pub task: TaskId,
    pub world: &'a mut WorldState,
    pub cfg: &'a Config,
    pub rng: &'a mut ChaCha8Rng,
    pub memory: &'a mut ParameterMemory,
    pub understander: &'a Understander,
    pub log: &'a mut Vec<LogEntry>,
    /// Time of the latest positive response per person.
    pub responses: &'a BTreeMap<String, f64>,
    pub estop: bool,
    pub dispatch: bool,
    pub requests: Vec<Request>,
}

impl Ctx<'_> {
    pub fn now(&self) -> f64 {
        self.world.clock
    }

    pub fn emit(&mut self, kind: &str, payload: Value) {
        self.log.push(LogEntry { t: self.world.clock, kind: kind.to_string(), task: Some(self.task), payload });
    }

    pub fn say(&mut self, to: Option<&str>, text: &str) {
        self.emit("robot_speech", json!({ "to": to, "text": text }));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Done {
    pub status: OutcomeStatus,
    pub reason: Option<String>,
    pub violations: Vec<Violation>,
}

impl Done {
    fn success() -> Self {
        Self { status: OutcomeStatus::Success, reason: None, violations: Vec::new() }
    }

    fn anomaly(reason: impl Into<String>) -> Self {
        Self { status: OutcomeStatus::Anomaly, reason: Some(reason.into()), violations: Vec::new() }
    }

    fn aborted(reason: impl Into<String>) -> Self {
        Self { status: OutcomeStatus::Aborted, reason: Some(reason.into()), violations: Vec::new() }
    }
}

pub(crate) enum Step {
    Continue,
    Done(Done),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "body", rename_all = "snake_case")]
pub(crate) enum Body {
    Patrol(Patrol),
    HazardReport(HazardReturn),
    Transport(Transport),
    FallResponse(FallResponse),
    GoTo(GoTo),
    Safety(Safety),
    Listening(Listening),
}

impl Body {
    pub fn step(&mut self, cx: &mut Ctx) -> Step {
        match self {
            Body::Patrol(b) => b.step(cx),
            Body::HazardReport(b) => b.step(cx),
            Body::Transport(b) => b.step(cx),
            Body::FallResponse(b) => b.step(cx),
            Body::GoTo(b) => b.step(cx),
            Body::Safety(b) => b.step(cx),
            Body::Listening(b) => b.step(cx),
        }
    }

    /// True for the listening task while it waits for speech.
    pub fn is_idle(&self) -> bool {
        matches!(self, Body::Listening(Listening { phase: ListenPhase::Idle }))
    }

    /// Called when a suspended task regains control: paths are replanned
    /// from the current pose and waiting timers restart.
    pub fn on_resume(&mut self, now: f64) {
        match self {
            Body::Patrol(b) => b.nav.invalidate(),
            Body::HazardReport(b) => b.nav.invalidate(),
            Body::Transport(b) => {
                if let Some(n) = &mut b.nav {
                    n.invalidate();
                }
                if let TransportPhase::AwaitPlacement { since } = &mut b.phase {
                    *since = now;
                }
            }
            Body::FallResponse(b) => {
                if let Some(n) = &mut b.nav {
                    n.invalidate();
                }
                if let FallPhase::Wait { asked_at } = &mut b.phase {
                    *asked_at = now;
                }
            }
            Body::GoTo(b) => {
                if let Some(n) = &mut b.nav {
                    n.invalidate();
                }
            }
            Body::Safety(_) => {}
            Body::Listening(b) => match &mut b.phase {
                ListenPhase::Approach { nav, .. } => nav.invalidate(),
                ListenPhase::AwaitRepeat { since, .. } | ListenPhase::AskParams { since, .. } => *since = now,
                _ => {}
            },
        }
    }
}

fn v2(p: Vec2) -> Value {
    json!([p.x, p.y])
}

// ---------------------------------------------------------------- patrol

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct Patrol {
    a: Vec2,
    b: Vec2,
    laps: Option<u32>,
    laps_done: u32,
    started: bool,
    /// Heading for B; otherwise for A.
    to_b: bool,
    /// Still on the initial leg to A.
    setup: bool,
    nav: Nav,
}

impl Patrol {
    pub fn new(a: Vec2, b: Vec2, laps: Option<u32>) -> Self {
        Self { a, b, laps, laps_done: 0, started: false, to_b: false, setup: true, nav: Nav::to(a) }
    }

    fn step(&mut self, cx: &mut Ctx) -> Step {
        if !self.started {
            self.started = true;
            cx.emit("patrol_started", json!({ "a": v2(self.a), "b": v2(self.b), "laps": self.laps }));
            if self.laps == Some(0) {
                return Step::Done(Done::success());
            }
        }
        let frame = render_thermal(cx.world, &cx.cfg.sensors.thermal);
        let hottest = detect_hotspots(&frame, cx.cfg.patrol.threshold)
            .into_iter()
            .max_by(|x, y| x.peak_temperature.total_cmp(&y.peak_temperature));
        if let Some(h) = hottest {
            stop(cx.world);
            let bearing = normalize_angle(cx.world.robot.theta + h.bearing);
            cx.emit(
                "hotspot_detected",
                json!({
                    "peak_temperature": h.peak_temperature,
                    "bearing": bearing,
                    "pixel_centroid": [h.pixel_centroid.0, h.pixel_centroid.1],
                    "estimated_range": h.estimated_range,
                }),
            );
            let mut to_base = Nav::to(cx.world.base_station.position());
            if let Err(e) = to_base.plan(cx.world) {
                cx.emit("base_unreachable", json!({ "reason": e }));
                return Step::Done(Done::aborted(format!("base unreachable: {e}")));
            }
            let report = HazardReturn {
                detected_at: cx.now(),
                bearing,
                peak_temperature: h.peak_temperature,
                nav: to_base,
            };
            cx.requests.push(Request::Submit(super::TaskSpec::HazardReport(report)));
            return Step::Done(Done { reason: Some("hazard detected".into()), ..Done::success() });
        }
        match self.nav.step(cx.world) {
            NavStatus::Moving => Step::Continue,
            NavStatus::Failed(e) => Step::Done(Done::aborted(format!("waypoint unreachable: {e}"))),
            NavStatus::Arrived => {
                let name = if self.to_b { "b" } else { "a" };
                cx.emit("waypoint_reached", json!({ "waypoint": name }));
                if self.to_b {
                    self.to_b = false;
                    self.nav = Nav::to(self.a);
                } else {
                    if self.setup {
                        self.setup = false;
                    } else {
                        self.laps_done += 1;
                        cx.emit("lap_completed", json!({ "laps": self.laps_done }));
                        if self.laps.is_some_and(|n| self.laps_done >= n) {
                            return Step::Done(Done::success());
                        }
                    }
                    self.to_b = true;
                    self.nav = Nav::to(self.b);
                }
                Step::Continue
            }
        }
    }
}

/// Return-to-base leg after a patrol detection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HazardReturn {
    detected_at: f64,
    bearing: f64,
    peak_temperature: f64,
    nav: Nav,
}

impl HazardReturn {
    fn step(&mut self, cx: &mut Ctx) -> Step {
        match self.nav.step(cx.world) {
            NavStatus::Moving => Step::Continue,
            NavStatus::Failed(e) => {
                cx.emit("base_unreachable", json!({ "reason": e }));
                Step::Done(Done::aborted(format!("base unreachable: {e}")))
            }
            NavStatus::Arrived => {
                let d = cx.world.robot.position().distance(cx.world.base_station.position());
                let report = HazardReport {
                    detected_at: self.detected_at,
                    bearing: self.bearing,
                    peak_temperature: self.peak_temperature,
                    reported_at_base: d <= cx.cfg.patrol.base_radius,
                };
                cx.emit("hazard_report", serde_json::to_value(&report).expect("report serializes"));
                cx.say(None, &format!("Warning: hot object at {:.1} degrees detected during patrol.", report.peak_temperature));
                cx.requests.push(Request::Hazard(report));
                Step::Done(Done::success())
            }
        }
    }
}

// ------------------------------------------------------------- transport

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "snake_case")]
pub(crate) enum TransportPhase {
    Start,
    ToPickup,
    AwaitPlacement { since: f64 },
    Deliver,
    FaceRequester,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct Transport {
    item: String,
    requester: Option<String>,
    parameters: BTreeMap<String, String>,
    phase: TransportPhase,
    nav: Option<Nav>,
}

impl Transport {
    pub fn new(item: String, requester: Option<String>, parameters: BTreeMap<String, String>) -> Self {
        Self { item, requester, parameters, phase: TransportPhase::Start, nav: None }
    }

    fn requester_position(&self, cx: &Ctx) -> Option<Vec2> {
        self.requester.as_deref().and_then(|id| cx.world.person(id)).map(|p| p.position)
    }

    fn step(&mut self, cx: &mut Ctx) -> Step {
        match &mut self.phase {
            TransportPhase::Start => {
                if !cx.cfg.payloads.contains_key(&self.item) {
                    return Step::Done(Done::aborted(format!("no payload profile for {:?}", self.item)));
                }
                cx.emit(
                    "transport_started",
                    json!({ "item": self.item, "requester": self.requester, "parameters": self.parameters }),
                );
                self.nav = Some(Nav::to(cx.cfg.pickup()));
                self.phase = TransportPhase::ToPickup;
                self.step(cx)
            }
            TransportPhase::ToPickup => match self.nav.as_mut().expect("nav set").step(cx.world) {
                NavStatus::Moving => Step::Continue,
                NavStatus::Failed(e) => Step::Done(Done::aborted(format!("pickup unreachable: {e}"))),
                NavStatus::Arrived => {
                    self.nav = None;
                    cx.emit("awaiting_placement", json!({ "item": self.item }));
                    cx.say(None, &format!("Please put the {} on my table.", self.item));
                    self.phase = TransportPhase::AwaitPlacement { since: cx.now() };
                    Step::Continue
                }
            },
            TransportPhase::AwaitPlacement { since } => {
                let reading = analyze_table(&read_tactile(cx.world), &cx.cfg.sensors.table);
                if !reading.present {
                    if cx.now() - *since >= cx.cfg.transport.placement_timeout - 1e-9 {
                        cx.emit("placement_timeout", json!({ "item": self.item }));
                        return Step::Done(Done::aborted("placement timeout"));
                    }
                    return Step::Continue;
                }
                let profile = cx.cfg.payloads[&self.item];
                let result = verify_payload(&reading, &profile);
                cx.emit("payload_checked", json!({ "reading": reading, "expected": profile, "violations": result.violations }));
                if !result.is_ok() {
                    let names: Vec<&str> = result.violations.iter().map(|v| v.as_str()).collect();
                    cx.emit("anomaly", json!({ "item": self.item, "violations": names }));
                    cx.say(None, &format!("There is a problem with the {}: {}.", self.item, names.join(", ")));
                    return Step::Done(Done {
                        status: OutcomeStatus::Anomaly,
                        reason: Some(names.join(", ")),
                        violations: result.violations.into_iter().collect(),
                    });
                }
                match self.requester_position(cx) {
                    None => {
                        cx.emit("delivered", json!({ "item": self.item, "requester": Value::Null }));
                        Step::Done(Done::success())
                    }
                    Some(p) => {
                        let d = cx.cfg.transport.delivery_distance;
                        self.nav = Some(Nav::to_any(approach_points(cx.world, p, d)));
                        self.phase = TransportPhase::Deliver;
                        Step::Continue
                    }
                }
            }
            TransportPhase::Deliver => match self.nav.as_mut().expect("nav set").step(cx.world) {
                NavStatus::Moving => Step::Continue,
                NavStatus::Failed(e) => Step::Done(Done::aborted(format!("requester unreachable: {e}"))),
                NavStatus::Arrived => {
                    self.nav = None;
                    self.phase = TransportPhase::FaceRequester;
                    Step::Continue
                }
            },
            TransportPhase::FaceRequester => {
                let Some(p) = self.requester_position(cx) else {
                    return Step::Done(Done::aborted("requester disappeared"));
                };
                if !face(cx.world, p, FACE_TOLERANCE) {
                    return Step::Continue;
                }
                cx.emit(
                    "delivered",
                    json!({ "item": self.item, "requester": self.requester, "parameters": self.parameters }),
                );
                cx.say(self.requester.as_deref(), &format!("Here is your {}.", self.item));
                Step::Done(Done::success())
            }
        }
    }
}

// --------------------------------------------------------- fall response

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "snake_case")]
pub(crate) enum FallPhase {
    Start,
    Approach,
    Face,
    Wait { asked_at: f64 },
}

/// Approach a person, ask whether they are fine and raise an alert when
/// no answer comes. Also serves spoken calls for help.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct FallResponse {
    person: String,
    /// Responses after this time count.
    since: f64,
    phase: FallPhase,
    nav: Option<Nav>,
}

impl FallResponse {
    pub fn new(person: String, since: f64) -> Self {
        Self { person, since, phase: FallPhase::Start, nav: None }
    }

    pub fn person(&self) -> &str {
        &self.person
    }

    fn alert(&self, cx: &mut Ctx, reason: &str) -> Step {
        stop(cx.world);
        cx.emit("alert", json!({ "person_id": self.person, "reason": reason }));
        Step::Done(Done::anomaly(reason))
    }

    fn step(&mut self, cx: &mut Ctx) -> Step {
        let Some(pos) = cx.world.person(&self.person).map(|p| p.position) else {
            return Step::Done(Done::aborted(format!("unknown person {:?}", self.person)));
        };
        match &mut self.phase {
            FallPhase::Start => {
                cx.emit("fall_response_started", json!({ "person_id": self.person }));
                let mut nav = Nav::to_any(approach_points(cx.world, pos, cx.cfg.fall.approach_distance));
                if let Err(e) = nav.plan(cx.world) {
                    return self.alert(cx, &format!("person unreachable: {e}"));
                }
                self.nav = Some(nav);
                self.phase = FallPhase::Approach;
                self.step(cx)
            }
            FallPhase::Approach => match self.nav.as_mut().expect("nav set").step(cx.world) {
                NavStatus::Moving => Step::Continue,
                NavStatus::Failed(e) => self.alert(cx, &format!("person unreachable: {e}")),
                NavStatus::Arrived => {
                    self.nav = None;
                    self.phase = FallPhase::Face;
                    Step::Continue
                }
            },
            FallPhase::Face => {
                if face(cx.world, pos, FACE_TOLERANCE) {
                    cx.emit("check_question", json!({ "person_id": self.person }));
                    cx.say(Some(&self.person), "Are you okay? Please answer me.");
                    self.phase = FallPhase::Wait { asked_at: cx.now() };
                }
                Step::Continue
            }
            FallPhase::Wait { asked_at } => {
                let asked_at = *asked_at;
                if let Some(u) = cx.world.take_utterance(Some(&self.person)) {
                    let speaker = cx.world.person(&self.person).cloned().expect("checked above");
                    let fused = fuse_confidence(&capture_speech(cx.world, &speaker, &u.text, &cx.cfg.sensors.mic));
                    cx.emit(
                        "person_ok",
                        json!({ "person_id": self.person, "via": "speech", "text": u.text, "fused": fused }),
                    );
                    return Step::Done(Done::success());
                }
                if cx.responses.get(&self.person).is_some_and(|&t| t >= self.since) {
                    cx.emit("person_ok", json!({ "person_id": self.person, "via": "respond" }));
                    return Step::Done(Done::success());
                }
                if cx.now() - asked_at >= cx.cfg.fall.response_timeout - 1e-9 {
                    let reason = format!("no response within {} s", cx.cfg.fall.response_timeout);
                    return self.alert(cx, &reason);
                }
                Step::Continue
            }
        }
    }
}

// ----------------------------------------------------------------- go to

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct GoTo {
    destination: String,
    speaker: Option<String>,
    nav: Option<Nav>,
}

impl GoTo {
    pub fn new(destination: String, speaker: Option<String>) -> Self {
        Self { destination, speaker, nav: None }
    }

    fn goals(&self, cx: &Ctx) -> Option<Vec<Vec2>> {
        match self.destination.as_str() {
            "base" => Some(vec![cx.world.base_station.position()]),
            "speaker" => {
                let p = cx.world.person(self.speaker.as_deref()?)?.position;
                Some(approach_points(cx.world, p, cx.cfg.dialogue.approach_distance))
            }
            "a" => cx.cfg.waypoint_a().map(|p| vec![p]),
            "b" => cx.cfg.waypoint_b().map(|p| vec![p]),
            name => cx.cfg.location(name).map(|p| vec![p]),
        }
    }

    fn step(&mut self, cx: &mut Ctx) -> Step {
        if self.nav.is_none() {
            let Some(goals) = self.goals(cx) else {
                return Step::Done(Done::aborted(format!("unknown destination {:?}", self.destination)));
            };
            cx.emit("goto_started", json!({ "destination": self.destination }));
            self.nav = Some(Nav::to_any(goals));
        }
        match self.nav.as_mut().expect("nav set").step(cx.world) {
            NavStatus::Moving => Step::Continue,
            NavStatus::Failed(e) => Step::Done(Done::aborted(format!("destination unreachable: {e}"))),
            NavStatus::Arrived => {
                cx.emit("arrived", json!({ "destination": self.destination }));
                Step::Done(Done::success())
            }
        }
    }
}

// ---------------------------------------------------------------- safety

/// Holds the base still while the emergency stop is engaged.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub(crate) struct Safety {}

impl Safety {
    fn step(&mut self, cx: &mut Ctx) -> Step {
        if cx.estop {
            stop(cx.world);
            Step::Continue
        } else {
            Step::Done(Done::success())
        }
    }
}

// ------------------------------------------------------------- listening

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "snake_case")]
pub(crate) enum ListenPhase {
    Idle,
    Approach { person: String, text: String, attempt: u32, nav: Nav },
    Face { person: String, text: String, attempt: u32 },
    AwaitRepeat { person: String, text: String, attempt: u32, since: f64 },
    AskParams { person: String, intent: Intent, pending: Vec<String>, asked: bool, since: f64 },
}

/// Idle behavior: hear commands, clarify when needed and hand them on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct Listening {
    phase: ListenPhase,
}

impl Default for Listening {
    fn default() -> Self {
        Self { phase: ListenPhase::Idle }
    }
}

/// What a failed recognition hears: each word survives with probability
/// one half.
fn garble(text: &str, rng: &mut ChaCha8Rng) -> String {
    text.split_whitespace().filter(|_| rng.gen_bool(0.5)).collect::<Vec<_>>().join(" ")
}

impl Listening {
    fn step(&mut self, cx: &mut Ctx) -> Step {
        let phase = std::mem::replace(&mut self.phase, ListenPhase::Idle);
        self.phase = match phase {
            ListenPhase::Idle => match cx.world.take_utterance(None) {
                Some(u) => self.evaluate(cx, u.person_id, u.text, 0),
                None => ListenPhase::Idle,
            },
            ListenPhase::Approach { person, text, attempt, mut nav } => match nav.step(cx.world) {
                NavStatus::Moving => ListenPhase::Approach { person, text, attempt, nav },
                NavStatus::Arrived => ListenPhase::Face { person, text, attempt },
                NavStatus::Failed(e) => {
                    // listen again from where we are
                    cx.emit("approach_failed", json!({ "person_id": person, "reason": e }));
                    ListenPhase::Face { person, text, attempt }
                }
            },
            ListenPhase::Face { person, text, attempt } => match cx.world.person(&person).map(|p| p.position) {
                None => ListenPhase::Idle,
                Some(p) => {
                    if face(cx.world, p, FACE_TOLERANCE) {
                        self.ask_repeat(cx, person, text, attempt)
                    } else {
                        ListenPhase::Face { person, text, attempt }
                    }
                }
            },
            ListenPhase::AwaitRepeat { person, text, attempt, since } => {
                if let Some(u) = cx.world.take_utterance(Some(&person)) {
                    self.evaluate(cx, person, u.text, attempt)
                } else if cx.now() - since >= cx.cfg.dialogue.repeat_timeout - 1e-9 {
                    cx.emit("no_repeat", json!({ "person_id": person }));
                    ListenPhase::Idle
                } else {
                    ListenPhase::AwaitRepeat { person, text, attempt, since }
                }
            }
            ListenPhase::AskParams { person, intent, pending, asked, since } => {
                self.ask_params(cx, person, intent, pending, asked, since)
            }
        };
        Step::Continue
    }

    fn ask_repeat(&mut self, cx: &mut Ctx, person: String, text: String, attempt: u32) -> ListenPhase {
        cx.emit("ask_repeat", json!({ "person_id": person, "attempt": attempt }));
        cx.say(Some(&person), "Could you repeat that, please?");
        if cx.cfg.dialogue.simulate_repeats {
            let event = WorldEvent::Speak { person_id: person.clone(), text: text.clone() };
            cx.requests.push(Request::Schedule { at: cx.now() + cx.cfg.dialogue.repeat_delay, event });
        }
        ListenPhase::AwaitRepeat { person, text, attempt, since: cx.now() }
    }

    fn approach(&mut self, cx: &mut Ctx, person: String, text: String, attempt: u32) -> ListenPhase {
        let Some(p) = cx.world.person(&person).map(|p| p.position) else {
            return ListenPhase::Idle;
        };
        cx.emit("approach_speaker", json!({ "person_id": person, "attempt": attempt }));
        let nav = Nav::to_any(approach_points(cx.world, p, cx.cfg.dialogue.approach_distance));
        ListenPhase::Approach { person, text, attempt, nav }
    }

    fn not_understood(&mut self, cx: &mut Ctx, person: &str) -> ListenPhase {
        cx.emit("not_understood", json!({ "person_id": person }));
        cx.say(Some(person), "Sorry, I did not understand.");
        ListenPhase::Idle
    }

    /// One capture of `text` and the clarification decision on it.
    fn evaluate(&mut self, cx: &mut Ctx, person: String, text: String, attempt: u32) -> ListenPhase {
        let Some(speaker) = cx.world.person(&person).cloned() else {
            return ListenPhase::Idle;
        };
        let sample = capture_speech(cx.world, &speaker, &text, &cx.cfg.sensors.mic);
        let fused = fuse_confidence(&sample);
        let policy = cx.cfg.dialogue.policy;
        let action = policy.decide(fused, attempt);
        cx.emit(
            "speech_captured",
            json!({
                "person_id": person,
                "attempt": attempt,
                "omni_score": sample.omni_score,
                "dir_score": sample.dir_score,
                "fused": fused,
                "action": action,
            }),
        );
        let last = attempt >= policy.max_attempts;
        match action {
            // turn to the speaker first so the directional microphone helps
            ClarificationAction::AskRepeat => ListenPhase::Face { person, text, attempt: attempt + 1 },
            ClarificationAction::ApproachSpeaker if last => self.not_understood(cx, &person),
            ClarificationAction::ApproachSpeaker => self.approach(cx, person, text, attempt + 1),
            ClarificationAction::Accept => {
                let heard = if cx.rng.gen_bool(fused.clamp(0.0, 1.0)) { text.clone() } else { garble(&text, cx.rng) };
                let timeout = Duration::from_secs_f64(cx.cfg.dialogue.understander_timeout.max(0.0));
                let understood = cx.understander.understand(&heard, timeout);
                cx.emit(
                    "transcript",
                    json!({ "person_id": person, "heard": heard, "fallback": understood.fallback, "kind": understood.intent.kind }),
                );
                if understood.intent.kind == IntentKind::Unknown {
                    if last {
                        self.not_understood(cx, &person)
                    } else {
                        self.approach(cx, person, text, attempt + 1)
                    }
                } else {
                    self.accept(cx, person, understood.intent, attempt)
                }
            }
        }
    }

    fn accept(&mut self, cx: &mut Ctx, person: String, intent: Intent, attempt: u32) -> ListenPhase {
        cx.emit("intent_accepted", json!({ "person_id": person, "intent": intent, "attempt": attempt }));
        let pending: Vec<String> = cx.memory.missing(&intent).into_iter().collect();
        if pending.is_empty() {
            self.dispatch(cx, person, intent);
            ListenPhase::Idle
        } else {
            self.ask_params(cx, person, intent, pending, false, cx.now())
        }
    }

    fn ask_params(
        &mut self,
        cx: &mut Ctx,
        person: String,
        mut intent: Intent,
        mut pending: Vec<String>,
        asked: bool,
        since: f64,
    ) -> ListenPhase {
        let Some(key) = pending.first().cloned() else {
            self.dispatch(cx, person, intent);
            return ListenPhase::Idle;
        };
        if !asked {
            cx.emit("question_asked", json!({ "person_id": person, "key": key }));
            let item = intent.item.clone().unwrap_or_default();
            cx.say(Some(&person), &format!("How much {key} would you like with your {item}?"));
            return ListenPhase::AskParams { person, intent, pending, asked: true, since: cx.now() };
        }
        let answer = cx.world.take_utterance(Some(&person));
        let value = match &answer {
            Some(u) => parse_parameter_answer(&key, &u.text),
            None if cx.now() - since >= cx.cfg.dialogue.question_timeout - 1e-9 => None,
            None => return ListenPhase::AskParams { person, intent, pending, asked, since },
        };
        match value {
            Some(v) => {
                cx.emit("parameter_answered", json!({ "key": key, "value": v }));
                intent.parameters.insert(key.clone(), v);
            }
            None => {
                let fallback = cx.memory.last_value(&key).map(str::to_string);
                cx.emit("parameter_defaulted", json!({ "key": key, "value": fallback }));
                if let Some(v) = fallback {
                    intent.parameters.insert(key.clone(), v);
                }
            }
        }
        pending.remove(0);
        self.ask_params(cx, person, intent, pending, false, cx.now())
    }

    fn dispatch(&mut self, cx: &mut Ctx, person: String, intent: Intent) {
        cx.memory.absorb(&intent);
        cx.requests.push(Request::SaveMemory);
        if !cx.dispatch {
            return;
        }
        use super::TaskSpec;
        let spec = match intent.kind {
            IntentKind::Fetch => TaskSpec::Transport {
                item: intent.item.clone().unwrap_or_default(),
                requester: Some(person.clone()),
                parameters: intent.parameters.clone(),
            },
            IntentKind::Patrol => TaskSpec::Patrol { laps: cx.cfg.patrol.laps },
            IntentKind::GoTo => TaskSpec::GoTo {
                destination: intent.parameters.get("destination").cloned().unwrap_or_else(|| "speaker".into()),
                speaker: Some(person.clone()),
            },
            IntentKind::Help => TaskSpec::Assist { person_id: person.clone() },
            IntentKind::Stop => {
                cx.requests.push(Request::StopAll);
                cx.say(Some(&person), "Stopping.");
                return;
            }
            IntentKind::Unknown => return,
        };
        cx.say(Some(&person), "On my way.");
        cx.requests.push(Request::Submit(spec));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn garble_keeps_a_subsequence() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let g = garble("bring me tea with two sugars", &mut rng);
            let mut words = "bring me tea with two sugars".split(' ');
            assert!(g.split_whitespace().all(|w| words.any(|x| x == w)));
        }
    }

    #[test]
    fn bodies_round_trip_through_context_bytes() {
        let bodies = vec![
            Body::Patrol(Patrol::new(Vec2::new(1.0, 1.0), Vec2::new(3.0, 1.0), Some(2))),
            Body::Transport(Transport::new("tea".into(), Some("alice".into()), BTreeMap::new())),
            Body::FallResponse(FallResponse::new("alice".into(), 3.0)),
            Body::GoTo(GoTo::new("base".into(), None)),
            Body::Safety(Safety::default()),
            Body::Listening(Listening::default()),
        ];
        for b in bodies {
            let bytes = serde_json::to_vec(&b).unwrap();
            assert_eq!(serde_json::from_slice::<Body>(&bytes).unwrap(), b);
        }
    }
}
