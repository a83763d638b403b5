//! World and scenario configuration, loaded from TOML.
//!
//! See `docs/config.md` for the full schema.

use crate::dialogue::ClarificationPolicy;
use crate::geometry::{Rect, Vec2};
use crate::sensors::{PayloadProfile, SensorConfig};
use crate::world::{
    Footprint, ObjectKind, Person, Placement, Pose, RobotLimits, SimObject, TableFrame, WorldEvent, WorldState,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    Parse { path: PathBuf, source: Box<toml::de::Error> },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldSection {
    /// `[min_x, min_y, max_x, max_y]`, meters.
    pub bounds: [f64; 4],
    /// `[x, y, theta]`.
    #[serde(default)]
    pub robot: [f64; 3],
    #[serde(default)]
    pub base_station: [f64; 3],
    #[serde(default = "default_ambient")]
    pub ambient_temperature: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub table: TableFrame,
    #[serde(default)]
    pub limits: RobotLimits,
}

fn default_ambient() -> f64 {
    22.0
}

/// A free-standing object in world coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectEntry {
    pub id: String,
    #[serde(default = "default_kind")]
    pub kind: ObjectKind,
    pub x: f64,
    pub y: f64,
    #[serde(default = "default_ambient")]
    pub temperature: f64,
    #[serde(default = "default_mass")]
    pub mass: f64,
    #[serde(default = "default_footprint")]
    pub footprint: Footprint,
}

fn default_kind() -> ObjectKind {
    ObjectKind::Generic
}

fn default_mass() -> f64 {
    0.3
}

fn default_footprint() -> Footprint {
    Footprint::Disc { radius: 0.04 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonEntry {
    pub id: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoints {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Priorities {
    pub fall_response: i64,
    pub safety: i64,
    pub hazard_report: i64,
    pub transport: i64,
    pub goto: i64,
    pub patrol: i64,
    pub idle: i64,
}

impl Default for Priorities {
    fn default() -> Self {
        Self { fall_response: 100, safety: 90, hazard_report: 80, transport: 50, goto: 30, patrol: 20, idle: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatrolConfig {
    /// Hotspot detection threshold, degrees Celsius.
    pub threshold: f64,
    /// Stop after this many A→B→A laps; unbounded when absent.
    pub laps: Option<u32>,
    /// A report counts as delivered at base within this distance, meters.
    pub base_radius: f64,
}

impl Default for PatrolConfig {
    fn default() -> Self {
        Self { threshold: 45.0, laps: None, base_radius: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransportConfig {
    /// Where the robot waits for the item to be put on its table.
    pub pickup: [f64; 2],
    /// Item and requester for the `transport` scenario.
    pub item: String,
    pub requester: Option<String>,
    pub parameters: BTreeMap<String, String>,
    pub placement_timeout: f64,
    /// Delivery stops this far from the requester, meters.
    pub delivery_distance: f64,
}

impl Default for TransportConfig {
    fn default() -> Self {
        Self {
            pickup: [0.0, 0.0],
            item: "tea".into(),
            requester: None,
            parameters: BTreeMap::new(),
            placement_timeout: 120.0,
            delivery_distance: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FallConfig {
    pub approach_distance: f64,
    pub response_timeout: f64,
}

impl Default for FallConfig {
    fn default() -> Self {
        Self { approach_distance: 1.0, response_timeout: 15.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DialogueConfig {
    pub policy: ClarificationPolicy,
    /// Simulated speakers repeat themselves when asked to.
    pub simulate_repeats: bool,
    pub repeat_delay: f64,
    /// How long to wait for a repetition before giving up.
    pub repeat_timeout: f64,
    /// How long to wait for an answer to a parameter question.
    pub question_timeout: f64,
    pub approach_distance: f64,
    pub understander_timeout: f64,
    /// Learned parameters are loaded from and saved to this file.
    pub memory_file: Option<PathBuf>,
}

impl Default for DialogueConfig {
    fn default() -> Self {
        Self {
            policy: ClarificationPolicy::default(),
            simulate_repeats: true,
            repeat_delay: 1.0,
            repeat_timeout: 10.0,
            question_timeout: 15.0,
            approach_distance: 1.0,
            understander_timeout: 2.0,
            memory_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComprehensionConfig {
    pub trials: usize,
    /// Edge of the square room centred on the robot, meters.
    pub room_size: f64,
    /// Sim-time cap per trial, seconds.
    pub trial_budget: f64,
    pub commands: Vec<String>,
}

impl Default for ComprehensionConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            room_size: 6.0,
            trial_budget: 120.0,
            commands: [
                "bring me tea",
                "bring me some water",
                "please bring me my medicine",
                "bring me tea with two sugars",
                "patrol the room",
                "go to the kitchen",
                "come here",
                "stop",
                "help",
            ]
            .map(String::from)
            .to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Simulation step, seconds.
    pub tick: f64,
    /// Scenario runs stop at this sim time, seconds.
    pub budget: f64,
    pub telemetry_hz: f64,
    /// Outcome the scenario is expected to end with; any other outcome
    /// makes the CLI exit nonzero.
    pub expect: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { tick: 0.1, budget: 600.0, telemetry_hz: 10.0, expect: None }
    }
}

/// An event applied at a fixed time, or after the first log entry of a
/// given kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptEntry {
    #[serde(default)]
    pub at: Option<f64>,
    #[serde(default)]
    pub on: Option<String>,
    #[serde(default)]
    pub delay: f64,
    #[serde(flatten)]
    pub event: WorldEvent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub world: WorldSection,
    /// Axis-aligned rectangles `[min_x, min_y, max_x, max_y]`.
    #[serde(default)]
    pub obstacles: Vec<[f64; 4]>,
    #[serde(default)]
    pub objects: Vec<ObjectEntry>,
    #[serde(default)]
    pub persons: Vec<PersonEntry>,
    #[serde(default)]
    pub waypoints: Option<Waypoints>,
    /// Named destinations for spoken go-to commands.
    #[serde(default)]
    pub locations: BTreeMap<String, [f64; 2]>,
    /// Expected table profile per fetchable item.
    #[serde(default)]
    pub payloads: BTreeMap<String, PayloadProfile>,
    #[serde(default)]
    pub sensors: SensorConfig,
    #[serde(default)]
    pub priorities: Priorities,
    #[serde(default)]
    pub patrol: PatrolConfig,
    #[serde(default)]
    pub transport: TransportConfig,
    #[serde(default)]
    pub fall: FallConfig,
    #[serde(default)]
    pub dialogue: DialogueConfig,
    #[serde(default)]
    pub comprehension: ComprehensionConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub script: Vec<ScriptEntry>,
}

fn vec2(p: [f64; 2]) -> Vec2 {
    Vec2::new(p[0], p[1])
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text).map_err(|e| match e {
            ConfigError::Parse { source, .. } => ConfigError::Parse { path: path.to_path_buf(), source },
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Config = toml::from_str(text)
            .map_err(|e| ConfigError::Parse { path: PathBuf::from("<string>"), source: Box::new(e) })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// A bare room with default settings.
    pub fn room(bounds: Rect) -> Self {
        Self {
            world: WorldSection {
                bounds: [bounds.min_x, bounds.min_y, bounds.max_x, bounds.max_y],
                robot: [0.0; 3],
                base_station: [0.0; 3],
                ambient_temperature: default_ambient(),
                seed: 0,
                table: TableFrame::default(),
                limits: RobotLimits::default(),
            },
            obstacles: Vec::new(),
            objects: Vec::new(),
            persons: Vec::new(),
            waypoints: None,
            locations: BTreeMap::new(),
            payloads: BTreeMap::new(),
            sensors: SensorConfig::default(),
            priorities: Priorities::default(),
            patrol: PatrolConfig::default(),
            transport: TransportConfig::default(),
            fall: FallConfig::default(),
            dialogue: DialogueConfig::default(),
            comprehension: ComprehensionConfig::default(),
            run: RunConfig::default(),
            script: Vec::new(),
        }
    }

    pub fn bounds(&self) -> Rect {
        let [a, b, c, d] = self.world.bounds;
        Rect::new(a, b, c, d)
    }

    pub fn waypoint_a(&self) -> Option<Vec2> {
        self.waypoints.map(|w| vec2(w.a))
    }

    pub fn waypoint_b(&self) -> Option<Vec2> {
        self.waypoints.map(|w| vec2(w.b))
    }

    pub fn pickup(&self) -> Vec2 {
        vec2(self.transport.pickup)
    }

    pub fn location(&self, name: &str) -> Option<Vec2> {
        self.locations.get(name).copied().map(vec2)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        let [x0, y0, x1, y1] = self.world.bounds;
        if !(x0 < x1 && y0 < y1 && self.world.bounds.iter().all(|v| v.is_finite())) {
            return bad("world.bounds must be finite with min < max".into());
        }
        let nums = |name: &str, vals: &[f64]| {
            if vals.iter().all(|v| v.is_finite()) {
                Ok(())
            } else {
                Err(ConfigError::Invalid(format!("{name} must be finite")))
            }
        };
        nums("world.robot", &self.world.robot)?;
        nums("world.base_station", &self.world.base_station)?;
        for (i, o) in self.obstacles.iter().enumerate() {
            nums(&format!("obstacles[{i}]"), o)?;
        }
        if !(self.run.tick > 0.0 && self.run.tick <= crate::world::MAX_DT) {
            return bad(format!("run.tick must be in (0, {}]", crate::world::MAX_DT));
        }
        if !(self.run.budget > 0.0 && self.run.budget.is_finite()) {
            return bad("run.budget must be positive".into());
        }
        if !(self.run.telemetry_hz > 0.0 && self.run.telemetry_hz.is_finite()) {
            return bad("run.telemetry_hz must be positive".into());
        }
        if let Some(e) = &self.run.expect {
            if !["success", "anomaly", "aborted"].contains(&e.as_str()) {
                return bad(format!("run.expect must be success, anomaly or aborted, not {e:?}"));
            }
        }
        for (i, s) in self.script.iter().enumerate() {
            if s.at.is_some() == s.on.is_some() {
                return bad(format!("script[{i}] needs exactly one of `at` or `on`"));
            }
            if !(s.delay >= 0.0 && s.delay.is_finite()) || s.at.is_some_and(|t| !(t >= 0.0 && t.is_finite())) {
                return bad(format!("script[{i}] times must be finite and >= 0"));
            }
            let person = match &s.event {
                WorldEvent::PersonFall { person_id }
                | WorldEvent::PersonRespond { person_id, .. }
                | WorldEvent::Speak { person_id, .. } => Some(person_id),
                _ => None,
            };
            if let Some(p) = person {
                if !self.persons.iter().any(|q| &q.id == p) {
                    return bad(format!("script[{i}] refers to unknown person {p:?}"));
                }
            }
        }
        for (item, p) in &self.payloads {
            if !(p.weight_kg.is_finite() && p.tolerance_kg >= 0.0 && p.tolerance_kg.is_finite()) {
                return bad(format!("payloads.{item} needs finite weight and a tolerance >= 0"));
            }
        }
        // building the world checks the rest
        self.build_world().map(|_| ())
    }

    pub fn build_world(&self) -> Result<WorldState, ConfigError> {
        let mut w = WorldState::new(self.bounds());
        let [x, y, t] = self.world.robot;
        w.robot = Pose::new(x, y, t);
        let [x, y, t] = self.world.base_station;
        w.base_station = Pose::new(x, y, t);
        w.ambient_temperature = self.world.ambient_temperature;
        w.rng_seed = self.world.seed;
        w.table_frame = self.world.table;
        w.limits = self.world.limits;
        w.obstacles = self.obstacles.iter().map(|&[a, b, c, d]| Rect::new(a, b, c, d)).collect();
        if !w.disc_is_free(w.robot.position()) {
            return Err(ConfigError::Invalid(format!("robot start ({}, {}) collides or is out of bounds", x, y)));
        }
        if !w.bounds.contains(w.base_station.position()) {
            return Err(ConfigError::Invalid("base_station lies outside world.bounds".into()));
        }
        for o in &self.objects {
            let object = SimObject {
                id: o.id.clone(),
                kind: o.kind,
                position: Vec2::default(),
                on_table: false,
                surface_temperature: o.temperature,
                mass: o.mass,
                footprint: o.footprint,
            };
            w.inject_event(WorldEvent::PlaceObject { object, placement: Placement::AtPosition { x: o.x, y: o.y } })
                .map_err(|e| ConfigError::Invalid(format!("objects.{}: {e}", o.id)))?;
        }
        for p in &self.persons {
            if w.persons.iter().any(|q| q.id == p.id) {
                return Err(ConfigError::Invalid(format!("duplicate person id {:?}", p.id)));
            }
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(ConfigError::Invalid(format!("persons.{} position must be finite", p.id)));
            }
            w.persons.push(Person { id: p.id.clone(), position: Vec2::new(p.x, p.y), fallen: false, responsive: true });
        }
        Ok(w)
    }
}
