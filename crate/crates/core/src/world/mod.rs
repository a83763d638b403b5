//! Deterministic 2D world: unicycle base, pan/tilt head, objects, persons,
//! rectangular obstacles and the tactile table mounted on the robot.
//!
//! All mutation goes through [`WorldState::step`], the two command setters
//! and [`WorldState::inject_event`]. Everything is plain `f64` arithmetic
//! in a fixed order, so identical inputs give bit-identical states.

mod planner;

pub use planner::{path_length, OccupancyGrid, PlanError, Planner, GOAL_TOLERANCE, GRID_RESOLUTION, PLAN_INFLATION_MARGIN};

use crate::geometry::{normalize_angle, Rect, Vec2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Radius of the robot base disc, meters.
pub const ROBOT_RADIUS: f64 = 0.27;
/// Largest accepted integration step, seconds.
pub const MAX_DT: f64 = 0.1;
/// Clearance kept beyond the robot radius when resolving contacts.
pub const CONTACT_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("invalid time step {0}: must be finite and in (0, {MAX_DT}]")]
    InvalidTimestep(f64),
    #[error("non-finite {0} command")]
    NonFiniteCommand(&'static str),
    #[error("unknown person `{0}`")]
    UnknownPerson(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("object id `{0}` already present")]
    DuplicateObject(String),
    #[error("invalid object `{0}`: {1}")]
    InvalidObject(String, &'static str),
}

/// Base pose in the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    /// Heading in (-π, π].
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta: normalize_angle(theta) }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    /// Bearing of a world point in this pose's frame, normalized.
    pub fn bearing_to(&self, p: Vec2) -> f64 {
        normalize_angle((p - self.position()).angle() - self.theta)
    }
}

/// Joint limits for the head and speed limits for the base.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotLimits {
    pub pan: (f64, f64),
    pub tilt: (f64, f64),
    pub max_v: f64,
    pub max_w: f64,
}

impl Default for RobotLimits {
    fn default() -> Self {
        Self { pan: (-1.3, 1.3), tilt: (-0.98, 0.72), max_v: 1.0, max_w: 1.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HeadPose {
    pub pan: f64,
    pub tilt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BaseCommand {
    pub v: f64,
    pub w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectKind {
    Mug,
    Plate,
    Box,
    Generic,
}

/// Contact shape of an object resting on a surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Footprint {
    Disc { radius: f64 },
    /// Axis-aligned with the tactile grid; extents along rows and columns.
    Rect { rows_m: f64, cols_m: f64 },
}

impl Footprint {
    /// Radius of the smallest disc enclosing the footprint.
    pub fn bounding_radius(&self) -> f64 {
        match *self {
            Footprint::Disc { radius } => radius,
            Footprint::Rect { rows_m, cols_m } => 0.5 * rows_m.hypot(cols_m),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimObject {
    pub id: String,
    pub kind: ObjectKind,
    /// World coordinates, or table-frame coordinates when `on_table`
    /// (x along tile rows, y along tile columns, origin at the table corner).
    pub position: Vec2,
    pub on_table: bool,
    pub surface_temperature: f64,
    pub mass: f64,
    pub footprint: Footprint,
}

impl SimObject {
    fn validate(&self) -> Result<(), WorldError> {
        let bad = |why| Err(WorldError::InvalidObject(self.id.clone(), why));
        if !self.position.is_finite() {
            return bad("non-finite position");
        }
        if !(self.mass >= 0.0 && self.mass.is_finite()) {
            return bad("mass must be finite and >= 0");
        }
        if !(self.surface_temperature >= -40.0 && self.surface_temperature.is_finite()) {
            return bad("surface temperature must be finite and >= -40");
        }
        let r = self.footprint.bounding_radius();
        if !(r > 0.0 && r.is_finite()) {
            return bad("footprint must be positive");
        }
        Ok(())
    }

    pub fn footprint_radius(&self) -> f64 {
        self.footprint.bounding_radius()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Person {
    pub id: String,
    pub position: Vec2,
    #[serde(default)]
    pub fallen: bool,
    #[serde(default)]
    pub responsive: bool,
}

/// Placement of the tactile table in the robot frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableFrame {
    /// Robot-frame position of the table corner at tile (0, 0).
    pub origin: Vec2,
    pub rows: usize,
    pub cols: usize,
    /// Tile edge length, meters.
    pub pitch: f64,
}

impl Default for TableFrame {
    fn default() -> Self {
        Self { origin: Vec2::new(-0.15, -0.14), rows: 15, cols: 14, pitch: 0.02 }
    }
}

impl TableFrame {
    /// Table-frame meters of the centre of a (fractional) tile coordinate.
    pub fn tile_center(&self, row: f64, col: f64) -> Vec2 {
        Vec2::new((row + 0.5) * self.pitch, (col + 0.5) * self.pitch)
    }
}

/// A transcript waiting to be heard.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub person_id: String,
    pub text: String,
    pub at: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "snake_case")]
pub enum Placement {
    /// Fractional tile coordinates of the footprint centre.
    OnTable { row: f64, col: f64 },
    AtPosition { x: f64, y: f64 },
}

/// External stimulus applied to the world at the current clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum WorldEvent {
    PersonFall { person_id: String },
    PersonRespond { person_id: String, responsive: bool },
    PlaceObject { object: SimObject, placement: Placement },
    RemoveObject { object_id: String },
    Speak { person_id: String, text: String },
}

impl WorldEvent {
    pub fn kind(&self) -> &'static str {
        match self {
            WorldEvent::PersonFall { .. } => "person_fall",
            WorldEvent::PersonRespond { .. } => "person_respond",
            WorldEvent::PlaceObject { .. } => "place_object",
            WorldEvent::RemoveObject { .. } => "remove_object",
            WorldEvent::Speak { .. } => "speak",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub clock: f64,
    pub robot: Pose,
    pub head: HeadPose,
    pub base_cmd: BaseCommand,
    pub objects: Vec<SimObject>,
    pub persons: Vec<Person>,
    pub obstacles: Vec<Rect>,
    pub bounds: Rect,
    pub base_station: Pose,
    pub table_frame: TableFrame,
    pub limits: RobotLimits,
    pub ambient_temperature: f64,
    pub rng_seed: u64,
    pub collided: bool,
    pub pending_speech: Vec<Utterance>,
}

impl WorldState {
    /// An empty world with the robot at the origin facing +x.
    pub fn new(bounds: Rect) -> Self {
        Self {
            clock: 0.0,
            robot: Pose::default(),
            head: HeadPose::default(),
            base_cmd: BaseCommand::default(),
            objects: Vec::new(),
            persons: Vec::new(),
            obstacles: Vec::new(),
            bounds,
            base_station: Pose::default(),
            table_frame: TableFrame::default(),
            limits: RobotLimits::default(),
            ambient_temperature: 22.0,
            rng_seed: 0,
            collided: false,
            pending_speech: Vec::new(),
        }
    }

    /// True if the robot disc centred at `p` is clear of every obstacle
    /// interior and inside the world bounds.
    pub fn disc_is_free(&self, p: Vec2) -> bool {
        let r = ROBOT_RADIUS + CONTACT_EPS;
        if p.x - r < self.bounds.min_x
            || p.x + r > self.bounds.max_x
            || p.y - r < self.bounds.min_y
            || p.y + r > self.bounds.max_y
        {
            return false;
        }
        self.obstacles.iter().all(|o| o.distance_to(p) >= r)
    }

    /// Advances the simulation by `dt` seconds: one explicit step of the
    /// unicycle model with the heading taken at the middle of the step.
    pub fn step(&mut self, dt: f64) -> Result<(), WorldError> {
        if !(dt.is_finite() && dt > 0.0 && dt <= MAX_DT) {
            return Err(WorldError::InvalidTimestep(dt));
        }
        let BaseCommand { v, w } = self.base_cmd;
        if !(v.is_finite() && w.is_finite()) {
            return Err(WorldError::NonFiniteCommand("base"));
        }
        let start = self.robot.position();
        let heading = self.robot.theta + 0.5 * w * dt;
        let delta = Vec2::new(v * heading.cos() * dt, v * heading.sin() * dt);
        let target = start + delta;
        self.collided = false;
        let reached = if delta == Vec2::default() || self.disc_is_free(target) {
            target
        } else {
            self.collided = true;
            self.contact_free_along(start, target)
        };
        self.robot.x = reached.x;
        self.robot.y = reached.y;
        self.robot.theta = normalize_angle(self.robot.theta + w * dt);
        self.clock += dt;
        Ok(())
    }

    /// Furthest contact-free point on the segment from `start` towards
    /// `target`, by bisection. Returns `start` if `start` itself is blocked.
    fn contact_free_along(&self, start: Vec2, target: Vec2) -> Vec2 {
        if !self.disc_is_free(start) {
            return start;
        }
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.disc_is_free(start.lerp(target, mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        start.lerp(target, lo)
    }

    /// Sets the base velocity command, clamped to the speed limits.
    pub fn command_base(&mut self, v: f64, w: f64) -> Result<(), WorldError> {
        if !(v.is_finite() && w.is_finite()) {
            return Err(WorldError::NonFiniteCommand("base"));
        }
        let l = self.limits;
        self.base_cmd = BaseCommand { v: v.clamp(-l.max_v, l.max_v), w: w.clamp(-l.max_w, l.max_w) };
        Ok(())
    }

    /// Sets the head joints, clamped to the joint limits.
    pub fn command_head(&mut self, pan: f64, tilt: f64) -> Result<(), WorldError> {
        if !(pan.is_finite() && tilt.is_finite()) {
            return Err(WorldError::NonFiniteCommand("head"));
        }
        let l = self.limits;
        self.head = HeadPose { pan: pan.clamp(l.pan.0, l.pan.1), tilt: tilt.clamp(l.tilt.0, l.tilt.1) };
        Ok(())
    }

    pub fn person(&self, id: &str) -> Option<&Person> {
        self.persons.iter().find(|p| p.id == id)
    }

    fn person_mut(&mut self, id: &str) -> Result<&mut Person, WorldError> {
        self.persons
            .iter_mut()
            .find(|p| p.id == id)
            .ok_or_else(|| WorldError::UnknownPerson(id.to_string()))
    }

    pub fn object(&self, id: &str) -> Option<&SimObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    /// Objects resting on the tactile table.
    pub fn table_objects(&self) -> impl Iterator<Item = &SimObject> {
        self.objects.iter().filter(|o| o.on_table)
    }

    /// Applies an external event. On error the state is left unchanged.
    pub fn inject_event(&mut self, event: WorldEvent) -> Result<(), WorldError> {
        match event {
            WorldEvent::PersonFall { person_id } => {
                self.person_mut(&person_id)?.fallen = true;
            }
            WorldEvent::PersonRespond { person_id, responsive } => {
                self.person_mut(&person_id)?.responsive = responsive;
            }
            WorldEvent::PlaceObject { mut object, placement } => {
                if self.object(&object.id).is_some() {
                    return Err(WorldError::DuplicateObject(object.id));
                }
                match placement {
                    Placement::OnTable { row, col } => {
                        object.on_table = true;
                        object.position = self.table_frame.tile_center(row, col);
                    }
                    Placement::AtPosition { x, y } => {
                        object.on_table = false;
                        object.position = Vec2::new(x, y);
                    }
                }
                object.validate()?;
                self.objects.push(object);
            }
            WorldEvent::RemoveObject { object_id } => {
                let idx = self
                    .objects
                    .iter()
                    .position(|o| o.id == object_id)
                    .ok_or(WorldError::UnknownObject(object_id))?;
                self.objects.remove(idx);
            }
            WorldEvent::Speak { person_id, text } => {
                self.person_mut(&person_id)?;
                self.pending_speech.push(Utterance { person_id, text, at: self.clock });
            }
        }
        Ok(())
    }

    /// Removes and returns the oldest pending utterance, optionally only
    /// one spoken by `person_id`.
    pub fn take_utterance(&mut self, person_id: Option<&str>) -> Option<Utterance> {
        let idx = self
            .pending_speech
            .iter()
            .position(|u| person_id.is_none_or(|p| u.person_id == p))?;
        Some(self.pending_speech.remove(idx))
    }

    /// Plans a collision-free path from the robot position to `goal`.
    pub fn plan_path(&self, goal: Vec2) -> Result<Vec<Vec2>, PlanError> {
        Planner::new(self).plan(self.robot.position(), goal)
    }
}
