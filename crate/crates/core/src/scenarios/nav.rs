//! Path following on top of the planner.

use crate::geometry::{normalize_angle, Rect, Vec2};
use crate::world::{PlanError, Planner, WorldState};
use serde::{Deserialize, Serialize};

/// Extra obstacle inflation used when planning for the follower, so that
/// small tracking errors never graze a wall.
const NAV_MARGIN: f64 = 0.03;
/// Turn in place while the heading error exceeds this, radians.
const ALIGN_TOLERANCE: f64 = 0.05;
const WAYPOINT_TOLERANCE: f64 = 0.02;
pub const ARRIVAL_TOLERANCE: f64 = 0.05;
const HEADING_GAIN: f64 = 3.0;
const SPEED_GAIN: f64 = 2.0;
/// Consecutive blocked steps before the path is replanned.
const STALL_TICKS: u32 = 5;
const MAX_REPLANS: u32 = 5;

#[derive(Debug, Clone, PartialEq)]
pub enum NavStatus {
    Moving,
    Arrived,
    Failed(String),
}

/// Navigation towards the first reachable goal of a list of candidates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nav {
    goals: Vec<Vec2>,
    path: Vec<Vec2>,
    next: usize,
    planned: bool,
    stalled: u32,
    replans: u32,
}

impl Nav {
    pub fn to(goal: Vec2) -> Self {
        Self::to_any(vec![goal])
    }

    pub fn to_any(goals: Vec<Vec2>) -> Self {
        Self { goals, path: Vec::new(), next: 0, planned: false, stalled: 0, replans: 0 }
    }

    /// Goal of the current plan, or the preferred goal before planning.
    pub fn goal(&self) -> Vec2 {
        self.path.last().copied().unwrap_or(self.goals[0])
    }

    pub fn path(&self) -> &[Vec2] {
        &self.path
    }

    /// Forces a replan from the current pose on the next step.
    pub fn invalidate(&mut self) {
        self.planned = false;
        self.path.clear();
    }

    /// Plans without moving; used to check reachability up front.
    pub fn plan(&mut self, world: &WorldState) -> Result<(), String> {
        let mut last = None;
        for &g in &self.goals {
            match nav_plan(world, g) {
                Ok(path) => {
                    self.path = path;
                    self.next = 1;
                    self.planned = true;
                    return Ok(());
                }
                Err(e) => last = Some(e),
            }
        }
        Err(last.map_or_else(|| "no goal".to_string(), |e| e.to_string()))
    }

    /// Sets the base command for one tick.
    pub fn step(&mut self, world: &mut WorldState) -> NavStatus {
        if world.collided && self.planned {
            self.stalled += 1;
            if self.stalled >= STALL_TICKS {
                self.stalled = 0;
                self.replans += 1;
                if self.replans > MAX_REPLANS {
                    stop(world);
                    return NavStatus::Failed("stuck against an obstacle".into());
                }
                self.invalidate();
            }
        } else {
            self.stalled = 0;
        }
        if !self.planned {
            if let Err(e) = self.plan(world) {
                stop(world);
                return NavStatus::Failed(e);
            }
        }
        let pos = world.robot.position();
        while self.next < self.path.len() {
            let last = self.next + 1 == self.path.len();
            let tol = if last { ARRIVAL_TOLERANCE } else { WAYPOINT_TOLERANCE };
            if pos.distance(self.path[self.next]) <= tol {
                self.next += 1;
            } else {
                break;
            }
        }
        if self.next >= self.path.len() {
            stop(world);
            return NavStatus::Arrived;
        }
        let target = self.path[self.next];
        let d = pos.distance(target);
        let err = normalize_angle(world.robot.bearing_to(target));
        let w = HEADING_GAIN * err;
        let v = if err.abs() > ALIGN_TOLERANCE { 0.0 } else { SPEED_GAIN * d };
        world.command_base(v, w).expect("finite command");
        NavStatus::Moving
    }
}

pub fn stop(world: &mut WorldState) {
    world.command_base(0.0, 0.0).expect("finite command");
}

/// Turns the base towards `target`; true once aligned.
pub fn face(world: &mut WorldState, target: Vec2, tolerance: f64) -> bool {
    if world.robot.position().distance(target) < 1e-9 {
        stop(world);
        return true;
    }
    let err = normalize_angle(world.robot.bearing_to(target));
    if err.abs() <= tolerance {
        stop(world);
        world.command_head(0.0, 0.0).expect("finite command");
        return true;
    }
    world.command_base(0.0, HEADING_GAIN * err).expect("finite command");
    // the head leads the turn within its limits
    world.command_head(err, 0.0).expect("finite command");
    false
}

/// Points at `distance` from `target`, the one on the robot's side first,
/// then alternatives around the circle.
pub fn approach_points(world: &WorldState, target: Vec2, distance: f64) -> Vec<Vec2> {
    let away = world.robot.position() - target;
    let base = if away.norm() > 1e-9 { away.angle() } else { world.robot.theta + std::f64::consts::PI };
    let mut out = vec![target + Vec2::from_polar(distance, base)];
    for k in 1..=8 {
        let off = k as f64 * std::f64::consts::PI / 8.0;
        out.push(target + Vec2::from_polar(distance, base + off));
        if k < 8 {
            out.push(target + Vec2::from_polar(distance, base - off));
        }
    }
    out
}

fn nav_plan(world: &WorldState, goal: Vec2) -> Result<Vec<Vec2>, PlanError> {
    let m = NAV_MARGIN;
    let b = world.bounds;
    let bounds = Rect::new(b.min_x + m, b.min_y + m, b.max_x - m, b.max_y - m);
    let obstacles: Vec<Rect> =
        world.obstacles.iter().map(|o| Rect::new(o.min_x - m, o.min_y - m, o.max_x + m, o.max_y + m)).collect();
    let start = world.robot.position();
    Planner::from_parts(bounds, &obstacles).plan(start, goal).or_else(|_| world.plan_path(goal))
}
