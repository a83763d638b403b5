//! Grid A* over an inflated occupancy grid, followed by greedy shortcut
//! smoothing with exact segment clearance checks.

use super::{WorldState, ROBOT_RADIUS};
use crate::geometry::{Rect, Vec2};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use thiserror::Error;

/// Cell edge length of the planning grid, meters.
pub const GRID_RESOLUTION: f64 = 0.1;
/// Extra inflation applied to grid cells so that straight moves between
/// adjacent free cell centres keep the full robot clearance.
pub const PLAN_INFLATION_MARGIN: f64 = 0.03;
/// Goals closer than this to the start are treated as already reached.
pub const GOAL_TOLERANCE: f64 = 0.05;
/// Required clearance between a path and any obstacle.
const PATH_CLEARANCE: f64 = ROBOT_RADIUS + 1e-6;
/// Search radius for attaching start/goal points to grid cells.
const ATTACH_RADIUS: f64 = 0.35;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("goal ({0:.3}, {1:.3}) lies outside the world bounds")]
    OutOfBounds(f64, f64),
    #[error("goal ({0:.3}, {1:.3}) is inside an inflated obstacle")]
    GoalBlocked(f64, f64),
    #[error("no path to goal ({0:.3}, {1:.3})")]
    NoPath(f64, f64),
}

/// Boolean occupancy over the world bounds; a cell is free when its centre
/// has at least `ROBOT_RADIUS + PLAN_INFLATION_MARGIN` clearance.
#[derive(Debug, Clone)]
pub struct OccupancyGrid {
    pub origin: Vec2,
    pub cols: usize,
    pub rows: usize,
    pub resolution: f64,
    free: Vec<bool>,
}

impl OccupancyGrid {
    pub fn build(bounds: Rect, obstacles: &[Rect]) -> Self {
        let resolution = GRID_RESOLUTION;
        let cols = ((bounds.width() / resolution).ceil() as usize).max(1);
        let rows = ((bounds.height() / resolution).ceil() as usize).max(1);
        let origin = Vec2::new(bounds.min_x, bounds.min_y);
        let need = ROBOT_RADIUS + PLAN_INFLATION_MARGIN;
        let mut free = vec![false; cols * rows];
        for r in 0..rows {
            for c in 0..cols {
                let p = origin + Vec2::new((c as f64 + 0.5) * resolution, (r as f64 + 0.5) * resolution);
                free[r * cols + c] = clearance(bounds, obstacles, p) >= need;
            }
        }
        Self { origin, cols, rows, resolution, free }
    }

    pub fn is_free(&self, col: usize, row: usize) -> bool {
        self.free[row * self.cols + col]
    }

    pub fn center(&self, col: usize, row: usize) -> Vec2 {
        self.origin + Vec2::new((col as f64 + 0.5) * self.resolution, (row as f64 + 0.5) * self.resolution)
    }

    fn index(&self, col: usize, row: usize) -> usize {
        row * self.cols + col
    }

    fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.cols, idx / self.cols)
    }

    /// Free cells whose centres lie within `radius` of `p`.
    fn cells_near(&self, p: Vec2, radius: f64) -> Vec<usize> {
        let c0 = ((p.x - radius - self.origin.x) / self.resolution).floor().max(0.0) as usize;
        let r0 = ((p.y - radius - self.origin.y) / self.resolution).floor().max(0.0) as usize;
        let c1 = (((p.x + radius - self.origin.x) / self.resolution).ceil() as usize).min(self.cols);
        let r1 = (((p.y + radius - self.origin.y) / self.resolution).ceil() as usize).min(self.rows);
        let mut out = Vec::new();
        for r in r0..r1 {
            for c in c0..c1 {
                if self.is_free(c, r) && self.center(c, r).distance(p) <= radius {
                    out.push(self.index(c, r));
                }
            }
        }
        out
    }
}

/// Distance from `p` to the nearest obstacle or bound edge.
fn clearance(bounds: Rect, obstacles: &[Rect], p: Vec2) -> f64 {
    let to_bounds = (p.x - bounds.min_x)
        .min(bounds.max_x - p.x)
        .min(p.y - bounds.min_y)
        .min(bounds.max_y - p.y);
    obstacles.iter().map(|o| o.distance_to(p)).fold(to_bounds, f64::min)
}

#[derive(Clone, Copy, PartialEq)]
struct Open {
    f: f64,
    idx: usize,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        other.f.total_cmp(&self.f).then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub struct Planner<'a> {
    bounds: Rect,
    obstacles: &'a [Rect],
    grid: OccupancyGrid,
}

impl<'a> Planner<'a> {
    pub fn new(world: &'a WorldState) -> Self {
        Self::from_parts(world.bounds, &world.obstacles)
    }

    pub fn from_parts(bounds: Rect, obstacles: &'a [Rect]) -> Self {
        Self { bounds, obstacles, grid: OccupancyGrid::build(bounds, obstacles) }
    }

    pub fn grid(&self) -> &OccupancyGrid {
        &self.grid
    }

    /// True when the robot disc swept along `a–b` keeps full clearance.
    pub fn segment_clear(&self, a: Vec2, b: Vec2) -> bool {
        let inner = Rect::new(
            self.bounds.min_x + PATH_CLEARANCE,
            self.bounds.min_y + PATH_CLEARANCE,
            self.bounds.max_x - PATH_CLEARANCE,
            self.bounds.max_y - PATH_CLEARANCE,
        );
        inner.contains(a)
            && inner.contains(b)
            && self.obstacles.iter().all(|o| o.segment_distance(a, b) >= PATH_CLEARANCE)
    }

    pub fn plan(&self, start: Vec2, goal: Vec2) -> Result<Vec<Vec2>, PlanError> {
        if !goal.is_finite() || !self.bounds.contains(goal) {
            return Err(PlanError::OutOfBounds(goal.x, goal.y));
        }
        if clearance(self.bounds, self.obstacles, goal) < ROBOT_RADIUS {
            return Err(PlanError::GoalBlocked(goal.x, goal.y));
        }
        if start.distance(goal) <= GOAL_TOLERANCE {
            return Ok(vec![start]);
        }
        if self.segment_clear(start, goal) {
            return Ok(vec![start, goal]);
        }
        let cells = self.search(start, goal).ok_or(PlanError::NoPath(goal.x, goal.y))?;
        let mut raw = Vec::with_capacity(cells.len() + 2);
        raw.push(start);
        raw.extend(cells.iter().map(|&i| {
            let (c, r) = self.grid.coords(i);
            self.grid.center(c, r)
        }));
        raw.push(goal);
        Ok(self.shortcut(&raw))
    }

    /// Multi-source A*: the start attaches to every nearby free cell it can
    /// reach in a straight line, and the search ends on the first expanded
    /// cell that connects straight to the goal.
    fn search(&self, start: Vec2, goal: Vec2) -> Option<Vec<usize>> {
        let g = &self.grid;
        let n = g.cols * g.rows;
        let mut cost = vec![f64::INFINITY; n];
        let mut parent = vec![usize::MAX; n];
        let mut closed = vec![false; n];
        let mut goal_link = vec![false; n];
        for i in g.cells_near(goal, ATTACH_RADIUS) {
            let (c, r) = g.coords(i);
            goal_link[i] = self.segment_clear(g.center(c, r), goal);
        }
        if !goal_link.iter().any(|&b| b) {
            return None;
        }
        let mut open = BinaryHeap::new();
        for i in g.cells_near(start, ATTACH_RADIUS) {
            let (c, r) = g.coords(i);
            let p = g.center(c, r);
            if self.segment_clear(start, p) {
                cost[i] = start.distance(p);
                open.push(Open { f: cost[i] + p.distance(goal), idx: i });
            }
        }
        const STEPS: [(i64, i64); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];
        while let Some(Open { idx, .. }) = open.pop() {
            if closed[idx] {
                continue;
            }
            closed[idx] = true;
            if goal_link[idx] {
                let mut path = vec![idx];
                let mut cur = idx;
                while parent[cur] != usize::MAX {
                    cur = parent[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            let (c, r) = g.coords(idx);
            for (dc, dr) in STEPS {
                let (nc, nr) = (c as i64 + dc, r as i64 + dr);
                if nc < 0 || nr < 0 || nc >= g.cols as i64 || nr >= g.rows as i64 {
                    continue;
                }
                let (nc, nr) = (nc as usize, nr as usize);
                if !g.is_free(nc, nr) {
                    continue;
                }
                // no corner cutting on diagonals
                if dc != 0 && dr != 0 && !(g.is_free(nc, r) && g.is_free(c, nr)) {
                    continue;
                }
                let ni = g.index(nc, nr);
                if closed[ni] {
                    continue;
                }
                let step = if dc != 0 && dr != 0 { std::f64::consts::SQRT_2 } else { 1.0 } * g.resolution;
                let cand = cost[idx] + step;
                if cand < cost[ni] {
                    cost[ni] = cand;
                    parent[ni] = idx;
                    open.push(Open { f: cand + g.center(nc, nr).distance(goal), idx: ni });
                }
            }
        }
        None
    }

    /// Greedy shortcutting: from each kept waypoint jump to the furthest
    /// later waypoint reachable by a clear straight segment.
    fn shortcut(&self, raw: &[Vec2]) -> Vec<Vec2> {
        let mut out = vec![raw[0]];
        let mut i = 0;
        while i + 1 < raw.len() {
            let next = (i + 1..raw.len())
                .rev()
                .find(|&j| self.segment_clear(raw[i], raw[j]))
                .unwrap_or(i + 1);
            out.push(raw[next]);
            i = next;
        }
        out
    }
}

/// Total polyline length.
pub fn path_length(path: &[Vec2]) -> f64 {
    path.windows(2).map(|w| w[0].distance(w[1])).sum()
}
