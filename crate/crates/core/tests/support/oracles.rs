//! Brute-force reference implementations shared by the integration tests
//! and the acceptance suite. Each one is written independently of the code
//! it checks.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rico_core::geometry::{Rect, Vec2};
use rico_core::sensors::{
    analyze_table, detect_hotspots, lidar_scan, LidarConfig, PressureGrid, TableAnalysisConfig, ThermalFrame, GRAVITY,
};
use rico_core::tasker::{Action, ScheduleDecision, TaskId, TaskState, Tasker};
use rico_core::world::{Pose, WorldState};

// ---------------------------------------------------------------- tasker

#[derive(Debug, Clone)]
struct ModelTask {
    id: u64,
    priority: i64,
    submitted_at: f64,
    state: TaskState,
}

/// Replays tasker operations with a naive list and sort.
#[derive(Debug, Default)]
pub struct TaskerModel {
    tasks: Vec<ModelTask>,
    clock: f64,
}

fn legal(from: TaskState, to: TaskState) -> bool {
    use TaskState::*;
    let table: &[(TaskState, TaskState)] = &[
        (Waiting, Executing),
        (Waiting, Terminated),
        (Executing, Suspended),
        (Executing, Finished),
        (Executing, Terminated),
        (Suspended, Executing),
        (Suspended, Terminated),
    ];
    table.contains(&(from, to))
}

impl TaskerModel {
    fn running(&self) -> Option<usize> {
        self.tasks.iter().position(|t| t.state == TaskState::Executing)
    }

    fn reschedule(&mut self) -> ScheduleDecision {
        let mut pool: Vec<usize> = (0..self.tasks.len())
            .filter(|&i| matches!(self.tasks[i].state, TaskState::Waiting | TaskState::Suspended))
            .collect();
        pool.sort_by(|&a, &b| {
            let (x, y) = (&self.tasks[a], &self.tasks[b]);
            y.priority
                .cmp(&x.priority)
                .then(x.submitted_at.partial_cmp(&y.submitted_at).unwrap())
                .then(x.id.cmp(&y.id))
        });
        let running = self.running();
        let active = running.map(|i| TaskId(self.tasks[i].id));
        let Some(&best) = pool.first() else {
            return ScheduleDecision { active, actions: vec![] };
        };
        let mut actions = vec![];
        if let Some(r) = running {
            if self.tasks[best].priority <= self.tasks[r].priority {
                return ScheduleDecision { active, actions };
            }
            self.tasks[r].state = TaskState::Suspended;
            actions.push(Action::Suspend(TaskId(self.tasks[r].id)));
        }
        let id = TaskId(self.tasks[best].id);
        actions.push(if self.tasks[best].state == TaskState::Suspended { Action::Resume(id) } else { Action::Start(id) });
        self.tasks[best].state = TaskState::Executing;
        ScheduleDecision { active: Some(id), actions }
    }

    pub fn set_clock(&mut self, t: f64) {
        self.clock = t;
    }

    pub fn submit(&mut self, priority: i64) -> TaskId {
        let id = self.tasks.len() as u64;
        self.tasks.push(ModelTask { id, priority, submitted_at: self.clock, state: TaskState::Waiting });
        TaskId(id)
    }

    pub fn harmonise(&mut self) -> ScheduleDecision {
        self.reschedule()
    }

    pub fn complete(&mut self, id: TaskId) -> Option<ScheduleDecision> {
        let t = self.tasks.get_mut(id.0 as usize)?;
        if t.state != TaskState::Executing {
            return None;
        }
        t.state = TaskState::Finished;
        Some(self.reschedule())
    }

    pub fn terminate(&mut self, id: TaskId) -> Option<ScheduleDecision> {
        let t = self.tasks.get_mut(id.0 as usize)?;
        if matches!(t.state, TaskState::Finished | TaskState::Terminated) {
            return None;
        }
        let was_running = t.state == TaskState::Executing;
        t.state = TaskState::Terminated;
        if was_running {
            Some(self.reschedule())
        } else {
            Some(ScheduleDecision { active: self.running().map(|i| TaskId(self.tasks[i].id)), actions: vec![] })
        }
    }

    pub fn states(&self) -> Vec<(u64, TaskState)> {
        self.tasks.iter().map(|t| (t.id, t.state)).collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub enum TaskerOp {
    Submit { priority: i64, dt: f64 },
    Harmonise,
    CompleteRunning,
    /// Complete some task by index, usually an invalid call.
    CompleteAny(usize),
    Terminate(usize),
}

pub fn random_ops(rng: &mut impl Rng, len: usize) -> Vec<TaskerOp> {
    (0..len)
        .map(|_| match rng.gen_range(0..10) {
            0..=2 => TaskerOp::Submit {
                priority: rng.gen_range(0..6) * 10,
                dt: if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0.0..2.0) },
            },
            3..=5 => TaskerOp::Harmonise,
            6 | 7 => TaskerOp::CompleteRunning,
            8 => TaskerOp::CompleteAny(rng.gen_range(0..16)),
            _ => TaskerOp::Terminate(rng.gen_range(0..16)),
        })
        .collect()
}

/// Runs one operation sequence against the tasker and the model, checking
/// every invariant after each step. Returns the violations found.
pub fn check_tasker_sequence(ops: &[TaskerOp]) -> Vec<String> {
    let mut real = Tasker::new();
    let mut model = TaskerModel::default();
    let mut clock = 0.0;
    let mut bad = Vec::new();
    for (step, op) in ops.iter().enumerate() {
        let trace_len = real.trace().len();
        let prev: Vec<(u64, TaskState)> = real.tasks().map(|t| (t.id.0, t.state)).collect();
        let mut harmonised = false;
        match *op {
            TaskerOp::Submit { priority, dt } => {
                clock += dt;
                real.set_clock(clock);
                model.set_clock(clock);
                let a = real.submit("t", priority, vec![]);
                let b = model.submit(priority);
                if a != b {
                    bad.push(format!("step {step}: submit id {a:?} vs {b:?}"));
                }
            }
            TaskerOp::Harmonise => {
                harmonised = true;
                let a = real.harmonise();
                let b = model.harmonise();
                if a != b {
                    bad.push(format!("step {step}: harmonise {a:?} vs {b:?}"));
                }
            }
            TaskerOp::CompleteRunning | TaskerOp::CompleteAny(_) => {
                let id = match *op {
                    TaskerOp::CompleteAny(i) => Some(TaskId(i as u64)),
                    _ => real.executing(),
                };
                if let Some(id) = id {
                    let a = real.complete(id).ok();
                    let b = model.complete(id);
                    harmonised = a.is_some();
                    if a != b {
                        bad.push(format!("step {step}: complete {id:?} {a:?} vs {b:?}"));
                    }
                }
            }
            TaskerOp::Terminate(i) => {
                let id = TaskId(i as u64);
                let was_running = real.executing() == Some(id);
                harmonised = was_running;
                let a = real.terminate(id).ok();
                let b = model.terminate(id);
                if a != b {
                    bad.push(format!("step {step}: terminate {id:?} {a:?} vs {b:?}"));
                }
            }
        }
        let now: Vec<(u64, TaskState)> = real.tasks().map(|t| (t.id.0, t.state)).collect();
        if now != model.states() {
            bad.push(format!("step {step}: states {now:?} vs {:?}", model.states()));
        }
        let executing = now.iter().filter(|(_, s)| *s == TaskState::Executing).count();
        if executing > 1 {
            bad.push(format!("step {step}: {executing} tasks executing"));
        }
        for (id, s) in &now {
            if let Some((_, before)) = prev.iter().find(|(p, _)| p == id) {
                if before != s && !legal(*before, *s) {
                    bad.push(format!("step {step}: illegal {before:?} -> {s:?} for {id}"));
                }
            }
        }
        for rec in &real.trace()[trace_len..] {
            if let Some(before) = rec.before {
                if !legal(before, rec.after) {
                    bad.push(format!("step {step}: trace has illegal {before:?} -> {:?}", rec.after));
                }
            }
        }
        if harmonised {
            let top = real
                .tasks()
                .filter(|t| !matches!(t.state, TaskState::Finished | TaskState::Terminated))
                .map(|t| t.priority)
                .max();
            match (real.executing(), top) {
                (Some(e), Some(top)) if real.task(e).unwrap().priority < top => {
                    bad.push(format!("step {step}: executing priority below a live task"))
                }
                (None, Some(_)) => bad.push(format!("step {step}: live tasks but nothing executing")),
                _ => {}
            }
        }
    }
    bad
}

/// The acceptance workload: `count` sequences drawn from `seed`.
pub fn tasker_suite(seed: u64, count: usize) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = Vec::new();
    for k in 0..count {
        let len = rng.gen_range(1..120);
        let ops = random_ops(&mut rng, len);
        bad.extend(check_tasker_sequence(&ops).into_iter().map(|v| format!("sequence {k}: {v}")));
    }
    bad
}

// ---------------------------------------------------------------- tactile

pub fn random_grid(rng: &mut impl Rng) -> PressureGrid {
    let rows = rng.gen_range(1..20);
    let cols = rng.gen_range(1..20);
    let mut g = PressureGrid::zeros(rows, cols, rng.gen_range(0.01..0.05));
    let density = rng.gen_range(0.0..1.0);
    for r in 0..rows {
        for c in 0..cols {
            if rng.gen_bool(density) {
                g.set(r, c, rng.gen_range(0.0..5.0));
            }
        }
    }
    g
}

/// Centroid (row, col) and weight by summing rows and columns separately.
pub fn table_oracle(g: &PressureGrid, presence: f64) -> Option<((f64, f64), f64)> {
    let row_sums: Vec<f64> = (0..g.rows).map(|r| (0..g.cols).map(|c| g.get(r, c)).sum()).collect();
    let col_sums: Vec<f64> = (0..g.cols).map(|c| (0..g.rows).map(|r| g.get(r, c)).sum()).collect();
    let total: f64 = row_sums.iter().sum();
    if total <= presence {
        return None;
    }
    let r = row_sums.iter().enumerate().map(|(i, f)| i as f64 * f).sum::<f64>() / total;
    let c = col_sums.iter().enumerate().map(|(i, f)| i as f64 * f).sum::<f64>() / total;
    Some(((r, c), total / GRAVITY))
}

pub fn table_suite(seed: u64, count: usize, tol: f64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = TableAnalysisConfig::default();
    let mut bad = Vec::new();
    for k in 0..count {
        let g = random_grid(&mut rng);
        let got = analyze_table(&g, &cfg);
        match table_oracle(&g, cfg.presence_force) {
            None if got.present => bad.push(format!("grid {k}: present but total below threshold")),
            None => {}
            Some(_) if !got.present => bad.push(format!("grid {k}: reported absent")),
            Some(((r, c), w)) => {
                let err = (got.centroid_tiles.0 - r).abs().max((got.centroid_tiles.1 - c).abs()).max((got.weight - w).abs());
                if err > tol {
                    bad.push(format!("grid {k}: error {err:e}"));
                }
            }
        }
    }
    bad
}

// ---------------------------------------------------------------- thermal

/// Connected components by union-find, as (pixel list, peak) sorted by the
/// first pixel in row-major order.
pub fn components(frame: &ThermalFrame, threshold: f64) -> Vec<(Vec<usize>, f64)> {
    let n = frame.rows * frame.cols;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let hot = |i: usize| frame.pixels[i] >= threshold;
    for i in 0..n {
        if !hot(i) {
            continue;
        }
        let (r, c) = (i / frame.cols, i % frame.cols);
        let mut join = |j: usize| {
            if hot(j) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        };
        if c + 1 < frame.cols {
            join(i + 1);
        }
        if r + 1 < frame.rows {
            join(i + frame.cols);
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in (0..n).filter(|&i| hot(i)) {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    let mut out: Vec<(Vec<usize>, f64)> = groups
        .into_values()
        .map(|px| {
            let peak = px.iter().map(|&i| frame.pixels[i]).fold(f64::NEG_INFINITY, f64::max);
            (px, peak)
        })
        .collect();
    out.sort_by_key(|(px, _)| px[0]);
    out
}

pub fn random_frame(rng: &mut impl Rng) -> ThermalFrame {
    let cfg = rico_core::sensors::ThermalConfig { cols: rng.gen_range(1..40), rows: rng.gen_range(1..30), ..Default::default() };
    let mut f = ThermalFrame::uniform(&cfg, 22.0, 0.0);
    // blobs plus salt noise
    for _ in 0..rng.gen_range(0..6) {
        let (cr, cc) = (rng.gen_range(0..cfg.rows) as i64, rng.gen_range(0..cfg.cols) as i64);
        let rad = rng.gen_range(0..4) as i64;
        let t = rng.gen_range(30.0..90.0);
        for r in 0..cfg.rows as i64 {
            for c in 0..cfg.cols as i64 {
                if (r - cr).abs() + (c - cc).abs() <= rad {
                    f.set(r as usize, c as usize, t + rng.gen_range(-5.0..5.0));
                }
            }
        }
    }
    for i in 0..f.pixels.len() {
        if rng.gen_bool(0.05) {
            f.pixels[i] = rng.gen_range(15.0..80.0);
        }
    }
    f
}

pub fn hotspot_suite(seed: u64, count: usize, threshold: f64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = Vec::new();
    for k in 0..count {
        let f = random_frame(&mut rng);
        let got = detect_hotspots(&f, threshold);
        let want = components(&f, threshold);
        if got.len() != want.len() {
            bad.push(format!("frame {k}: {} detections vs {} components", got.len(), want.len()));
            continue;
        }
        for (d, (px, peak)) in got.iter().zip(&want) {
            let n = px.len() as f64;
            let col = px.iter().map(|&i| (i % f.cols) as f64).sum::<f64>() / n;
            let row = px.iter().map(|&i| (i / f.cols) as f64).sum::<f64>() / n;
            if d.area != px.len() || d.pixel_centroid != (col, row) || d.peak_temperature != *peak {
                bad.push(format!("frame {k}: {d:?} vs area {} centroid ({col}, {row}) peak {peak}", px.len()));
            }
        }
    }
    bad
}

// ---------------------------------------------------------------- lidar

/// Distance along the ray to segment p–q, solving the 2x2 system directly.
fn ray_segment(o: Vec2, d: Vec2, p: Vec2, q: Vec2) -> Option<f64> {
    let e = q - p;
    let den = d.x * (-e.y) - d.y * (-e.x);
    if den.abs() < 1e-15 {
        return None;
    }
    let rhs = p - o;
    let t = (rhs.x * (-e.y) - rhs.y * (-e.x)) / den;
    let s = (d.x * rhs.y - d.y * rhs.x) / den;
    (t >= 0.0 && (-1e-12..=1.0 + 1e-12).contains(&s)).then_some(t)
}

pub fn lidar_oracle(world: &WorldState, cfg: &LidarConfig) -> Vec<f64> {
    let o = world.robot.position();
    (0..cfg.beams)
        .map(|i| {
            let a = world.robot.theta + (i as f64 * 360.0 / cfg.beams as f64).to_radians();
            let d = Vec2::new(a.cos(), a.sin());
            let mut best = cfg.max_range;
            for r in &world.obstacles {
                let c = r.corners();
                for k in 0..4 {
                    if let Some(t) = ray_segment(o, d, c[k], c[(k + 1) % 4]) {
                        best = best.min(t);
                    }
                }
            }
            best
        })
        .collect()
}

pub fn random_world(rng: &mut impl Rng) -> WorldState {
    let mut w = WorldState::new(Rect::new(-10.0, -10.0, 10.0, 10.0));
    for _ in 0..rng.gen_range(0..12) {
        let (x, y) = (rng.gen_range(-9.0..8.0), rng.gen_range(-9.0..8.0));
        w.obstacles.push(Rect::new(x, y, x + rng.gen_range(0.1..2.0), y + rng.gen_range(0.1..2.0)));
    }
    loop {
        let p = Vec2::new(rng.gen_range(-9.0..9.0), rng.gen_range(-9.0..9.0));
        if w.obstacles.iter().all(|o| o.distance_to(p) > 0.05) {
            w.robot = Pose::new(p.x, p.y, rng.gen_range(-3.2..3.2));
            return w;
        }
    }
}

pub fn lidar_suite(seed: u64, count: usize, tol: f64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = LidarConfig::default();
    let mut bad = Vec::new();
    for k in 0..count {
        let w = random_world(&mut rng);
        let got = lidar_scan(&w, &cfg).expect("robot placed outside obstacles");
        let want = lidar_oracle(&w, &cfg);
        let err = got.ranges.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if got.ranges.len() != want.len() || err > tol {
            bad.push(format!("world {k}: max error {err:e}"));
        }
    }
    bad
}
