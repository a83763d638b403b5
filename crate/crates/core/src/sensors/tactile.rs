//! Tactile table: pressure grid synthesis, object analysis and payload checks.

use super::TableAnalysisConfig;
use crate::geometry::Vec2;
use crate::world::{Footprint, SimObject, TableFrame, WorldState};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Standard gravity, m/s².
pub const GRAVITY: f64 = 9.80665;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureGrid {
    pub rows: usize,
    pub cols: usize,
    /// Row-major, newtons.
    pub forces: Vec<f64>,
    pub pitch: f64,
    pub timestamp: f64,
}

impl PressureGrid {
    pub fn zeros(rows: usize, cols: usize, pitch: f64) -> Self {
        Self { rows, cols, forces: vec![0.0; rows * cols], pitch, timestamp: 0.0 }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.forces[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.forces[row * self.cols + col] = value;
    }

    pub fn total_force(&self) -> f64 {
        self.forces.iter().sum()
    }

    /// Adds one object's load to the grid. Tiles whose centres fall inside
    /// the footprint share the weight equally; load on tiles beyond the grid
    /// edge is lost. A footprint covering no tile centre loads the single
    /// tile under its centre.
    pub fn add_object(&mut self, object: &SimObject) {
        let p = self.pitch;
        let force = object.mass * GRAVITY;
        let c = object.position;
        let reach = object.footprint_radius();
        let r_lo = ((c.x - reach) / p - 0.5).floor() as i64;
        let r_hi = ((c.x + reach) / p - 0.5).ceil() as i64;
        let c_lo = ((c.y - reach) / p - 0.5).floor() as i64;
        let c_hi = ((c.y + reach) / p - 0.5).ceil() as i64;
        let mut covered = Vec::new();
        for r in r_lo..=r_hi {
            for k in c_lo..=c_hi {
                let centre = Vec2::new((r as f64 + 0.5) * p, (k as f64 + 0.5) * p);
                if footprint_covers(&object.footprint, c, centre) {
                    covered.push((r, k));
                }
            }
        }
        if covered.is_empty() {
            covered.push(((c.x / p).floor() as i64, (c.y / p).floor() as i64));
        }
        let share = force / covered.len() as f64;
        for (r, k) in covered {
            if r >= 0 && k >= 0 && (r as usize) < self.rows && (k as usize) < self.cols {
                self.forces[r as usize * self.cols + k as usize] += share;
            }
        }
    }
}

fn footprint_covers(fp: &Footprint, centre: Vec2, p: Vec2) -> bool {
    const EPS: f64 = 1e-12;
    match *fp {
        Footprint::Disc { radius } => centre.distance(p) <= radius + EPS,
        Footprint::Rect { rows_m, cols_m } => {
            (p.x - centre.x).abs() <= 0.5 * rows_m + EPS && (p.y - centre.y).abs() <= 0.5 * cols_m + EPS
        }
    }
}

/// Reads the table: every object resting on it loads the tiles under its
/// footprint with `mass · g`, and loads superpose.
pub fn read_tactile(world: &WorldState) -> PressureGrid {
    let TableFrame { rows, cols, pitch, .. } = world.table_frame;
    let mut grid = PressureGrid::zeros(rows, cols, pitch);
    grid.timestamp = world.clock;
    for object in world.table_objects() {
        grid.add_object(object);
    }
    grid
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableClass {
    Mug,
    Plate,
    Box,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReading {
    pub present: bool,
    /// Force-weighted mean (row, col).
    pub centroid_tiles: (f64, f64),
    /// Centroid in table-frame meters.
    pub centroid_meters: Vec2,
    pub weight: f64,
    pub object_class: TableClass,
    pub edge_flag: bool,
    pub total_force: f64,
}

impl TableReading {
    pub fn absent() -> Self {
        Self {
            present: false,
            centroid_tiles: (0.0, 0.0),
            centroid_meters: Vec2::default(),
            weight: 0.0,
            object_class: TableClass::Unknown,
            edge_flag: false,
            total_force: 0.0,
        }
    }
}

/// Binary shape templates, as (row, col) offsets.
fn templates() -> Vec<(TableClass, Vec<(i64, i64)>)> {
    let disc = |diameter: i64| {
        let r = diameter as f64 / 2.0;
        let h = diameter / 2;
        let mut cells = Vec::new();
        for dr in -h..=h {
            for dc in -h..=h {
                if ((dr * dr + dc * dc) as f64).sqrt() <= r {
                    cells.push((dr, dc));
                }
            }
        }
        cells
    };
    let rect = |h: i64, w: i64| (0..h).flat_map(|r| (0..w).map(move |c| (r, c))).collect::<Vec<_>>();
    vec![
        (TableClass::Mug, disc(3)),
        (TableClass::Plate, disc(7)),
        (TableClass::Box, rect(4, 6)),
        (TableClass::Box, rect(6, 4)),
    ]
}

/// Best IoU of each template against `mask` over all translations that make
/// the template overlap the mask's bounding box.
fn classify(mask: &[bool], rows: usize, cols: usize, min_iou: f64) -> TableClass {
    let active: Vec<(i64, i64)> = (0..rows * cols)
        .filter(|&i| mask[i])
        .map(|i| ((i / cols) as i64, (i % cols) as i64))
        .collect();
    if active.is_empty() {
        return TableClass::Unknown;
    }
    let n_active = active.len();
    let (r0, r1) = (active.iter().map(|a| a.0).min().unwrap(), active.iter().map(|a| a.0).max().unwrap());
    let (c0, c1) = (active.iter().map(|a| a.1).min().unwrap(), active.iter().map(|a| a.1).max().unwrap());
    let at = |r: i64, c: i64| r >= 0 && c >= 0 && (r as usize) < rows && (c as usize) < cols && mask[r as usize * cols + c as usize];

    let mut best = (0.0_f64, TableClass::Unknown);
    for (class, cells) in templates() {
        let (tr0, tr1) = (cells.iter().map(|a| a.0).min().unwrap(), cells.iter().map(|a| a.0).max().unwrap());
        let (tc0, tc1) = (cells.iter().map(|a| a.1).min().unwrap(), cells.iter().map(|a| a.1).max().unwrap());
        for dr in (r0 - tr1)..=(r1 - tr0) {
            for dc in (c0 - tc1)..=(c1 - tc0) {
                let inter = cells.iter().filter(|&&(r, c)| at(r + dr, c + dc)).count();
                if inter == 0 {
                    continue;
                }
                let iou = inter as f64 / (cells.len() + n_active - inter) as f64;
                if iou > best.0 {
                    best = (iou, class);
                }
            }
        }
    }
    if best.0 >= min_iou {
        best.1
    } else {
        TableClass::Unknown
    }
}

/// Derives presence, centroid, weight, edge proximity and class from a grid.
pub fn analyze_table(grid: &PressureGrid, cfg: &TableAnalysisConfig) -> TableReading {
    let (rows, cols) = (grid.rows, grid.cols);
    let mut total = 0.0;
    let mut sum_r = 0.0;
    let mut sum_c = 0.0;
    for (i, &f) in grid.forces.iter().enumerate() {
        total += f;
        sum_r += f * (i / cols) as f64;
        sum_c += f * (i % cols) as f64;
    }
    if total.is_nan() || total <= cfg.presence_force {
        return TableReading::absent();
    }
    let mask: Vec<bool> = grid.forces.iter().map(|&f| f > cfg.active_force).collect();
    let edge_flag = mask.iter().enumerate().any(|(i, &on)| {
        let (r, c) = (i / cols, i % cols);
        on && (r == 0 || c == 0 || r + 1 == rows || c + 1 == cols)
    });
    let centroid = (sum_r / total, sum_c / total);
    TableReading {
        present: true,
        centroid_tiles: centroid,
        centroid_meters: Vec2::new((centroid.0 + 0.5) * grid.pitch, (centroid.1 + 0.5) * grid.pitch),
        weight: total / GRAVITY,
        object_class: classify(&mask, rows, cols, cfg.min_iou),
        edge_flag,
        total_force: total,
    }
}

/// What an item is expected to look like on the table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayloadProfile {
    pub class: TableClass,
    pub weight_kg: f64,
    pub tolerance_kg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    EdgeViolation,
    WeightMismatch,
    ClassMismatch,
    Absent,
}

impl Violation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Violation::EdgeViolation => "edge_violation",
            Violation::WeightMismatch => "weight_mismatch",
            Violation::ClassMismatch => "class_mismatch",
            Violation::Absent => "absent",
        }
    }
}

/// Empty set means OK.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VerificationResult {
    pub violations: BTreeSet<Violation>,
}

impl VerificationResult {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn verify_payload(reading: &TableReading, expected: &PayloadProfile) -> VerificationResult {
    let mut violations = BTreeSet::new();
    if !reading.present {
        violations.insert(Violation::Absent);
        return VerificationResult { violations };
    }
    if reading.edge_flag {
        violations.insert(Violation::EdgeViolation);
    }
    if (reading.weight - expected.weight_kg).abs() > expected.tolerance_kg {
        violations.insert(Violation::WeightMismatch);
    }
    if reading.object_class != expected.class {
        violations.insert(Violation::ClassMismatch);
    }
    VerificationResult { violations }
}
