//! Thermal camera model and hot-spot detection.
//!
//! The camera sits at the robot centre and looks along `theta + pan`,
//! tilted by `tilt`. Pixels are squares in (azimuth, elevation) space;
//! column 0 is the leftmost (largest azimuth), row 0 the topmost. Floor
//! objects are treated as spheres of their footprint radius centred in the
//! camera's horizontal plane, so each projects to an angular disc of radius
//! `asin(r / d)` centred at (bearing, -tilt).

use super::ThermalConfig;
use crate::geometry::{normalize_angle, Vec2};
use crate::world::WorldState;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalFrame {
    pub rows: usize,
    pub cols: usize,
    /// Row-major, °C.
    pub pixels: Vec<f64>,
    pub hfov: f64,
    pub max_range: f64,
    /// Head pan at capture time, radians.
    pub pan: f64,
    pub timestamp: f64,
}

/// Object radius assumed when estimating range from apparent width.
pub const NOMINAL_OBJECT_RADIUS: f64 = 0.04;

impl ThermalFrame {
    pub fn uniform(cfg: &ThermalConfig, value: f64, timestamp: f64) -> Self {
        Self {
            rows: cfg.rows,
            cols: cfg.cols,
            pixels: vec![value; cfg.rows * cfg.cols],
            hfov: cfg.hfov,
            max_range: cfg.max_range,
            pan: 0.0,
            timestamp,
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.pixels[row * self.cols + col] = value;
    }

    /// Angular size of one pixel.
    pub fn pixel_angle(&self) -> f64 {
        self.hfov / self.cols as f64
    }

    /// Azimuth of a (fractional) column centre relative to the optical axis.
    pub fn column_azimuth(&self, col: f64) -> f64 {
        self.hfov * (0.5 - (col + 0.5) / self.cols as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HotspotDetection {
    /// Mean (col, row) of the component's pixels.
    pub pixel_centroid: (f64, f64),
    pub peak_temperature: f64,
    /// Robot-frame bearing of the centroid.
    pub bearing: f64,
    /// Rough range from apparent width and a nominal object radius.
    pub estimated_range: f64,
    pub area: usize,
}

/// Renders the thermal image seen from the current head pose.
pub fn render_thermal(world: &WorldState, cfg: &ThermalConfig) -> ThermalFrame {
    let mut frame = ThermalFrame::uniform(cfg, world.ambient_temperature, world.clock);
    frame.pan = world.head.pan;
    let mut depth = vec![f64::INFINITY; cfg.rows * cfg.cols];
    let eye = world.robot.position();
    let axis = world.robot.theta + world.head.pan;
    let px = frame.pixel_angle();
    let half_h = 0.5 * cfg.hfov;
    let half_v = 0.5 * px * cfg.rows as f64;
    let elevation = -world.head.tilt;

    for obj in world.objects.iter().filter(|o| !o.on_table) {
        let d = eye.distance(obj.position);
        let radius = obj.footprint_radius();
        if d > cfg.max_range || d <= radius {
            continue;
        }
        if occluded(world, eye, obj.position) {
            continue;
        }
        let alpha = (radius / d).asin();
        let az = normalize_angle((obj.position - eye).angle() - axis);
        for r in 0..cfg.rows {
            let e_hi = half_v - r as f64 * px;
            let e_lo = e_hi - px;
            let de = (e_lo - elevation).max(0.0).max(elevation - e_hi);
            if de >= alpha {
                continue;
            }
            for c in 0..cfg.cols {
                let a_hi = half_h - c as f64 * px;
                let a_lo = a_hi - px;
                let da = (a_lo - az).max(0.0).max(az - a_hi);
                let i = r * cfg.cols + c;
                if da.hypot(de) < alpha && d < depth[i] {
                    depth[i] = d;
                    frame.pixels[i] = obj.surface_temperature;
                }
            }
        }
    }
    frame
}

fn occluded(world: &WorldState, eye: Vec2, target: Vec2) -> bool {
    world.obstacles.iter().any(|o| o.intersects_segment(eye, target))
}

/// Groups pixels at or above `threshold` into 4-connected components and
/// reports one detection per component, in row-major discovery order.
pub fn detect_hotspots(frame: &ThermalFrame, threshold: f64) -> Vec<HotspotDetection> {
    let (rows, cols) = (frame.rows, frame.cols);
    let hot: Vec<bool> = frame.pixels.iter().map(|&t| t >= threshold).collect();
    let mut seen = vec![false; rows * cols];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..rows * cols {
        if !hot[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let (mut sum_c, mut sum_r, mut n) = (0.0, 0.0, 0usize);
        let mut peak = f64::NEG_INFINITY;
        let (mut min_c, mut max_c) = (usize::MAX, 0);
        while let Some(i) = stack.pop() {
            let (r, c) = (i / cols, i % cols);
            sum_c += c as f64;
            sum_r += r as f64;
            n += 1;
            peak = peak.max(frame.pixels[i]);
            min_c = min_c.min(c);
            max_c = max_c.max(c);
            let mut visit = |j: usize| {
                if hot[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if r > 0 {
                visit(i - cols);
            }
            if r + 1 < rows {
                visit(i + cols);
            }
            if c > 0 {
                visit(i - 1);
            }
            if c + 1 < cols {
                visit(i + 1);
            }
        }
        let centroid = (sum_c / n as f64, sum_r / n as f64);
        let width = (max_c - min_c + 1) as f64 * frame.pixel_angle();
        let estimated_range = (NOMINAL_OBJECT_RADIUS / (0.5 * width).sin()).min(frame.max_range);
        out.push(HotspotDetection {
            pixel_centroid: centroid,
            peak_temperature: peak,
            bearing: normalize_angle(frame.pan + frame.column_azimuth(centroid.0)),
            estimated_range,
            area: n,
        });
    }
    out
}
