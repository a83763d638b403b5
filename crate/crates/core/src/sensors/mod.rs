//! Sensor models and their analysis pipelines.
//!
//! Every function here is a pure function of a [`WorldState`] snapshot (or
//! of a previously captured reading) plus configuration.
//!
//! [`WorldState`]: crate::world::WorldState

mod gridfmt;
mod lidar;
mod microphone;
mod tactile;
mod thermal;

pub use gridfmt::{GridFormatError, GridText};
pub use lidar::{lidar_scan, LidarScan};
pub use microphone::{capture_speech, intelligibility, MicSample};
pub use tactile::{
    analyze_table, read_tactile, verify_payload, PayloadProfile, PressureGrid, TableClass, TableReading,
    VerificationResult, Violation, GRAVITY,
};
pub use thermal::{detect_hotspots, render_thermal, HotspotDetection, ThermalFrame, NOMINAL_OBJECT_RADIUS};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SensorError {
    #[error("robot at ({0:.3}, {1:.3}) is inside an obstacle")]
    RobotInsideObstacle(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermalConfig {
    pub cols: usize,
    pub rows: usize,
    /// Horizontal field of view, radians. Pixels are square in angle.
    pub hfov: f64,
    pub max_range: f64,
}

impl Default for ThermalConfig {
    fn default() -> Self {
        Self { cols: 32, rows: 24, hfov: 0.995, max_range: 5.0 }
    }
}

/// Linear-decay intelligibility model for the two microphones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MicConfig {
    /// Distance at which the omnidirectional score reaches zero.
    pub omni_range: f64,
    /// Distance at which the directional score reaches zero on axis.
    pub directional_range: f64,
}

impl Default for MicConfig {
    fn default() -> Self {
        Self { omni_range: 4.0, directional_range: 8.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LidarConfig {
    pub beams: usize,
    pub max_range: f64,
}

impl Default for LidarConfig {
    fn default() -> Self {
        Self { beams: 360, max_range: 10.0 }
    }
}

/// Thresholds of the table analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TableAnalysisConfig {
    /// Minimum total force for an object to count as present, newtons.
    pub presence_force: f64,
    /// Minimum tile force for a tile to count as active, newtons.
    pub active_force: f64,
    /// Minimum template IoU for a class to be assigned.
    pub min_iou: f64,
}

impl Default for TableAnalysisConfig {
    fn default() -> Self {
        Self { presence_force: 0.05, active_force: 0.01, min_iou: 0.6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorConfig {
    pub thermal: ThermalConfig,
    pub mic: MicConfig,
    pub lidar: LidarConfig,
    pub table: TableAnalysisConfig,
}
