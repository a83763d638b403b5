//! Dual-microphone intelligibility model.
//!
//! The omnidirectional microphone degrades linearly with distance. The
//! directional one in the head degrades more slowly but is weighted by a
//! cardioid pattern around the head's optical axis.

use super::MicConfig;
use crate::geometry::normalize_angle;
use crate::world::{Person, WorldState};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicSample {
    pub omni_score: f64,
    pub dir_score: f64,
    /// Speaker bearing in the robot frame.
    pub speaker_bearing: f64,
    pub transcript: String,
}

/// Scores for a speaker at distance `d` and off-axis angle `theta`.
pub fn intelligibility(cfg: &MicConfig, d: f64, theta: f64) -> (f64, f64) {
    let omni = (1.0 - d / cfg.omni_range).clamp(0.0, 1.0);
    let dir = (1.0 - d / cfg.directional_range).clamp(0.0, 1.0) * (1.0 + theta.cos()) / 2.0;
    (omni, dir)
}

pub fn capture_speech(world: &WorldState, speaker: &Person, text: &str, cfg: &MicConfig) -> MicSample {
    let d = world.robot.position().distance(speaker.position);
    let bearing = if d > 0.0 { world.robot.bearing_to(speaker.position) } else { 0.0 };
    let off_axis = normalize_angle(bearing - world.head.pan).abs();
    let (omni_score, dir_score) = intelligibility(cfg, d, off_axis);
    MicSample { omni_score, dir_score, speaker_bearing: bearing, transcript: text.to_string() }
}
