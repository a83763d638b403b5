use super::{LidarConfig, SensorError};
use crate::geometry::Vec2;
use crate::world::WorldState;
use serde::{Deserialize, Serialize};

/// One sweep; `ranges[i]` is the beam at robot-frame bearing `i · 360°/beams`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LidarScan {
    pub ranges: Vec<f64>,
    pub max_range: f64,
}

pub fn lidar_scan(world: &WorldState, cfg: &LidarConfig) -> Result<LidarScan, SensorError> {
    let origin = world.robot.position();
    if world.obstacles.iter().any(|o| o.contains_interior(origin)) {
        return Err(SensorError::RobotInsideObstacle(origin.x, origin.y));
    }
    let step = 360.0 / cfg.beams as f64;
    let ranges = (0..cfg.beams)
        .map(|i| {
            let dir = Vec2::from_polar(1.0, world.robot.theta + (i as f64 * step).to_radians());
            world
                .obstacles
                .iter()
                .filter_map(|o| o.ray_intersection(origin, dir))
                .fold(cfg.max_range, f64::min)
        })
        .collect();
    Ok(LidarScan { ranges, max_range: cfg.max_range })
}
