//! Planar geometry shared by the world, the planner and the sensor models.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A point or vector in the world plane, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(r: f64, angle: f64) -> Self {
        Self::new(r * angle.cos(), r * angle.sin())
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    /// Angle of the vector measured from +x.
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn lerp(self, o: Vec2, s: f64) -> Vec2 {
        self + (o - self) * s
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

/// Wraps an angle into (-π, π].
pub fn normalize_angle(a: f64) -> f64 {
    if !a.is_finite() {
        return a;
    }
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Axis-aligned rectangle, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Rect {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Self {
            min_x: min_x.min(max_x),
            min_y: min_y.min(max_y),
            max_x: min_x.max(max_x),
            max_y: min_y.max(max_y),
        }
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn is_finite(&self) -> bool {
        self.min_x.is_finite() && self.min_y.is_finite() && self.max_x.is_finite() && self.max_y.is_finite()
    }

    /// Closed containment.
    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }

    /// Strict interior containment.
    pub fn contains_interior(&self, p: Vec2) -> bool {
        p.x > self.min_x && p.x < self.max_x && p.y > self.min_y && p.y < self.max_y
    }

    /// Euclidean distance from a point to the rectangle (0 inside).
    pub fn distance_to(&self, p: Vec2) -> f64 {
        let dx = (self.min_x - p.x).max(0.0).max(p.x - self.max_x);
        let dy = (self.min_y - p.y).max(0.0).max(p.y - self.max_y);
        dx.hypot(dy)
    }

    pub fn corners(&self) -> [Vec2; 4] {
        [
            Vec2::new(self.min_x, self.min_y),
            Vec2::new(self.max_x, self.min_y),
            Vec2::new(self.max_x, self.max_y),
            Vec2::new(self.min_x, self.max_y),
        ]
    }

    /// Ray/rectangle intersection by the slab method. Returns the smallest
    /// `t ≥ 0` with `origin + t·dir` on the rectangle boundary, or `None`.
    /// A ray starting inside the rectangle reports its exit point.
    pub fn ray_intersection(&self, origin: Vec2, dir: Vec2) -> Option<f64> {
        let mut t_near = f64::NEG_INFINITY;
        let mut t_far = f64::INFINITY;
        for (o, d, lo, hi) in [
            (origin.x, dir.x, self.min_x, self.max_x),
            (origin.y, dir.y, self.min_y, self.max_y),
        ] {
            if d == 0.0 {
                if o < lo || o > hi {
                    return None;
                }
            } else {
                let t1 = (lo - o) / d;
                let t2 = (hi - o) / d;
                let (a, b) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
                t_near = t_near.max(a);
                t_far = t_far.min(b);
                if t_near > t_far {
                    return None;
                }
            }
        }
        if t_far < 0.0 {
            None
        } else if t_near >= 0.0 {
            Some(t_near)
        } else {
            Some(t_far)
        }
    }

    /// True when the closed segment `a–b` touches the closed rectangle.
    pub fn intersects_segment(&self, a: Vec2, b: Vec2) -> bool {
        if self.contains(a) || self.contains(b) {
            return true;
        }
        let d = b - a;
        match self.ray_intersection(a, d) {
            Some(t) => t <= 1.0,
            None => false,
        }
    }

    /// Minimum distance between the segment `a–b` and the rectangle.
    pub fn segment_distance(&self, a: Vec2, b: Vec2) -> f64 {
        if self.intersects_segment(a, b) {
            return 0.0;
        }
        let mut best = self.distance_to(a).min(self.distance_to(b));
        let c = self.corners();
        for i in 0..4 {
            let (p, q) = (c[i], c[(i + 1) % 4]);
            best = best.min(point_segment_distance(p, a, b));
            best = best.min(point_segment_distance(a, p, q));
            best = best.min(point_segment_distance(b, p, q));
        }
        best
    }
}

/// Distance from `p` to the closed segment `a–b`.
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let s = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_angle_range() {
        assert_eq!(normalize_angle(0.0), 0.0);
        assert!((normalize_angle(-PI) - PI).abs() < 1e-15);
        assert!((normalize_angle(PI) - PI).abs() < 1e-15);
        assert!((normalize_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((normalize_angle(-0.5 - 4.0 * PI) + 0.5).abs() < 1e-12);
        for i in -1000..1000 {
            let a = normalize_angle(i as f64 * 0.0137);
            assert!(a > -PI && a <= PI);
        }
    }

    #[test]
    fn ray_hits_wall_face() {
        let wall = Rect::new(1.0, -1.0, 1.2, 1.0);
        let t = wall.ray_intersection(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)).unwrap();
        assert_eq!(t, 1.0);
        assert!(wall.ray_intersection(Vec2::new(0.0, 0.0), Vec2::new(-1.0, 0.0)).is_none());
        assert!(wall.ray_intersection(Vec2::new(0.0, 2.0), Vec2::new(1.0, 0.0)).is_none());
    }

    #[test]
    fn segment_distance_cases() {
        let r = Rect::new(0.0, 0.0, 1.0, 1.0);
        assert_eq!(r.segment_distance(Vec2::new(-1.0, 0.5), Vec2::new(2.0, 0.5)), 0.0);
        let d = r.segment_distance(Vec2::new(-1.0, 2.0), Vec2::new(2.0, 2.0));
        assert!((d - 1.0).abs() < 1e-12);
        // passes the corner diagonally
        let d = r.segment_distance(Vec2::new(2.0, 1.0), Vec2::new(1.0, 2.0));
        assert!((d - 0.5f64.sqrt()).abs() < 1e-12);
    }
}
