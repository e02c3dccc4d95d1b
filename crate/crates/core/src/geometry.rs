//! Planar geometry in metres: vectors, regions, and the convex arena boundary.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(magnitude: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(magnitude * c, magnitude * s)
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self::new(self.x * factor, self.y * factor)
    }

    /// Rotate counterclockwise by the angle whose sine and cosine are given.
    pub fn rotated_sc(self, sin: f64, cos: f64) -> Self {
        Self::new(self.x * cos - self.y * sin, self.x * sin + self.y * cos)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        self.scaled(k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Wrap an angle into `[-π, π]`.
pub fn normalize_angle(a: f64) -> f64 {
    if (-PI..=PI).contains(&a) {
        return a;
    }
    let wrapped = (a + PI).rem_euclid(2.0 * PI) - PI;
    if wrapped < -PI {
        wrapped + 2.0 * PI
    } else {
        wrapped
    }
}

/// A floor patch or start-area shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Shape {
    Circle { center: Vec2, radius: f64 },
    Rectangle { min: Vec2, max: Vec2 },
}

impl Shape {
    pub fn contains(&self, p: Vec2) -> bool {
        match *self {
            Shape::Circle { center, radius } => (p - center).norm_sq() <= radius * radius,
            Shape::Rectangle { min, max } => p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y,
        }
    }

    pub fn scaled(&self, factor: f64) -> Shape {
        match *self {
            Shape::Circle { center, radius } => Shape::Circle {
                center: center * factor,
                radius: radius * factor,
            },
            Shape::Rectangle { min, max } => Shape::Rectangle {
                min: min * factor,
                max: max * factor,
            },
        }
    }

    pub fn is_degenerate(&self) -> bool {
        match *self {
            Shape::Circle { radius, .. } => !(radius > 0.0),
            Shape::Rectangle { min, max } => !(max.x > min.x && max.y > min.y),
        }
    }

    /// Boundary points used for containment checks against convex regions
    /// (corners for rectangles, 16 samples for circles).
    pub fn extreme_points(&self) -> Vec<Vec2> {
        match *self {
            Shape::Circle { center, radius } => (0..16)
                .map(|k| center + Vec2::from_polar(radius, k as f64 * PI / 8.0))
                .collect(),
            Shape::Rectangle { min, max } => vec![min, Vec2::new(max.x, min.y), max, Vec2::new(min.x, max.y)],
        }
    }
}

/// One edge constraint of a convex polygon: points `p` inside satisfy
/// `normal · p >= offset`, with `normal` the unit inward normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub normal: Vec2,
    pub offset: f64,
}

impl HalfPlane {
    /// Signed distance of `p` from the edge line, positive inside.
    #[inline]
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

/// Convert a counterclockwise convex polygon into inward half-planes.
/// Returns `None` for fewer than three vertices, clockwise or non-convex
/// winding, or repeated vertices.
pub fn half_planes(vertices: &[Vec2]) -> Option<Vec<HalfPlane>> {
    let n = vertices.len();
    if n < 3 {
        return None;
    }
    let mut planes = Vec::with_capacity(n);
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let c = vertices[(i + 2) % n];
        let edge = b - a;
        let len = edge.norm();
        if !(len > 0.0) {
            return None;
        }
        let cross = edge.x * (c - b).y - edge.y * (c - b).x;
        if !(cross > 0.0) {
            return None;
        }
        let normal = Vec2::new(-edge.y / len, edge.x / len);
        planes.push(HalfPlane {
            normal,
            offset: normal.dot(a),
        });
    }
    Some(planes)
}

/// Distance along a unit ray from `origin` (inside the polygon) to the boundary.
#[inline]
pub fn ray_exit_distance(planes: &[HalfPlane], origin: Vec2, dir: Vec2) -> f64 {
    let mut best = f64::INFINITY;
    for hp in planes {
        let denom = hp.normal.dot(dir);
        if denom < 0.0 {
            let t = -hp.signed_distance(origin) / denom;
            if t < best {
                best = t.max(0.0);
            }
        }
    }
    best
}

/// Distance along a unit ray from `origin` to the first intersection with a
/// circle, or `None` when the ray misses it. Origins inside the circle give 0.
#[inline]
pub fn ray_circle_distance(origin: Vec2, dir: Vec2, center: Vec2, radius: f64) -> Option<f64> {
    let oc = origin - center;
    let b = oc.dot(dir);
    let c = oc.norm_sq() - radius * radius;
    if c <= 0.0 {
        return Some(0.0);
    }
    if b > 0.0 {
        return None;
    }
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    Some(-b - disc.sqrt())
}

/// Shortest distance from `p` to the segment `a`–`b`.
#[inline]
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    let t = if len_sq > 0.0 {
        ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p - (a + ab * t)).norm()
}
