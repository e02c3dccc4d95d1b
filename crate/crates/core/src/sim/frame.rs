//! Body-radius units for running episodes.
//!
//! Lengths are divided by the robot's body radius and snapped to a
//! 2⁻³² lattice. Two platforms that are exact scale copies of each other
//! then get bit-identical arenas, bodies and speeds, so their episodes run
//! the same arithmetic and stay exact scale copies. Without this, rounding
//! differences between the metric versions are amplified by collisions and
//! sensor thresholds until the twins part ways.

use crate::geometry::{Shape, Vec2};

use super::{ArenaSpec, Body, FloorPatch, Light};

const LATTICE: f64 = 4_294_967_296.0; // 2^32

/// Round to the nearest multiple of 2⁻³². Exact apart from the rounding
/// itself, since the lattice step is a power of two.
pub fn snap(x: f64) -> f64 {
    (x * LATTICE).round() / LATTICE
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    /// Metres per frame length unit.
    pub unit: f64,
}

impl Frame {
    pub fn for_body(body: &Body) -> Self {
        Self { unit: body.radius }
    }

    pub fn length(&self, metres: f64) -> f64 {
        snap(metres / self.unit)
    }

    pub fn point(&self, p: Vec2) -> Vec2 {
        Vec2::new(self.length(p.x), self.length(p.y))
    }

    pub fn shape(&self, s: &Shape) -> Shape {
        match *s {
            Shape::Circle { center, radius } => Shape::Circle {
                center: self.point(center),
                radius: self.length(radius),
            },
            Shape::Rectangle { min, max } => Shape::Rectangle {
                min: self.point(min),
                max: self.point(max),
            },
        }
    }

    pub fn arena(&self, a: &ArenaSpec) -> ArenaSpec {
        ArenaSpec {
            bounds: a.bounds.iter().map(|&p| self.point(p)).collect(),
            default_floor: a.default_floor,
            floor_patches: a
                .floor_patches
                .iter()
                .map(|p| FloorPatch {
                    shape: self.shape(&p.shape),
                    color: p.color,
                })
                .collect(),
            lights: a
                .lights
                .iter()
                .map(|l| Light {
                    position: self.point(l.position),
                    intensity: l.intensity,
                })
                .collect(),
            grid: a.grid,
            start_region: self.shape(&a.start_region),
        }
    }

    /// Lengths in frame units, speed in frame units per second.
    pub fn body(&self, b: &Body) -> Body {
        Body {
            radius: self.length(b.radius),
            axle: self.length(b.axle),
            v_max: self.length(b.v_max),
            prox_range: self.length(b.prox_range),
            light_range: self.length(b.light_range),
            rab_range: self.length(b.rab_range),
            control_period: b.control_period,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{scale_platform, PlatformSpec};

    #[test]
    fn snap_is_idempotent_and_fine() {
        for x in [0.0, 1.0, -17.142857142857142, 1e-3, 123.456] {
            let s = snap(x);
            assert_eq!(snap(s), s);
            assert!((s - x).abs() <= 0.5 / LATTICE);
        }
    }

    #[test]
    fn scaled_bodies_coincide() {
        let base = Body::from_spec(&PlatformSpec::epuck());
        let frame = Frame::for_body(&base);
        let b = frame.body(&base);
        assert_eq!(b.radius, 1.0);
        for factor in [3.0, 2.0, 0.5, 7.0] {
            let other = Body::from_spec(&scale_platform(&PlatformSpec::epuck(), factor).unwrap());
            assert_eq!(Frame::for_body(&other).body(&other), b, "factor {factor}");
        }
        let merc = Body::from_spec(&PlatformSpec::mercator());
        assert_eq!(Frame::for_body(&merc).body(&merc), b);
    }
}
