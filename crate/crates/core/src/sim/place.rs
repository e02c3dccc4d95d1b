use std::f64::consts::PI;

use rand::Rng;

use crate::geometry::{Shape, Vec2};
use crate::reference::PlatformSpec;

use super::{ArenaSpec, Body, Pose, RobotState, SimError};

pub const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

fn sample_in(shape: &Shape, rng: &mut impl Rng) -> Vec2 {
    match *shape {
        Shape::Circle { center, radius } => {
            let r = radius * rng.random::<f64>().sqrt();
            let a = rng.random_range(-PI..PI);
            center + Vec2::from_polar(r, a)
        }
        Shape::Rectangle { min, max } => {
            let u: f64 = rng.random();
            let v: f64 = rng.random();
            Vec2::new(min.x + u * (max.x - min.x), min.y + v * (max.y - min.y))
        }
    }
}

/// Rejection-sample non-overlapping start poses with centers in the arena's
/// start region and headings uniform in `[-π, π)`. Robot `i` gets `specs[i]`.
pub fn place_robots(arena: &ArenaSpec, specs: &[PlatformSpec], rng: &mut impl Rng) -> Result<Vec<RobotState>, SimError> {
    let mut bodies = Vec::with_capacity(specs.len());
    for spec in specs {
        spec.validate().map_err(|e| SimError::InvalidState(e.to_string()))?;
        bodies.push(Body::from_spec(spec));
    }
    place_bodies(arena, &bodies, rng)
}

/// As [`place_robots`], for bodies already in the arena's units.
pub fn place_bodies(arena: &ArenaSpec, bodies: &[Body], rng: &mut impl Rng) -> Result<Vec<RobotState>, SimError> {
    let planes = arena.validate()?;
    let mut placed: Vec<RobotState> = Vec::with_capacity(bodies.len());
    for (id, &body) in bodies.iter().enumerate() {
        let mut found = None;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let p = sample_in(&arena.start_region, rng);
            let theta = rng.random_range(-PI..PI);
            let inside = planes.iter().all(|hp| hp.signed_distance(p) >= body.radius);
            let clear = placed.iter().all(|other| {
                let d = Vec2::new(other.pose.x, other.pose.y) - p;
                d.norm() >= other.body.radius + body.radius
            });
            if inside && clear {
                found = Some(Pose { x: p.x, y: p.y, theta });
                break;
            }
        }
        let pose = found.ok_or(SimError::Placement {
            robot: id,
            attempts: MAX_PLACEMENT_ATTEMPTS,
        })?;
        placed.push(RobotState { id, pose, body });
    }
    Ok(placed)
}
