use rand::Rng;
use rand_distr::StandardNormal;

use crate::geometry::{point_segment_distance, ray_circle_distance, ray_exit_distance, Vec2};
use crate::reference::{aggregate_fixed, aggregate_vector, FloorColor, PolarVector, SensorSnapshot, RAY_COUNT};
use crate::rng::{purpose, stream, StreamRng};

use super::{SimError, World};

/// Light readings fall off as `intensity / (1 + d²)` with `d` the distance
/// expressed as `LIGHT_DISTANCE_UNITS` per light range, so the falloff is
/// the same for every platform scale.
pub const LIGHT_DISTANCE_UNITS: f64 = 3.0;

struct Noise {
    sd: f64,
    rng: Option<StreamRng>,
}

impl Noise {
    fn apply(&mut self, reading: f64) -> f64 {
        match self.rng.as_mut() {
            Some(rng) => {
                let n: f64 = rng.sample(StandardNormal);
                (reading + self.sd * n).clamp(0.0, 1.0)
            }
            None => reading.clamp(0.0, 1.0),
        }
    }
}

impl World {
    /// Read the RM1.2 inputs for one robot.
    pub fn sense(&self, robot_id: usize) -> Result<SensorSnapshot, SimError> {
        let me = self.robots.get(robot_id).ok_or(SimError::UnknownRobot(robot_id))?;
        let sd = self.config.effective_sensor_sd();
        let mut noise = Noise {
            sd,
            rng: (sd > 0.0).then(|| stream(self.config.seed, &[purpose::SENSOR, robot_id as u64, self.cycle()])),
        };
        let pos = Vec2::new(me.pose.x, me.pose.y);
        let (hs, hc) = me.pose.theta.sin_cos();
        let body = me.body;

        // Proximity: nearest wall or robot along each ray, measured from the body edge.
        let mut prox_rays = [0.0; RAY_COUNT];
        for k in 0..RAY_COUNT {
            let dir = Vec2::new(self.ray_cos[k], self.ray_sin[k]).rotated_sc(hs, hc);
            let mut dist = ray_exit_distance(&self.planes, pos, dir);
            for other in &self.robots {
                if other.id == robot_id {
                    continue;
                }
                let center = Vec2::new(other.pose.x, other.pose.y);
                if let Some(t) = ray_circle_distance(pos, dir, center, other.body.radius) {
                    dist = dist.min(t);
                }
            }
            let gap = (dist - body.radius).max(0.0);
            prox_rays[k] = (1.0 - gap / body.prox_range).max(0.0);
        }

        // Light: inverse-square falloff, cosine directivity per sensor.
        let mut light_rays = [0.0; RAY_COUNT];
        for light in &self.arena().lights {
            let to = light.position - pos;
            let d = to.norm();
            if d > body.light_range {
                continue;
            }
            let scaled = LIGHT_DISTANCE_UNITS * d / body.light_range;
            let falloff = light.intensity / (1.0 + scaled * scaled);
            // Bearing relative to heading, as sin/cos.
            let (bs, bc) = if d > 0.0 {
                let (ws, wc) = (to.y / d, to.x / d);
                (ws * hc - wc * hs, wc * hc + ws * hs)
            } else {
                (0.0, 1.0)
            };
            for k in 0..RAY_COUNT {
                let cos_diff = bc * self.ray_cos[k] + bs * self.ray_sin[k];
                light_rays[k] += falloff * cos_diff.max(0.0);
            }
        }

        for r in prox_rays.iter_mut() {
            *r = noise.apply(*r);
        }
        for r in light_rays.iter_mut() {
            *r = noise.apply(*r);
        }

        let gnd: FloorColor = self.arena().floor_at(pos);

        // Range-and-bearing: neighbors within range with a clear line of sight.
        let mut rab: Vec<(f64, f64)> = Vec::new();
        for other in &self.robots {
            if other.id == robot_id {
                continue;
            }
            let center = Vec2::new(other.pose.x, other.pose.y);
            let to = center - pos;
            if to.norm() > body.rab_range {
                continue;
            }
            let blocked = self.robots.iter().any(|third| {
                third.id != robot_id
                    && third.id != other.id
                    && point_segment_distance(Vec2::new(third.pose.x, third.pose.y), pos, center) < third.body.radius
            });
            if blocked {
                continue;
            }
            let local = to.rotated_sc(-hs, hc);
            rab.push((noise.apply(1.0), local.angle()));
        }

        let snapshot = SensorSnapshot {
            prox: aggregate_fixed(&prox_rays, &self.ray_sin, &self.ray_cos),
            light: aggregate_fixed(&light_rays, &self.ray_sin, &self.ray_cos),
            gnd,
            neighbors: rab.len() as u32,
            rab: if rab.is_empty() { PolarVector::ZERO } else { aggregate_vector(&rab) },
            prox_rays,
            light_rays,
            swarm_size: self.robots.len() as u32,
        };
        Ok(snapshot)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Shape;
    use crate::reference::PlatformSpec;
    use crate::sim::{ArenaSpec, Body, FloorPatch, Light, Pose, RobotState, SimConfig};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn arena(side: f64) -> ArenaSpec {
        ArenaSpec {
            bounds: ArenaSpec::square_bounds(side),
            default_floor: FloorColor::Gray,
            floor_patches: vec![],
            lights: vec![],
            grid: None,
            start_region: Shape::Circle {
                center: Vec2::ZERO,
                radius: 0.1,
            },
        }
    }

    fn robot(id: usize, x: f64, y: f64, theta: f64) -> RobotState {
        RobotState {
            id,
            pose: Pose { x, y, theta },
            body: Body::from_spec(&PlatformSpec::epuck()),
        }
    }

    #[test]
    fn nothing_in_range() {
        let w = World::new(arena(1.2), vec![robot(0, 0.0, 0.0, 0.7)], SimConfig::noiseless(0)).unwrap();
        let s = w.sense(0).unwrap();
        assert_eq!(s.prox, PolarVector::ZERO);
        assert_eq!(s.light, PolarVector::ZERO);
        assert_eq!(s.neighbors, 0);
        assert_eq!(s.rab, PolarVector::ZERO);
        assert_eq!(s.gnd, FloorColor::Gray);
        s.validate().unwrap();
        assert_eq!(w.sense(1), Err(SimError::UnknownRobot(1)));
    }

    #[test]
    fn wall_at_half_range_reads_half() {
        // Wall at x = 0.6, edge gap of prox_range / 2 = 1.5 cm.
        let r = 0.035;
        let w = World::new(arena(1.2), vec![robot(0, 0.6 - r - 0.015, 0.0, 0.0)], SimConfig::noiseless(0)).unwrap();
        let s = w.sense(0).unwrap();
        assert!((s.prox_rays[0] - 0.5).abs() < 1e-12, "{}", s.prox_rays[0]);
        assert!(s.prox.magnitude > 0.0);
        assert!(s.prox.angle.abs() < 1e-9);
    }

    #[test]
    fn contact_reads_one() {
        let r = 0.035;
        let w = World::new(arena(1.2), vec![robot(0, 0.0, 0.6 - r, 0.0)], SimConfig::noiseless(0)).unwrap();
        let s = w.sense(0).unwrap();
        assert!((s.prox_rays[2] - 1.0).abs() < 1e-12);
        assert!((s.prox.angle - FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn single_neighbor_bearing() {
        let w = World::new(
            arena(1.2),
            vec![robot(0, 0.0, 0.0, 0.0), robot(1, 0.0, 0.2, 1.0)],
            SimConfig::noiseless(0),
        )
        .unwrap();
        let s = w.sense(0).unwrap();
        assert_eq!(s.neighbors, 1);
        assert!((s.rab.angle - FRAC_PI_2).abs() < 1e-12);
        assert!((s.rab.magnitude - 1.0).abs() < 1e-12);
        let s1 = w.sense(1).unwrap();
        assert_eq!(s1.neighbors, 1);
        assert!((s1.rab.angle - (-FRAC_PI_2 - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn neighbor_out_of_range_or_occluded() {
        let far = World::new(
            arena(1.2),
            vec![robot(0, -0.3, 0.0, 0.0), robot(1, 0.3, 0.0, 0.0)],
            SimConfig::noiseless(0),
        )
        .unwrap();
        assert_eq!(far.sense(0).unwrap().neighbors, 0);

        let occluded = World::new(
            arena(1.2),
            vec![robot(0, -0.2, 0.0, 0.0), robot(1, 0.2, 0.0, 0.0), robot(2, 0.0, 0.0, 0.0)],
            SimConfig::noiseless(0),
        )
        .unwrap();
        let s = occluded.sense(0).unwrap();
        assert_eq!(s.neighbors, 1);
        assert!(s.rab.angle.abs() < 1e-12);
    }

    #[test]
    fn light_ahead_and_ground_patch() {
        let mut a = arena(1.2);
        a.lights.push(Light {
            position: Vec2::new(0.4, 0.0),
            intensity: 1.0,
        });
        a.floor_patches.push(FloorPatch {
            shape: Shape::Circle {
                center: Vec2::ZERO,
                radius: 0.1,
            },
            color: FloorColor::Black,
        });
        let w = World::new(a, vec![robot(0, 0.0, 0.0, 0.0)], SimConfig::noiseless(0)).unwrap();
        let s = w.sense(0).unwrap();
        let scaled = LIGHT_DISTANCE_UNITS * 0.4 / 1.0;
        let falloff = 1.0 / (1.0 + scaled * scaled);
        assert!((s.light_rays[0] - falloff).abs() < 1e-12);
        assert!((s.light_rays[1] - falloff * (PI / 4.0).cos()).abs() < 1e-12);
        assert_eq!(s.light_rays[4], 0.0);
        assert!(s.light.angle.abs() < 1e-12);
        assert_eq!(s.gnd, FloorColor::Black);
    }

    #[test]
    fn light_beyond_range_is_dark() {
        let mut a = arena(3.0);
        a.lights.push(Light {
            position: Vec2::new(1.4, 0.0),
            intensity: 1.0,
        });
        let w = World::new(a, vec![robot(0, -0.1, 0.0, 0.0)], SimConfig::noiseless(0)).unwrap();
        assert_eq!(w.sense(0).unwrap().light, PolarVector::ZERO);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn noisy_readings_respect_bounds(seed in any::<u64>(), sd in 0.0f64..0.5) {
            let mut a = arena(0.4);
            a.lights.push(Light { position: Vec2::new(0.1, 0.1), intensity: 3.0 });
            a.start_region = Shape::Rectangle { min: Vec2::new(-0.2, -0.2), max: Vec2::new(0.2, 0.2) };
            let specs = vec![PlatformSpec::epuck(); 3];
            let robots = crate::sim::place_robots(&a, &specs, &mut stream(seed, &[0])).unwrap();
            let cfg = SimConfig { seed, sensor_noise_sd: sd, ..SimConfig::default() };
            let w = World::new(a, robots, cfg).unwrap();
            for id in 0..3 {
                prop_assert!(w.sense(id).unwrap().validate().is_ok());
            }
        }
    }
}
