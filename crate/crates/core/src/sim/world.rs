use rand::Rng;
use rand_distr::StandardNormal;

use crate::geometry::{normalize_angle, HalfPlane, Vec2};
use crate::reference::{ray_angles, ActuatorCommand, RAY_COUNT};
use crate::rng::{purpose, stream};

use super::{ArenaSpec, Pose, RobotState, SimConfig, SimError, PSEUDO_REALITY_WHEEL_BIAS};

/// Allowed slack when checking the no-overlap and containment invariants,
/// as a fraction of the contact distance. Relative so that a scaled world
/// makes the same decisions.
pub(crate) const CONTACT_TOLERANCE: f64 = 1e-8;
const PROJECTION_PASSES: usize = 6;
/// Commands are in cm/s unless a world is built with [`World::with_command_scale`].
const CM_PER_S: f64 = 0.01;

/// One episode's simulated state. Time is kept as a cycle counter so it
/// advances by exactly one control period per step.
#[derive(Debug, Clone)]
pub struct World {
    arena: ArenaSpec,
    pub(super) planes: Vec<HalfPlane>,
    pub(super) robots: Vec<RobotState>,
    pub(super) config: SimConfig,
    cycle: u64,
    control_period: f64,
    command_scale: f64,
    wheel_bias: Vec<[f64; 2]>,
    pub(super) ray_sin: [f64; RAY_COUNT],
    pub(super) ray_cos: [f64; RAY_COUNT],
}

impl World {
    pub fn new(arena: ArenaSpec, robots: Vec<RobotState>, config: SimConfig) -> Result<World, SimError> {
        config.validate()?;
        let planes = arena.validate()?;
        let control_period = robots
            .first()
            .map(|r| r.body.control_period)
            .ok_or_else(|| SimError::InvalidState("a world needs at least one robot".into()))?;
        if robots.iter().any(|r| r.body.control_period != control_period) {
            return Err(SimError::InvalidState("all robots must share one control period".into()));
        }
        if robots.iter().enumerate().any(|(i, r)| r.id != i) {
            return Err(SimError::InvalidState("robot ids must be 0..n in order".into()));
        }
        let wheel_bias = robots
            .iter()
            .map(|r| {
                if config.pseudo_reality {
                    let mut rng = stream(config.seed, &[purpose::WHEEL_BIAS, r.id as u64]);
                    [
                        rng.random_range(-PSEUDO_REALITY_WHEEL_BIAS..=PSEUDO_REALITY_WHEEL_BIAS),
                        rng.random_range(-PSEUDO_REALITY_WHEEL_BIAS..=PSEUDO_REALITY_WHEEL_BIAS),
                    ]
                } else {
                    [0.0, 0.0]
                }
            })
            .collect();
        let angles = ray_angles();
        let world = World {
            arena,
            planes,
            robots,
            config,
            cycle: 0,
            control_period,
            command_scale: CM_PER_S,
            wheel_bias,
            ray_sin: angles.map(f64::sin),
            ray_cos: angles.map(f64::cos),
        };
        world.check_invariants()?;
        Ok(world)
    }

    /// Interpret commands as multiples of `scale` world units per second.
    /// A world in [`Frame`](super::Frame) units driven by fractions of top
    /// speed uses the body's `v_max` here.
    pub fn with_command_scale(mut self, scale: f64) -> Self {
        self.command_scale = scale;
        self
    }

    pub fn arena(&self) -> &ArenaSpec {
        &self.arena
    }

    pub fn robots(&self) -> &[RobotState] {
        &self.robots
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn time(&self) -> f64 {
        self.cycle as f64 * self.control_period
    }

    pub fn control_period(&self) -> f64 {
        self.control_period
    }

    /// Every disc inside the bounds and no two discs overlapping, up to
    /// [`CONTACT_TOLERANCE`].
    pub fn check_invariants(&self) -> Result<(), SimError> {
        for r in &self.robots {
            let p = Vec2::new(r.pose.x, r.pose.y);
            if !(r.pose.x.is_finite() && r.pose.y.is_finite() && r.pose.theta.is_finite()) {
                return Err(SimError::InvalidState(format!("robot {} has a non-finite pose", r.id)));
            }
            if self
                .planes
                .iter()
                .any(|hp| hp.signed_distance(p) < r.body.radius * (1.0 - CONTACT_TOLERANCE))
            {
                return Err(SimError::InvalidState(format!("robot {} crosses the arena boundary", r.id)));
            }
        }
        for (i, a) in self.robots.iter().enumerate() {
            for b in &self.robots[i + 1..] {
                let d = Vec2::new(a.pose.x - b.pose.x, a.pose.y - b.pose.y).norm();
                if d < (a.body.radius + b.body.radius) * (1.0 - CONTACT_TOLERANCE) {
                    return Err(SimError::InvalidState(format!("robots {} and {} overlap", a.id, b.id)));
                }
            }
        }
        Ok(())
    }

    /// Wheel speeds in world units per second after noise, bias and clamping.
    fn wheel_speeds(&self, i: usize, cmd: ActuatorCommand) -> (f64, f64) {
        let body = &self.robots[i].body;
        let mut left = cmd.left * self.command_scale;
        let mut right = cmd.right * self.command_scale;
        let sd = self.config.effective_actuator_sd();
        if sd > 0.0 {
            let mut rng = stream(self.config.seed, &[purpose::ACTUATOR, i as u64, self.cycle]);
            let nl: f64 = rng.sample(StandardNormal);
            let nr: f64 = rng.sample(StandardNormal);
            left *= 1.0 + sd * nl;
            right *= 1.0 + sd * nr;
        }
        let [bl, br] = self.wheel_bias[i];
        left *= 1.0 + bl;
        right *= 1.0 + br;
        (left.clamp(-body.v_max, body.v_max), right.clamp(-body.v_max, body.v_max))
    }

    /// Advance one control cycle, one command per robot (cm/s by default).
    ///
    /// Each substep moves the robots in id order, each against the current
    /// positions of the others. A move that would penetrate a wall or another
    /// robot is projected back onto the contact surface, so the blocked
    /// component is removed and tangential sliding remains.
    pub fn step(&mut self, commands: &[ActuatorCommand]) -> Result<(), SimError> {
        if commands.len() != self.robots.len() {
            return Err(SimError::CommandCount {
                expected: self.robots.len(),
                got: commands.len(),
            });
        }
        let speeds: Vec<(f64, f64)> = commands
            .iter()
            .enumerate()
            .map(|(i, &c)| self.wheel_speeds(i, c))
            .collect();
        let substeps = self.config.substeps_per_cycle;
        let dt = self.control_period / substeps as f64;
        for _ in 0..substeps {
            for i in 0..self.robots.len() {
                let (vl, vr) = speeds[i];
                if vl == 0.0 && vr == 0.0 {
                    continue;
                }
                let robot = self.robots[i];
                let v = 0.5 * (vl + vr);
                let omega = (vr - vl) / robot.body.axle;
                let heading_mid = robot.pose.theta + 0.5 * omega * dt;
                let (s, c) = heading_mid.sin_cos();
                let old = Vec2::new(robot.pose.x, robot.pose.y);
                let proposed = old + Vec2::new(c, s) * (v * dt);
                let resolved = self.resolve(i, old, proposed);
                let pose = &mut self.robots[i].pose;
                pose.x = resolved.x;
                pose.y = resolved.y;
                pose.theta = normalize_angle(robot.pose.theta + omega * dt);
            }
        }
        self.cycle += 1;
        Ok(())
    }

    fn resolve(&self, i: usize, old: Vec2, proposed: Vec2) -> Vec2 {
        if proposed == old {
            return old;
        }
        let radius = self.robots[i].body.radius;
        let mut q = proposed;
        for _ in 0..PROJECTION_PASSES {
            let mut moved = false;
            for hp in &self.planes {
                let gap = hp.signed_distance(q) - radius;
                if gap < 0.0 {
                    q = q - hp.normal * gap;
                    moved = true;
                }
            }
            for (j, other) in self.robots.iter().enumerate() {
                if j == i {
                    continue;
                }
                let center = Vec2::new(other.pose.x, other.pose.y);
                let min = radius + other.body.radius;
                let d = q - center;
                let dist_sq = d.norm_sq();
                if dist_sq < min * min {
                    let dist = dist_sq.sqrt();
                    q = if dist > 1e-12 { center + d * (min / dist) } else { old };
                    moved = true;
                }
            }
            if !moved {
                return q;
            }
        }
        if self.feasible(i, q, radius) {
            q
        } else {
            old
        }
    }

    fn feasible(&self, i: usize, q: Vec2, radius: f64) -> bool {
        self.planes
            .iter()
            .all(|hp| hp.signed_distance(q) >= radius * (1.0 - CONTACT_TOLERANCE))
            && self.robots.iter().enumerate().all(|(j, o)| {
                j == i || (q - Vec2::new(o.pose.x, o.pose.y)).norm() >= (radius + o.body.radius) * (1.0 - CONTACT_TOLERANCE)
            })
    }

    /// Overwrite a robot's pose; the result must satisfy the world invariants.
    pub fn set_pose(&mut self, id: usize, pose: Pose) -> Result<(), SimError> {
        let previous = self.robots.get(id).ok_or(SimError::UnknownRobot(id))?.pose;
        self.robots[id].pose = pose;
        if let Err(e) = self.check_invariants() {
            self.robots[id].pose = previous;
            return Err(e);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Shape;
    use crate::reference::{FloorColor, PlatformSpec};
    use crate::sim::Body;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn open_arena(side: f64) -> ArenaSpec {
        ArenaSpec {
            bounds: ArenaSpec::square_bounds(side),
            default_floor: FloorColor::Gray,
            floor_patches: vec![],
            lights: vec![],
            grid: None,
            start_region: Shape::Circle {
                center: Vec2::ZERO,
                radius: side / 4.0,
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

    fn single(x: f64, y: f64, theta: f64) -> World {
        World::new(open_arena(1.2), vec![robot(0, x, y, theta)], SimConfig::noiseless(1)).unwrap()
    }

    #[test]
    fn straight_line_advances_one_centimetre() {
        let mut w = single(0.0, 0.0, 0.3);
        w.step(&[ActuatorCommand::new(10.0, 10.0)]).unwrap();
        let p = w.robots()[0].pose;
        assert!((p.x - 0.01 * 0.3f64.cos()).abs() < 1e-9);
        assert!((p.y - 0.01 * 0.3f64.sin()).abs() < 1e-9);
        assert!((p.theta - 0.3).abs() < 1e-12);
        assert_eq!(w.cycle(), 1);
        assert!((w.time() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn pure_rotation_keeps_position() {
        let mut w = single(0.1, -0.2, 0.0);
        w.step(&[ActuatorCommand::new(-5.0, 5.0)]).unwrap();
        let p = w.robots()[0].pose;
        assert!((p.x - 0.1).abs() < 1e-12 && (p.y + 0.2).abs() < 1e-12);
        let expected = 2.0 * 0.05 / 0.053 * 0.1;
        assert!((p.theta - expected).abs() < 1e-9);
    }

    #[test]
    fn wall_contact_without_penetration() {
        // Wall at x = 0.6; the disc edge starts 0.5 cm away.
        let r = 0.035;
        let mut w = single(0.6 - r - 0.005, 0.0, 0.0);
        w.step(&[ActuatorCommand::new(10.0, 10.0)]).unwrap();
        let p = w.robots()[0].pose;
        assert!((p.x - (0.6 - r)).abs() < 1e-9, "x = {}", p.x);
        assert!(p.x <= 0.6 - r + 1e-12);
        assert!(p.y.abs() < 1e-12);
    }

    #[test]
    fn wall_slide_keeps_tangential_component() {
        let r = 0.035;
        let theta = PI / 4.0;
        let mut w = single(0.6 - r, 0.0, theta);
        w.step(&[ActuatorCommand::new(10.0, 10.0)]).unwrap();
        let p = w.robots()[0].pose;
        assert!((p.x - (0.6 - r)).abs() < 1e-9);
        assert!((p.y - 0.01 * theta.sin()).abs() < 1e-9);
    }

    #[test]
    fn robots_block_each_other() {
        let mut w = World::new(
            open_arena(1.2),
            vec![robot(0, -0.036, 0.0, 0.0), robot(1, 0.036, 0.0, PI)],
            SimConfig::noiseless(1),
        )
        .unwrap();
        for _ in 0..5 {
            w.step(&[ActuatorCommand::new(10.0, 10.0), ActuatorCommand::new(10.0, 10.0)]).unwrap();
            w.check_invariants().unwrap();
        }
        let d = w.robots()[1].pose.x - w.robots()[0].pose.x;
        assert!((d - 0.07).abs() < 1e-9);
    }

    #[test]
    fn command_count_mismatch() {
        let mut w = single(0.0, 0.0, 0.0);
        assert_eq!(
            w.step(&[]),
            Err(SimError::CommandCount { expected: 1, got: 0 })
        );
    }

    #[test]
    fn overlapping_start_is_rejected() {
        let r = World::new(
            open_arena(1.2),
            vec![robot(0, 0.0, 0.0, 0.0), robot(1, 0.05, 0.0, 0.0)],
            SimConfig::noiseless(1),
        );
        assert!(matches!(r, Err(SimError::InvalidState(_))));
    }

    #[test]
    fn pseudo_reality_biases_wheels() {
        let mut cfg = SimConfig::noiseless(5);
        cfg.pseudo_reality = true;
        let mut w = World::new(open_arena(1.2), vec![robot(0, 0.0, 0.0, 0.0)], cfg).unwrap();
        w.step(&[ActuatorCommand::new(5.0, 5.0)]).unwrap();
        let p = w.robots()[0].pose;
        let travelled = (p.x * p.x + p.y * p.y).sqrt();
        assert!(travelled > 0.005 * 0.94 && travelled < 0.005 * 1.06);
        assert!(travelled != 0.005 || p.theta != 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn containment_holds_under_random_commands(seed in any::<u64>(), cmds in proptest::collection::vec((-12.0f64..12.0, -12.0f64..12.0), 60)) {
            let specs = vec![PlatformSpec::epuck(); 3];
            let mut arena = open_arena(0.3);
            arena.start_region = Shape::Rectangle { min: Vec2::new(-0.15, -0.15), max: Vec2::new(0.15, 0.15) };
            let robots = crate::sim::place_robots(&arena, &specs, &mut crate::rng::stream(seed, &[1])).unwrap();
            let mut w = World::new(arena, robots, SimConfig { seed, ..SimConfig::default() }).unwrap();
            for (k, &(l, r)) in cmds.iter().enumerate() {
                let c = [ActuatorCommand::new(l, r), ActuatorCommand::new(r, l), ActuatorCommand::new(l, l + (k as f64) * 0.1)];
                let c = c.map(|c| crate::reference::clamp_command(c, &PlatformSpec::epuck()));
                w.step(&c).unwrap();
                prop_assert!(w.check_invariants().is_ok());
            }
        }
    }
}
