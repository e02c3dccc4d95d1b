use std::f64::consts::FRAC_PI_2;

use rand::Rng;

use crate::geometry::Vec2;
use crate::reference::{clamp_command, ActuatorCommand, FloorColor, PlatformSpec, PolarVector, SensorSnapshot};

use super::{BehaviorKind, ConditionKind, FsmDescriptor};

/// Proximity magnitude above which exploration starts an avoidance turn.
pub const OBSTACLE_THRESHOLD: f64 = 0.1;

/// Per-behavior memory, reset whenever the machine changes state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BehaviorScratch {
    pub turn_remaining: u32,
    pub turn_left: bool,
}

/// Probability that a transition guarded by `kind` fires on this snapshot.
pub fn condition_probability(kind: &ConditionKind, snap: &SensorSnapshot) -> f64 {
    let floor = |color: FloorColor, beta: f64| if snap.gnd == color { beta } else { 0.0 };
    let sigmoid = |eta: f64, xi: u32| 1.0 / (1.0 + (eta * (xi as f64 - snap.neighbors as f64)).exp());
    match *kind {
        ConditionKind::BlackFloor { beta } => floor(FloorColor::Black, beta),
        ConditionKind::GrayFloor { beta } => floor(FloorColor::Gray, beta),
        ConditionKind::WhiteFloor { beta } => floor(FloorColor::White, beta),
        ConditionKind::FixedProbability { beta } => beta,
        ConditionKind::NeighborCount { eta, xi } => sigmoid(eta, xi),
        ConditionKind::InvertedNeighborCount { eta, xi } => 1.0 - sigmoid(eta, xi),
    }
}

/// Map a target direction (relative to the heading) to wheel speeds:
/// `left = v_max·clip(cos δ − sin δ)`, `right = v_max·clip(cos δ + sin δ)`.
pub fn steer(direction: f64, v_max: f64) -> ActuatorCommand {
    let (s, c) = direction.sin_cos();
    ActuatorCommand {
        left: v_max * (c - s).clamp(-1.0, 1.0),
        right: v_max * (c + s).clamp(-1.0, 1.0),
    }
}

fn as_vec(p: &PolarVector) -> Vec2 {
    Vec2::from_polar(p.magnitude, p.angle)
}

fn steer_or_straight(target: Vec2, prox: Vec2, v_max: f64) -> ActuatorCommand {
    let w = target - prox;
    if w.norm() == 0.0 {
        ActuatorCommand::new(v_max, v_max)
    } else {
        steer(w.angle(), v_max)
    }
}

/// Wheel command for one behavior. Reads only `spec.v_max`.
pub fn behavior_output(
    kind: &BehaviorKind,
    scratch: &mut BehaviorScratch,
    snap: &SensorSnapshot,
    spec: &PlatformSpec,
    rng: &mut impl Rng,
) -> ActuatorCommand {
    let v_max = spec.v_max;
    let straight = ActuatorCommand::new(v_max, v_max);
    let prox = as_vec(&snap.prox);
    match *kind {
        BehaviorKind::Stop => ActuatorCommand::STOP,
        BehaviorKind::Exploration { rwm } => {
            if scratch.turn_remaining == 0
                && snap.prox.magnitude > OBSTACLE_THRESHOLD
                && snap.prox.angle.abs() < FRAC_PI_2
            {
                scratch.turn_remaining = rng.random_range(0..=rwm);
                scratch.turn_left = snap.prox.angle < 0.0;
            }
            if scratch.turn_remaining > 0 {
                scratch.turn_remaining -= 1;
                if scratch.turn_left {
                    ActuatorCommand::new(-v_max, v_max)
                } else {
                    ActuatorCommand::new(v_max, -v_max)
                }
            } else {
                straight
            }
        }
        BehaviorKind::Phototaxis | BehaviorKind::AntiPhototaxis => {
            if snap.light.magnitude == 0.0 {
                return straight;
            }
            let toward = Vec2::from_polar(1.0, snap.light.angle);
            let target = if matches!(kind, BehaviorKind::Phototaxis) { toward } else { -toward };
            steer_or_straight(target, prox, v_max)
        }
        BehaviorKind::Attraction { att } => {
            if snap.rab.magnitude == 0.0 {
                return straight;
            }
            steer_or_straight(as_vec(&snap.rab) * att, prox, v_max)
        }
        BehaviorKind::Repulsion { rep } => {
            if snap.rab.magnitude == 0.0 {
                return straight;
            }
            steer_or_straight(as_vec(&snap.rab) * -rep, prox, v_max)
        }
    }
}

/// Execution state of one robot's machine.
#[derive(Debug, Clone)]
pub struct FsmRuntime<'a> {
    descriptor: &'a FsmDescriptor,
    current: usize,
    scratch: BehaviorScratch,
}

impl<'a> FsmRuntime<'a> {
    pub fn new(descriptor: &'a FsmDescriptor) -> Self {
        Self {
            descriptor,
            current: 0,
            scratch: BehaviorScratch::default(),
        }
    }

    pub fn current_state(&self) -> usize {
        self.current
    }

    /// One control cycle: evaluate the current state's transitions in order
    /// (first to fire wins), then run the active behavior.
    pub fn tick(&mut self, snap: &SensorSnapshot, spec: &PlatformSpec, rng: &mut impl Rng) -> ActuatorCommand {
        let state = &self.descriptor.states[self.current];
        for t in &state.transitions {
            let p = condition_probability(&t.condition, snap);
            if rng.random::<f64>() < p {
                self.current = t.target;
                self.scratch = BehaviorScratch::default();
                break;
            }
        }
        let behavior = self.descriptor.states[self.current].behavior;
        let cmd = behavior_output(&behavior, &mut self.scratch, snap, spec, rng);
        clamp_command(cmd, spec)
    }
}
