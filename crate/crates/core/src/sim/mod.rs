//! Deterministic 2D kinematic simulator for a swarm of differential-drive
//! robots, stepped once per control cycle.
//!
//! The simulator works in metres and seconds; platform specs are in
//! centimetres and are converted on the way in. Episodes instead run in
//! body-radius units, see [`frame`].

mod arena;
pub mod frame;
mod place;
mod sense;
mod world;

pub use arena::{ArenaSpec, FloorPatch, GridSpec, Light};
pub use frame::Frame;
pub use place::{place_bodies, place_robots, MAX_PLACEMENT_ATTEMPTS};
pub use world::World;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reference::PlatformSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid arena: {0}")]
    InvalidArena(String),
    #[error("invalid simulator config: {0}")]
    InvalidConfig(String),
    #[error("invalid robot state: {0}")]
    InvalidState(String),
    #[error("expected {expected} actuator commands, got {got}")]
    CommandCount { expected: usize, got: usize },
    #[error("unknown robot id {0}")]
    UnknownRobot(usize),
    #[error("could not place robot {robot} after {attempts} attempts")]
    Placement { robot: usize, attempts: usize },
}

/// Noise and integration settings for one episode.
///
/// Noise standard deviations are fractions of full scale. With
/// `pseudo_reality` both are doubled and each wheel gets a fixed per-episode
/// bias drawn uniformly in ±5%.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub sensor_noise_sd: f64,
    pub actuator_noise_sd: f64,
    pub substeps_per_cycle: u32,
    pub pseudo_reality: bool,
}

pub const PSEUDO_REALITY_NOISE_FACTOR: f64 = 2.0;
pub const PSEUDO_REALITY_WHEEL_BIAS: f64 = 0.05;

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            sensor_noise_sd: 0.05,
            actuator_noise_sd: 0.05,
            substeps_per_cycle: 10,
            pseudo_reality: false,
        }
    }
}

impl SimConfig {
    pub fn noiseless(seed: u64) -> Self {
        Self {
            seed,
            sensor_noise_sd: 0.0,
            actuator_noise_sd: 0.0,
            ..Self::default()
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn effective_sensor_sd(&self) -> f64 {
        if self.pseudo_reality {
            self.sensor_noise_sd * PSEUDO_REALITY_NOISE_FACTOR
        } else {
            self.sensor_noise_sd
        }
    }

    pub fn effective_actuator_sd(&self) -> f64 {
        if self.pseudo_reality {
            self.actuator_noise_sd * PSEUDO_REALITY_NOISE_FACTOR
        } else {
            self.actuator_noise_sd
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.sensor_noise_sd >= 0.0 && self.sensor_noise_sd.is_finite()) {
            return Err(SimError::InvalidConfig("sensor_noise_sd must be >= 0".into()));
        }
        if !(self.actuator_noise_sd >= 0.0 && self.actuator_noise_sd.is_finite()) {
            return Err(SimError::InvalidConfig("actuator_noise_sd must be >= 0".into()));
        }
        if self.substeps_per_cycle == 0 {
            return Err(SimError::InvalidConfig("substeps_per_cycle must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

/// Platform parameters converted to metres, m/s and seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Body {
    pub radius: f64,
    pub axle: f64,
    pub v_max: f64,
    pub prox_range: f64,
    pub light_range: f64,
    pub rab_range: f64,
    pub control_period: f64,
}

const CM: f64 = 0.01;

impl Body {
    pub fn from_spec(spec: &PlatformSpec) -> Self {
        Self {
            radius: spec.body_radius * CM,
            axle: spec.axle_length * CM,
            v_max: spec.v_max * CM,
            prox_range: spec.prox_range * CM,
            light_range: spec.light_range * CM,
            rab_range: spec.rab_range * CM,
            control_period: spec.control_period,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub id: usize,
    pub pose: Pose,
    pub body: Body,
}
