//! The shared sensing/actuation contract (reference model RM1.2) and the two
//! platform profiles.
//!
//! Control software only ever sees a [`SensorSnapshot`] and only ever emits an
//! [`ActuatorCommand`]. Both platforms expose the same contract; they differ
//! in physical scale, which lives in [`PlatformSpec`].
//!
//! Angles follow one convention everywhere: 0 rad is the robot heading and
//! positive angles are counterclockwise.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::normalize_angle;

/// Number of proximity rays and of light sensors around the body.
pub const RAY_COUNT: usize = 8;

/// Ray bearings relative to the heading: `k·π/4`, wrapped into `[-π, π]`.
pub fn ray_angles() -> [f64; RAY_COUNT] {
    let mut out = [0.0; RAY_COUNT];
    for (k, a) in out.iter_mut().enumerate() {
        *a = normalize_angle(k as f64 * PI / 4.0);
    }
    out
}

#[derive(Debug, Error, PartialEq)]
pub enum ReferenceError {
    #[error("scale factor must be positive and finite, got {0}")]
    BadScaleFactor(f64),
    #[error("invalid platform spec: {0}")]
    InvalidPlatform(String),
    #[error("invalid sensor snapshot: {0}")]
    InvalidSnapshot(String),
    #[error("platform profile parse error: {0}")]
    ProfileParse(String),
}

/// A reading with magnitude in `[0, 1]` and angle in `[-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PolarVector {
    pub magnitude: f64,
    pub angle: f64,
}

impl PolarVector {
    pub const ZERO: PolarVector = PolarVector { magnitude: 0.0, angle: 0.0 };

    pub fn new(magnitude: f64, angle: f64) -> Self {
        Self { magnitude, angle }
    }

    pub fn x(&self) -> f64 {
        self.magnitude * self.angle.cos()
    }

    pub fn y(&self) -> f64 {
        self.magnitude * self.angle.sin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FloorColor {
    Black,
    Gray,
    White,
}

impl FloorColor {
    pub fn as_str(&self) -> &'static str {
        match self {
            FloorColor::Black => "black",
            FloorColor::Gray => "gray",
            FloorColor::White => "white",
        }
    }
}

/// What control software reads each control cycle.
///
/// `prox`, `light` and `rab` are the aggregated vectors; `prox_rays` and
/// `light_rays` are the per-sensor readings they were built from.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorSnapshot {
    pub prox: PolarVector,
    pub light: PolarVector,
    pub gnd: FloorColor,
    pub neighbors: u32,
    pub rab: PolarVector,
    pub prox_rays: [f64; RAY_COUNT],
    pub light_rays: [f64; RAY_COUNT],
    pub swarm_size: u32,
}

impl SensorSnapshot {
    /// A snapshot with nothing sensed, standing on `gnd`.
    pub fn empty(gnd: FloorColor, swarm_size: u32) -> Self {
        Self {
            prox: PolarVector::ZERO,
            light: PolarVector::ZERO,
            gnd,
            neighbors: 0,
            rab: PolarVector::ZERO,
            prox_rays: [0.0; RAY_COUNT],
            light_rays: [0.0; RAY_COUNT],
            swarm_size,
        }
    }

    pub fn validate(&self) -> Result<(), ReferenceError> {
        let check_vec = |name: &str, v: &PolarVector| -> Result<(), ReferenceError> {
            if !(0.0..=1.0).contains(&v.magnitude) {
                return Err(ReferenceError::InvalidSnapshot(format!(
                    "{name} magnitude {} outside [0,1]",
                    v.magnitude
                )));
            }
            if !(-PI..=PI).contains(&v.angle) {
                return Err(ReferenceError::InvalidSnapshot(format!(
                    "{name} angle {} outside [-pi,pi]",
                    v.angle
                )));
            }
            Ok(())
        };
        check_vec("prox", &self.prox)?;
        check_vec("light", &self.light)?;
        check_vec("rab", &self.rab)?;
        for (name, rays) in [("prox", &self.prox_rays), ("light", &self.light_rays)] {
            if let Some(r) = rays.iter().find(|r| !(0.0..=1.0).contains(*r)) {
                return Err(ReferenceError::InvalidSnapshot(format!("{name} ray reading {r} outside [0,1]")));
            }
        }
        if self.swarm_size == 0 || self.neighbors > self.swarm_size - 1 {
            return Err(ReferenceError::InvalidSnapshot(format!(
                "neighbor count {} outside [0, {}]",
                self.neighbors,
                self.swarm_size.saturating_sub(1)
            )));
        }
        if self.neighbors == 0 && self.rab.magnitude != 0.0 {
            return Err(ReferenceError::InvalidSnapshot(
                "no neighbors but non-zero neighbor vector".into(),
            ));
        }
        Ok(())
    }
}

/// Target wheel speeds in cm/s.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ActuatorCommand {
    pub left: f64,
    pub right: f64,
}

impl ActuatorCommand {
    pub const STOP: ActuatorCommand = ActuatorCommand { left: 0.0, right: 0.0 };

    pub fn new(left: f64, right: f64) -> Self {
        Self { left, right }
    }
}

/// Clip each wheel speed to `[-v_max, v_max]`.
pub fn clamp_command(cmd: ActuatorCommand, spec: &PlatformSpec) -> ActuatorCommand {
    let v = spec.v_max;
    ActuatorCommand {
        left: cmd.left.clamp(-v, v),
        right: cmd.right.clamp(-v, v),
    }
}

/// Vector sum of polar readings divided by the number of readings.
///
/// Empty input, or input whose sum vanishes, gives the zero vector with angle 0.
pub fn aggregate_vector(readings: &[(f64, f64)]) -> PolarVector {
    if readings.is_empty() {
        return PolarVector::ZERO;
    }
    let (sx, sy) = readings.iter().fold((0.0, 0.0), |(sx, sy), &(m, a)| {
        let (s, c) = a.sin_cos();
        (sx + m * c, sy + m * s)
    });
    from_sum(sx, sy, readings.len())
}

/// Same as [`aggregate_vector`] for readings at fixed bearings whose sines and
/// cosines are precomputed.
pub(crate) fn aggregate_fixed(readings: &[f64; RAY_COUNT], sin: &[f64; RAY_COUNT], cos: &[f64; RAY_COUNT]) -> PolarVector {
    let mut sx = 0.0;
    let mut sy = 0.0;
    for k in 0..RAY_COUNT {
        sx += readings[k] * cos[k];
        sy += readings[k] * sin[k];
    }
    from_sum(sx, sy, RAY_COUNT)
}

// Sums below this are rounding residue from cancelling readings.
const CANCEL_EPS: f64 = 1e-12;

fn from_sum(sx: f64, sy: f64, count: usize) -> PolarVector {
    let norm = sx.hypot(sy);
    if norm <= CANCEL_EPS {
        return PolarVector::ZERO;
    }
    PolarVector {
        magnitude: (norm / count as f64).clamp(0.0, 1.0),
        angle: normalize_angle(sy.atan2(sx)),
    }
}

/// Physical parameters of a robot platform. Lengths in cm, speeds in cm/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatformSpec {
    pub name: String,
    pub body_radius: f64,
    pub axle_length: f64,
    pub v_max: f64,
    pub prox_range: f64,
    pub light_range: f64,
    pub rab_range: f64,
    pub control_period: f64,
}

pub const CONTROL_PERIOD: f64 = 0.1;

/// Ratio between the Mercator and e-puck profiles in every length and speed.
pub const MERCATOR_SCALE: f64 = 3.0;

impl PlatformSpec {
    pub fn epuck() -> Self {
        Self {
            name: "epuck".into(),
            body_radius: 3.5,
            axle_length: 5.3,
            v_max: 10.0,
            prox_range: 3.0,
            light_range: 100.0,
            rab_range: 50.0,
            control_period: CONTROL_PERIOD,
        }
    }

    pub fn mercator() -> Self {
        let mut spec = scale_platform(&Self::epuck(), MERCATOR_SCALE).expect("positive factor");
        spec.name = "mercator".into();
        spec
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "epuck" => Some(Self::epuck()),
            "mercator" => Some(Self::mercator()),
            _ => None,
        }
    }

    fn dimensions(&self) -> [(&'static str, f64); 6] {
        [
            ("body_radius", self.body_radius),
            ("axle_length", self.axle_length),
            ("v_max", self.v_max),
            ("prox_range", self.prox_range),
            ("light_range", self.light_range),
            ("rab_range", self.rab_range),
        ]
    }

    pub fn validate(&self) -> Result<(), ReferenceError> {
        for (field, value) in self.dimensions() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ReferenceError::InvalidPlatform(format!("{field} must be positive, got {value}")));
            }
        }
        if !(self.control_period > 0.0) {
            return Err(ReferenceError::InvalidPlatform("control_period must be positive".into()));
        }
        if self.name.is_empty() || self.name.chars().any(|c| c.is_whitespace() || c == '"') {
            return Err(ReferenceError::InvalidPlatform(format!("bad platform name {:?}", self.name)));
        }
        Ok(())
    }

    /// Scale of this platform relative to the e-puck profile, provided every
    /// length and the top speed share one ratio (relative tolerance 1e-9).
    pub fn scale_relative_to_epuck(&self) -> Option<f64> {
        let base = Self::epuck();
        let factor = self.body_radius / base.body_radius;
        let uniform = self
            .dimensions()
            .iter()
            .zip(base.dimensions().iter())
            .all(|(&(_, v), &(_, b))| ((v / b) - factor).abs() <= 1e-9 * factor);
        (uniform && factor.is_finite() && factor > 0.0).then_some(factor)
    }

    /// Human-readable profile text: one `key = value # unit` line per field.
    pub fn to_profile_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "name = \"{}\"", self.name);
        for (field, value) in self.dimensions() {
            let unit = if field == "v_max" { "cm/s" } else { "cm" };
            let _ = writeln!(out, "{field} = {value:?} # {unit}");
        }
        let _ = writeln!(out, "control_period = {:?} # s", self.control_period);
        out
    }

    pub fn from_profile_text(text: &str) -> Result<Self, ReferenceError> {
        let spec: PlatformSpec = toml::from_str(text).map_err(|e| ReferenceError::ProfileParse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Multiply every length and the top speed by `factor`; the control period
/// and the name are kept.
pub fn scale_platform(base: &PlatformSpec, factor: f64) -> Result<PlatformSpec, ReferenceError> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(ReferenceError::BadScaleFactor(factor));
    }
    Ok(PlatformSpec {
        name: base.name.clone(),
        body_radius: base.body_radius * factor,
        axle_length: base.axle_length * factor,
        v_max: base.v_max * factor,
        prox_range: base.prox_range * factor,
        light_range: base.light_range * factor,
        rab_range: base.rab_range * factor,
        control_period: base.control_period,
    })
}
