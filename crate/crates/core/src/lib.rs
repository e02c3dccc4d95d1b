//! Automatic off-line design of robot-swarm control software and
//! cross-platform transfer experiments.
//!
//! Two design methods produce control software against one shared
//! sensing/actuation contract: a racing-tuned probabilistic finite-state
//! machine ([`fsm`]) and an evolved single-layer network ([`neuro`]). The
//! [`harness`] designs controllers for one platform, evaluates them on both,
//! and summarises the outcome with Friedman rank statistics ([`stats`]).

pub mod config;
pub mod design;
pub mod episode;
pub mod fsm;
pub mod geometry;
pub mod harness;
pub mod missions;
pub mod neuro;
pub mod par;
pub mod reference;
pub mod report;
pub mod rng;
pub mod stats;
pub mod sim;
