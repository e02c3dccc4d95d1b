//! Modular control software: a probabilistic finite-state machine whose
//! states run predefined behaviors and whose transitions fire according to
//! predefined conditions.
//!
//! At most four states, at most four outgoing transitions per state, and the
//! initial state is index 0. Descriptors move between platforms unchanged; at
//! run time the only platform parameter they consult is the top wheel speed.

mod grammar;
mod runtime;
mod sample;

pub use grammar::{parse_fsm, parse_fsm_file, serialize_fsm, serialize_fsm_file, ParseError, ParseErrorKind, FSM_HEADER};
pub use runtime::{behavior_output, condition_probability, steer, BehaviorScratch, FsmRuntime};
pub use sample::{perturb_fsm, sample_behavior, sample_condition, sample_fsm, sample_transition};

use thiserror::Error;

pub const MAX_STATES: usize = 4;
pub const MAX_TRANSITIONS: usize = 4;

pub const RWM_RANGE: (u32, u32) = (1, 100);
pub const ATT_RANGE: (f64, f64) = (1.0, 5.0);
pub const REP_RANGE: (f64, f64) = (1.0, 5.0);
pub const BETA_RANGE: (f64, f64) = (0.0, 1.0);
pub const ETA_RANGE: (f64, f64) = (0.0, 20.0);
pub const XI_RANGE: (u32, u32) = (0, 10);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BehaviorKind {
    Exploration { rwm: u32 },
    Stop,
    Phototaxis,
    AntiPhototaxis,
    Attraction { att: f64 },
    Repulsion { rep: f64 },
}

impl BehaviorKind {
    pub const NAMES: [&'static str; 6] = ["exploration", "stop", "phototaxis", "antiphototaxis", "attraction", "repulsion"];

    pub fn name(&self) -> &'static str {
        match self {
            BehaviorKind::Exploration { .. } => "exploration",
            BehaviorKind::Stop => "stop",
            BehaviorKind::Phototaxis => "phototaxis",
            BehaviorKind::AntiPhototaxis => "antiphototaxis",
            BehaviorKind::Attraction { .. } => "attraction",
            BehaviorKind::Repulsion { .. } => "repulsion",
        }
    }

    pub fn index(&self) -> usize {
        Self::NAMES.iter().position(|n| *n == self.name()).expect("listed")
    }

    fn check(&self) -> Result<(), String> {
        match *self {
            BehaviorKind::Exploration { rwm } if !(RWM_RANGE.0..=RWM_RANGE.1).contains(&rwm) => {
                Err(format!("rwm {rwm} outside [{}, {}]", RWM_RANGE.0, RWM_RANGE.1))
            }
            BehaviorKind::Attraction { att } if !(ATT_RANGE.0..=ATT_RANGE.1).contains(&att) => {
                Err(format!("att {att} outside [{}, {}]", ATT_RANGE.0, ATT_RANGE.1))
            }
            BehaviorKind::Repulsion { rep } if !(REP_RANGE.0..=REP_RANGE.1).contains(&rep) => {
                Err(format!("rep {rep} outside [{}, {}]", REP_RANGE.0, REP_RANGE.1))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConditionKind {
    BlackFloor { beta: f64 },
    GrayFloor { beta: f64 },
    WhiteFloor { beta: f64 },
    NeighborCount { eta: f64, xi: u32 },
    InvertedNeighborCount { eta: f64, xi: u32 },
    FixedProbability { beta: f64 },
}

impl ConditionKind {
    pub const NAMES: [&'static str; 6] = [
        "blackfloor",
        "grayfloor",
        "whitefloor",
        "neighborcount",
        "invertedneighborcount",
        "fixedprobability",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ConditionKind::BlackFloor { .. } => "blackfloor",
            ConditionKind::GrayFloor { .. } => "grayfloor",
            ConditionKind::WhiteFloor { .. } => "whitefloor",
            ConditionKind::NeighborCount { .. } => "neighborcount",
            ConditionKind::InvertedNeighborCount { .. } => "invertedneighborcount",
            ConditionKind::FixedProbability { .. } => "fixedprobability",
        }
    }

    fn check(&self) -> Result<(), String> {
        let beta_ok = |b: f64| (BETA_RANGE.0..=BETA_RANGE.1).contains(&b);
        match *self {
            ConditionKind::BlackFloor { beta }
            | ConditionKind::GrayFloor { beta }
            | ConditionKind::WhiteFloor { beta }
            | ConditionKind::FixedProbability { beta } => {
                if beta_ok(beta) {
                    Ok(())
                } else {
                    Err(format!("beta {beta} outside [0, 1]"))
                }
            }
            ConditionKind::NeighborCount { eta, xi } | ConditionKind::InvertedNeighborCount { eta, xi } => {
                if !(ETA_RANGE.0..=ETA_RANGE.1).contains(&eta) {
                    Err(format!("eta {eta} outside [{}, {}]", ETA_RANGE.0, ETA_RANGE.1))
                } else if !(XI_RANGE.0..=XI_RANGE.1).contains(&xi) {
                    Err(format!("xi {xi} outside [{}, {}]", XI_RANGE.0, XI_RANGE.1))
                } else {
                    Ok(())
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub condition: ConditionKind,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FsmState {
    pub behavior: BehaviorKind,
    pub transitions: Vec<Transition>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FsmDescriptor {
    pub states: Vec<FsmState>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FsmError {
    #[error("an FSM needs 1 to {MAX_STATES} states, got {0}")]
    StateCount(usize),
    #[error("state {state} has {count} transitions, at most {MAX_TRANSITIONS} allowed")]
    TransitionCount { state: usize, count: usize },
    #[error("state {state} transition {transition} targets {target}, which is itself or out of range")]
    BadTarget { state: usize, transition: usize, target: usize },
    #[error("state {state}: {message}")]
    BehaviorParam { state: usize, message: String },
    #[error("state {state} transition {transition}: {message}")]
    ConditionParam { state: usize, transition: usize, message: String },
}

impl FsmDescriptor {
    /// A one-state machine running `behavior` forever.
    pub fn single(behavior: BehaviorKind) -> Self {
        Self {
            states: vec![FsmState {
                behavior,
                transitions: Vec::new(),
            }],
        }
    }

    pub fn validate(&self) -> Result<(), FsmError> {
        let n = self.states.len();
        if n == 0 || n > MAX_STATES {
            return Err(FsmError::StateCount(n));
        }
        for (i, state) in self.states.iter().enumerate() {
            state
                .behavior
                .check()
                .map_err(|message| FsmError::BehaviorParam { state: i, message })?;
            if state.transitions.len() > MAX_TRANSITIONS {
                return Err(FsmError::TransitionCount {
                    state: i,
                    count: state.transitions.len(),
                });
            }
            for (j, t) in state.transitions.iter().enumerate() {
                if t.target == i || t.target >= n {
                    return Err(FsmError::BadTarget {
                        state: i,
                        transition: j,
                        target: t.target,
                    });
                }
                t.condition.check().map_err(|message| FsmError::ConditionParam {
                    state: i,
                    transition: j,
                    message,
                })?;
            }
        }
        Ok(())
    }
}
