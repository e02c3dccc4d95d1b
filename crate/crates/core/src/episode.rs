//! Running one controller on one mission for one seed.

use std::path::Path;

use thiserror::Error;

use crate::fsm::{parse_fsm_file, serialize_fsm_file, FsmDescriptor, FsmRuntime, ParseError, FSM_HEADER};
use crate::missions::{build_arena, objective, EpisodeTrace, MissionError, MissionSpec, TraceRecorder};
use crate::neuro::{ann_inputs, forward, Genome, NeuroError, ANN_HEADER};
use crate::reference::{clamp_command, ActuatorCommand, PlatformSpec};
use crate::rng::{purpose, stream, StreamRng};
use crate::sim::{place_bodies, Body, Frame, SimConfig, SimError, World};

#[derive(Debug, Error)]
pub enum EpisodeError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Mission(#[from] MissionError),
    #[error("controller is invalid: {0}")]
    Controller(String),
}

#[derive(Debug, Error)]
pub enum ControllerFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unrecognised controller file: expected a `{FSM_HEADER}` or `{ANN_HEADER}` header")]
    UnknownFormat,
    #[error(transparent)]
    Fsm(#[from] ParseError),
    #[error(transparent)]
    Ann(#[from] NeuroError),
}

/// Either kind of control software.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlSoftware {
    Fsm(FsmDescriptor),
    Ann(Genome),
}

impl ControlSoftware {
    pub fn file_extension(&self) -> &'static str {
        match self {
            ControlSoftware::Fsm(_) => "fsm",
            ControlSoftware::Ann(_) => "ann",
        }
    }

    pub fn to_file_text(&self) -> String {
        match self {
            ControlSoftware::Fsm(d) => serialize_fsm_file(d),
            ControlSoftware::Ann(g) => g.to_file_text(),
        }
    }

    /// Parse either file format, chosen by the header line.
    pub fn from_file_text(text: &str) -> Result<Self, ControllerFileError> {
        let first = text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
        if first == FSM_HEADER {
            Ok(ControlSoftware::Fsm(parse_fsm_file(text)?))
        } else if first == ANN_HEADER {
            Ok(ControlSoftware::Ann(Genome::from_file_text(text)?))
        } else {
            Err(ControllerFileError::UnknownFormat)
        }
    }

    pub fn read(path: &Path) -> Result<Self, ControllerFileError> {
        let text = std::fs::read_to_string(path).map_err(|source| ControllerFileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_file_text(&text)
    }
}

enum Runner<'a> {
    Fsm(Vec<FsmRuntime<'a>>),
    Ann(&'a Genome),
}

/// Simulate a full episode and keep its trace.
///
/// `seed` fixes robot placement, sensor and actuator noise and every random
/// draw the controller makes. The simulator's own seed in `sim` is replaced.
///
/// The world runs in [`Frame`] units with controllers commanding fractions
/// of top speed; the trace is converted back to metres.
pub fn run_episode(
    ctrl: &ControlSoftware,
    mission: &MissionSpec,
    spec: &PlatformSpec,
    sim: &SimConfig,
    seed: u64,
) -> Result<EpisodeTrace, EpisodeError> {
    mission.validate()?;
    if let ControlSoftware::Fsm(d) = ctrl {
        d.validate().map_err(|e| EpisodeError::Controller(e.to_string()))?;
    }
    spec.validate().map_err(|e| EpisodeError::Sim(SimError::InvalidState(e.to_string())))?;
    let arena = build_arena(mission, spec)?;
    let body = Body::from_spec(spec);
    let frame = Frame::for_body(&body);
    let inner_body = frame.body(&body);
    let n = mission.swarm_size;
    let robots = place_bodies(
        &frame.arena(&arena),
        &vec![inner_body; n],
        &mut stream(seed, &[purpose::PLACEMENT]),
    )?;
    let config = SimConfig { seed, ..*sim };
    let cycles = mission.cycles();
    let mut recorder = TraceRecorder::new(mission.id, arena.clone(), n, cycles);
    let mut world = World::new(frame.arena(&arena), robots, config)?.with_command_scale(inner_body.v_max);

    // Controllers only read v_max from the spec; at 1 they emit fractions.
    let unit_spec = PlatformSpec {
        v_max: 1.0,
        ..spec.clone()
    };
    let mut rngs: Vec<StreamRng> = (0..n)
        .map(|id| stream(seed, &[purpose::CONTROLLER, id as u64]))
        .collect();
    let mut runner = match ctrl {
        ControlSoftware::Fsm(d) => Runner::Fsm((0..n).map(|_| FsmRuntime::new(d)).collect()),
        ControlSoftware::Ann(g) => Runner::Ann(g),
    };
    let mut commands = vec![ActuatorCommand::STOP; n];
    for _ in 0..cycles {
        for id in 0..n {
            let snap = world.sense(id)?;
            commands[id] = match &mut runner {
                Runner::Fsm(runtimes) => runtimes[id].tick(&snap, &unit_spec, &mut rngs[id]),
                Runner::Ann(g) => clamp_command(forward(g, &ann_inputs(&snap), &unit_spec), &unit_spec),
            };
        }
        world.step(&commands)?;
        recorder.push_scaled(world.robots(), frame.unit);
    }
    Ok(recorder.finish())
}

/// Score of one episode: the mission objective of its trace.
pub fn evaluate(
    ctrl: &ControlSoftware,
    mission: &MissionSpec,
    spec: &PlatformSpec,
    sim: &SimConfig,
    seed: u64,
) -> Result<f64, EpisodeError> {
    Ok(objective(&run_episode(ctrl, mission, spec, sim, seed)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fsm::{parse_fsm, BehaviorKind};
    use crate::missions::{MissionId, StartPlacement};

    fn stop() -> ControlSoftware {
        ControlSoftware::Fsm(FsmDescriptor::single(BehaviorKind::Stop))
    }

    #[test]
    fn stop_on_the_spot_scores_one() {
        let m = MissionSpec {
            start: StartPlacement::OnTarget,
            ..MissionSpec::new(MissionId::Aggregation)
        };
        for seed in 0..3 {
            let s = evaluate(&stop(), &m, &PlatformSpec::epuck(), &SimConfig::default(), seed).unwrap();
            assert_eq!(s, 1.0);
        }
    }

    #[test]
    fn stop_never_forages() {
        let m = MissionSpec::new(MissionId::Foraging);
        let s = evaluate(&stop(), &m, &PlatformSpec::epuck(), &SimConfig::default(), 4).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn episodes_are_reproducible() {
        let ctrl = ControlSoftware::Fsm(
            parse_fsm("--nstates 2 --s0 exploration --rwm0 20 --n0 1 --n0x0 1 --c0x0 fixedprobability --p0x0 0.05 --s1 attraction --att1 3 --n1 1 --n1x0 0 --c1x0 fixedprobability --p1x0 0.05")
                .unwrap(),
        );
        let m = MissionSpec::new(MissionId::GridExploration);
        let a = run_episode(&ctrl, &m, &PlatformSpec::epuck(), &SimConfig::default(), 11).unwrap();
        let b = run_episode(&ctrl, &m, &PlatformSpec::epuck(), &SimConfig::default(), 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cycles(), 1200);
        assert_eq!(a.records.len(), 3600);
        let c = run_episode(&ctrl, &m, &PlatformSpec::epuck(), &SimConfig::default(), 12).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn recorded_carrying_matches_reconstruction() {
        let g = Genome::random(&mut stream(8, &[]));
        let m = MissionSpec::new(MissionId::Foraging);
        let t = run_episode(&ControlSoftware::Ann(g), &m, &PlatformSpec::epuck(), &SimConfig::default(), 3).unwrap();
        let (flags, _) = crate::missions::foraging_flags(&t);
        assert_eq!(flags, t.records.iter().map(|r| r.carrying).collect::<Vec<_>>());
    }

    #[test]
    fn controller_files_by_header() {
        let f = stop();
        assert_eq!(ControlSoftware::from_file_text(&f.to_file_text()).unwrap(), f);
        let a = ControlSoftware::Ann(Genome::zeros());
        assert_eq!(ControlSoftware::from_file_text(&a.to_file_text()).unwrap(), a);
        assert!(matches!(
            ControlSoftware::from_file_text("hello\n"),
            Err(ControllerFileError::UnknownFormat)
        ));
        assert!(matches!(
            ControlSoftware::from_file_text("# fsm-v1\n--nstates 0\n"),
            Err(ControllerFileError::Fsm(_))
        ));
    }
}
