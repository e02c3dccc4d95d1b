//! The three missions: arena layouts, episode traces and objective functions.
//!
//! Arenas are laid out for the e-puck and scaled by the platform's size ratio,
//! so a Mercator gets the same arena three times larger. Objectives depend
//! only on region membership and time, never on absolute lengths.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Shape, Vec2};
use crate::reference::{FloorColor, PlatformSpec, CONTROL_PERIOD};
use crate::sim::{ArenaSpec, FloorPatch, GridSpec, Light, RobotState};

pub const DEFAULT_DURATION: f64 = 120.0;
pub const DEFAULT_SWARM_SIZE: usize = 3;

#[derive(Debug, Error)]
pub enum MissionError {
    #[error("unknown mission `{0}`")]
    UnknownMission(String),
    #[error("platform `{0}` is not a uniform scaling of the e-puck")]
    UnsupportedPlatform(String),
    #[error("invalid mission spec: {0}")]
    InvalidSpec(String),
    #[error("trace belongs to {found}, expected {expected}")]
    WrongMission { expected: MissionId, found: MissionId },
    #[error("malformed trace: {0}")]
    Trace(String),
    #[error("trace csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissionId {
    Aggregation,
    Foraging,
    GridExploration,
}

impl MissionId {
    pub const ALL: [MissionId; 3] = [MissionId::Aggregation, MissionId::Foraging, MissionId::GridExploration];

    pub fn name(&self) -> &'static str {
        match self {
            MissionId::Aggregation => "aggregation",
            MissionId::Foraging => "foraging",
            MissionId::GridExploration => "grid-exploration",
        }
    }
}

impl fmt::Display for MissionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MissionId {
    type Err = MissionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "aggregation" => Ok(MissionId::Aggregation),
            "foraging" => Ok(MissionId::Foraging),
            "grid-exploration" | "gridexploration" => Ok(MissionId::GridExploration),
            _ => Err(MissionError::UnknownMission(s.to_string())),
        }
    }
}

/// Where robots start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StartPlacement {
    /// The mission's regular start region.
    #[default]
    Default,
    /// On the scoring region: the black spot for aggregation, the first
    /// black spot for foraging. Grid exploration has no such region and
    /// keeps its regular start.
    OnTarget,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MissionSpec {
    pub id: MissionId,
    pub duration: f64,
    pub swarm_size: usize,
    pub start: StartPlacement,
}

impl MissionSpec {
    pub fn new(id: MissionId) -> Self {
        Self {
            id,
            duration: DEFAULT_DURATION,
            swarm_size: DEFAULT_SWARM_SIZE,
            start: StartPlacement::Default,
        }
    }

    pub fn validate(&self) -> Result<(), MissionError> {
        let ratio = self.duration / CONTROL_PERIOD;
        if !(self.duration > 0.0 && self.duration.is_finite()) || (ratio - ratio.round()).abs() > 1e-6 {
            return Err(MissionError::InvalidSpec(format!(
                "duration {} s is not a positive multiple of {CONTROL_PERIOD} s",
                self.duration
            )));
        }
        if self.swarm_size == 0 {
            return Err(MissionError::InvalidSpec("swarm size must be at least 1".into()));
        }
        Ok(())
    }

    pub fn cycles(&self) -> usize {
        (self.duration / CONTROL_PERIOD).round() as usize
    }
}

const AGGREGATION_SIDE: f64 = 1.2;
const AGGREGATION_SPOT_RADIUS: f64 = 0.3;
const FORAGING_SIDE: f64 = 1.2;
const FORAGING_NEST_DEPTH: f64 = 0.3;
const FORAGING_SPOT_RADIUS: f64 = 0.15;
const FORAGING_SPOTS: [Vec2; 2] = [Vec2::new(-0.3, 0.4), Vec2::new(0.3, 0.4)];
const GRID_SIDE: f64 = 1.5;
const GRID_CELLS: usize = 5;

fn base_arena(mission: &MissionSpec) -> ArenaSpec {
    match mission.id {
        MissionId::Aggregation => {
            let spot = Shape::Circle {
                center: Vec2::ZERO,
                radius: AGGREGATION_SPOT_RADIUS,
            };
            let h = AGGREGATION_SIDE / 2.0;
            ArenaSpec {
                bounds: ArenaSpec::square_bounds(AGGREGATION_SIDE),
                default_floor: FloorColor::Gray,
                floor_patches: vec![FloorPatch {
                    shape: spot.clone(),
                    color: FloorColor::Black,
                }],
                lights: vec![],
                grid: None,
                start_region: match mission.start {
                    StartPlacement::Default => Shape::Rectangle {
                        min: Vec2::new(-h, -h),
                        max: Vec2::new(h, h),
                    },
                    StartPlacement::OnTarget => spot,
                },
            }
        }
        MissionId::Foraging => {
            let h = FORAGING_SIDE / 2.0;
            let nest = Shape::Rectangle {
                min: Vec2::new(-h, -h),
                max: Vec2::new(h, -h + FORAGING_NEST_DEPTH),
            };
            let spots: Vec<Shape> = FORAGING_SPOTS
                .iter()
                .map(|&center| Shape::Circle {
                    center,
                    radius: FORAGING_SPOT_RADIUS,
                })
                .collect();
            let mut patches = vec![FloorPatch {
                shape: nest.clone(),
                color: FloorColor::White,
            }];
            patches.extend(spots.iter().map(|shape| FloorPatch {
                shape: shape.clone(),
                color: FloorColor::Black,
            }));
            ArenaSpec {
                bounds: ArenaSpec::square_bounds(FORAGING_SIDE),
                default_floor: FloorColor::Gray,
                floor_patches: patches,
                lights: vec![Light {
                    position: Vec2::new(0.0, -h + FORAGING_NEST_DEPTH / 2.0),
                    intensity: 1.0,
                }],
                grid: None,
                start_region: match mission.start {
                    StartPlacement::Default => nest,
                    StartPlacement::OnTarget => spots[0].clone(),
                },
            }
        }
        MissionId::GridExploration => {
            let cell = GRID_SIDE / GRID_CELLS as f64;
            ArenaSpec {
                bounds: ArenaSpec::square_bounds(GRID_SIDE),
                default_floor: FloorColor::Gray,
                floor_patches: vec![],
                lights: vec![],
                grid: Some(GridSpec {
                    rows: GRID_CELLS,
                    cols: GRID_CELLS,
                }),
                start_region: Shape::Rectangle {
                    min: Vec2::new(-cell / 2.0, -cell / 2.0),
                    max: Vec2::new(cell / 2.0, cell / 2.0),
                },
            }
        }
    }
}

/// The mission arena for `spec`, scaled from the e-puck layout.
pub fn build_arena(mission: &MissionSpec, spec: &PlatformSpec) -> Result<ArenaSpec, MissionError> {
    let factor = spec
        .scale_relative_to_epuck()
        .ok_or_else(|| MissionError::UnsupportedPlatform(spec.name.clone()))?;
    let base = base_arena(mission);
    Ok(if factor == 1.0 { base } else { base.scaled(factor) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotRecord {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub gnd: FloorColor,
    pub carrying: bool,
}

/// Everything an objective needs from one episode. Records are stored
/// cycle-major: one record per robot after each control cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTrace {
    pub mission: MissionId,
    pub arena: ArenaSpec,
    pub swarm_size: usize,
    pub records: Vec<RobotRecord>,
    /// Grid exploration only: last-visit time (s) of every cell after each
    /// cycle, cycle-major.
    pub cell_last_visit: Vec<f64>,
}

impl EpisodeTrace {
    pub fn cycles(&self) -> usize {
        if self.swarm_size == 0 {
            0
        } else {
            self.records.len() / self.swarm_size
        }
    }

    pub fn cycle(&self, c: usize) -> &[RobotRecord] {
        &self.records[c * self.swarm_size..(c + 1) * self.swarm_size]
    }

    fn check(&self, expected: MissionId) -> Result<(), MissionError> {
        if self.mission != expected {
            return Err(MissionError::WrongMission {
                expected,
                found: self.mission,
            });
        }
        if self.swarm_size == 0 || !self.records.len().is_multiple_of(self.swarm_size) {
            return Err(MissionError::Trace("record count is not a multiple of the swarm size".into()));
        }
        Ok(())
    }

    /// Write `time,robot_id,x,y,theta,gnd,carrying` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), MissionError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time", "robot_id", "x", "y", "theta", "gnd", "carrying"])?;
        for c in 0..self.cycles() {
            let t = format!("{:?}", cycle_time(c));
            for (id, r) in self.cycle(c).iter().enumerate() {
                w.write_record([
                    t.clone(),
                    id.to_string(),
                    format!("{:?}", r.x),
                    format!("{:?}", r.y),
                    format!("{:?}", r.theta),
                    r.gnd.as_str().to_string(),
                    u8::from(r.carrying).to_string(),
                ])?;
            }
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Rebuild a trace from its CSV form for offline re-scoring.
    pub fn read_csv<R: Read>(input: R, mission: MissionId, arena: ArenaSpec) -> Result<Self, MissionError> {
        #[derive(Deserialize)]
        struct Row {
            time: f64,
            robot_id: usize,
            x: f64,
            y: f64,
            theta: f64,
            gnd: String,
            carrying: u8,
        }
        let mut rows = Vec::new();
        for row in csv::Reader::from_reader(input).deserialize() {
            rows.push(row?);
        }
        let rows: Vec<Row> = rows;
        let swarm_size = rows.iter().map(|r| r.robot_id + 1).max().unwrap_or(0);
        if swarm_size == 0 || !rows.len().is_multiple_of(swarm_size) {
            return Err(MissionError::Trace("rows do not form complete cycles".into()));
        }
        let mut records = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let c = i / swarm_size;
            if row.robot_id != i % swarm_size || (row.time - cycle_time(c)).abs() > 1e-9 {
                return Err(MissionError::Trace(format!("row {} is out of order", i + 1)));
            }
            let gnd = match row.gnd.as_str() {
                "black" => FloorColor::Black,
                "gray" => FloorColor::Gray,
                "white" => FloorColor::White,
                other => return Err(MissionError::Trace(format!("unknown floor color `{other}`"))),
            };
            records.push(RobotRecord {
                x: row.x,
                y: row.y,
                theta: row.theta,
                gnd,
                carrying: row.carrying != 0,
            });
        }
        let mut trace = EpisodeTrace {
            mission,
            arena,
            swarm_size,
            records,
            cell_last_visit: Vec::new(),
        };
        if mission == MissionId::GridExploration {
            trace.cell_last_visit = last_visits(&trace);
        }
        Ok(trace)
    }
}

/// Time (s) of the record taken after cycle index `c`.
fn cycle_time(c: usize) -> f64 {
    (c + 1) as f64 * CONTROL_PERIOD
}

fn on_black(arena: &ArenaSpec, r: &RobotRecord) -> bool {
    arena.floor_at(Vec2::new(r.x, r.y)) == FloorColor::Black
}

fn on_white(arena: &ArenaSpec, r: &RobotRecord) -> bool {
    arena.floor_at(Vec2::new(r.x, r.y)) == FloorColor::White
}

/// Builds a trace while an episode runs.
#[derive(Debug)]
pub struct TraceRecorder {
    trace: EpisodeTrace,
    carrying: Vec<bool>,
    last_visit: Vec<f64>,
    cycle: usize,
}

impl TraceRecorder {
    pub fn new(mission: MissionId, arena: ArenaSpec, swarm_size: usize, cycles: usize) -> Self {
        let cells = arena.cell_count();
        let grid = mission == MissionId::GridExploration;
        Self {
            carrying: vec![false; swarm_size],
            last_visit: vec![0.0; if grid { cells } else { 0 }],
            trace: EpisodeTrace {
                mission,
                arena,
                swarm_size,
                records: Vec::with_capacity(swarm_size * cycles),
                cell_last_visit: Vec::with_capacity(if grid { cells * cycles } else { 0 }),
            },
            cycle: 0,
        }
    }

    /// Record the robots' state after one control cycle.
    pub fn push(&mut self, robots: &[RobotState]) {
        self.push_scaled(robots, 1.0);
    }

    /// As [`push`](Self::push) for robots whose positions are in units of
    /// `unit` metres.
    pub fn push_scaled(&mut self, robots: &[RobotState], unit: f64) {
        let t = cycle_time(self.cycle);
        let arena = &self.trace.arena;
        for (id, robot) in robots.iter().enumerate() {
            let p = Vec2::new(robot.pose.x * unit, robot.pose.y * unit);
            let gnd = arena.floor_at(p);
            if self.trace.mission == MissionId::Foraging {
                if !self.carrying[id] && gnd == FloorColor::Black {
                    self.carrying[id] = true;
                } else if self.carrying[id] && gnd == FloorColor::White {
                    self.carrying[id] = false;
                }
            }
            if !self.last_visit.is_empty() {
                if let Some(cell) = arena.grid_cell(p) {
                    self.last_visit[cell] = t;
                }
            }
            self.trace.records.push(RobotRecord {
                x: p.x,
                y: p.y,
                theta: robot.pose.theta,
                gnd,
                carrying: self.carrying[id],
            });
        }
        self.trace.cell_last_visit.extend_from_slice(&self.last_visit);
        self.cycle += 1;
    }

    pub fn finish(self) -> EpisodeTrace {
        self.trace
    }
}

pub fn objective(trace: &EpisodeTrace) -> Result<f64, MissionError> {
    match trace.mission {
        MissionId::Aggregation => objective_aggregation(trace),
        MissionId::Foraging => objective_foraging(trace),
        MissionId::GridExploration => objective_exploration(trace),
    }
}

/// Fraction of (robot, cycle) pairs with the robot's center on black.
pub fn objective_aggregation(trace: &EpisodeTrace) -> Result<f64, MissionError> {
    trace.check(MissionId::Aggregation)?;
    if trace.records.is_empty() {
        return Ok(0.0);
    }
    let on = trace.records.iter().filter(|r| on_black(&trace.arena, r)).count();
    Ok(on as f64 / trace.records.len() as f64)
}

/// Per-robot carrying flags rebuilt from positions alone.
pub fn foraging_flags(trace: &EpisodeTrace) -> (Vec<bool>, u64) {
    let mut carrying = vec![false; trace.swarm_size];
    let mut flags = Vec::with_capacity(trace.records.len());
    let mut deliveries = 0;
    for (i, r) in trace.records.iter().enumerate() {
        let id = i % trace.swarm_size;
        if !carrying[id] && on_black(&trace.arena, r) {
            carrying[id] = true;
        } else if carrying[id] && on_white(&trace.arena, r) {
            carrying[id] = false;
            deliveries += 1;
        }
        flags.push(carrying[id]);
    }
    (flags, deliveries)
}

/// Swarm-total deliveries: black spot, then white region, per robot.
pub fn objective_foraging(trace: &EpisodeTrace) -> Result<f64, MissionError> {
    trace.check(MissionId::Foraging)?;
    Ok(foraging_flags(trace).1 as f64)
}

fn last_visits(trace: &EpisodeTrace) -> Vec<f64> {
    let cells = trace.arena.cell_count();
    let mut last = vec![0.0; cells];
    let mut out = Vec::with_capacity(cells * trace.cycles());
    for c in 0..trace.cycles() {
        let t = cycle_time(c);
        for r in trace.cycle(c) {
            if let Some(cell) = trace.arena.grid_cell(Vec2::new(r.x, r.y)) {
                last[cell] = t;
            }
        }
        out.extend_from_slice(&last);
    }
    out
}

/// Minus the mean age over cells and cycles, where a cell's age is the time
/// since a robot center was last inside it (counted from the episode start
/// for cells not yet visited).
pub fn objective_exploration(trace: &EpisodeTrace) -> Result<f64, MissionError> {
    trace.check(MissionId::GridExploration)?;
    let cells = trace.arena.cell_count();
    if cells == 0 {
        return Err(MissionError::Trace("grid exploration arena has no grid".into()));
    }
    let cycles = trace.cycles();
    if cycles == 0 {
        return Ok(0.0);
    }
    let last = last_visits(trace);
    let mut total = 0.0;
    for c in 0..cycles {
        let t = cycle_time(c);
        total += last[c * cells..(c + 1) * cells].iter().map(|l| t - l).sum::<f64>();
    }
    Ok(-(total / (cells * cycles) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(mission: MissionId, arena: ArenaSpec, positions: &[Vec<(f64, f64)>]) -> EpisodeTrace {
        let n = positions[0].len();
        let mut rec = TraceRecorder::new(mission, arena, n, positions.len());
        for cycle in positions {
            let robots: Vec<RobotState> = cycle
                .iter()
                .enumerate()
                .map(|(id, &(x, y))| RobotState {
                    id,
                    pose: crate::sim::Pose { x, y, theta: 0.0 },
                    body: crate::sim::Body::from_spec(&PlatformSpec::epuck()),
                })
                .collect();
            rec.push(&robots);
        }
        rec.finish()
    }

    fn epuck_arena(id: MissionId) -> ArenaSpec {
        build_arena(&MissionSpec::new(id), &PlatformSpec::epuck()).unwrap()
    }

    #[test]
    fn aggregation_arenas() {
        let e = epuck_arena(MissionId::Aggregation);
        assert_eq!(e.bounding_box(), (Vec2::new(-0.6, -0.6), Vec2::new(0.6, 0.6)));
        assert_eq!(
            e.floor_patches[0].shape,
            Shape::Circle {
                center: Vec2::ZERO,
                radius: 0.3
            }
        );
        let m = build_arena(&MissionSpec::new(MissionId::Aggregation), &PlatformSpec::mercator()).unwrap();
        let (lo, hi) = m.bounding_box();
        assert!((hi.x - lo.x - 3.6).abs() < 1e-12);
        match m.floor_patches[0].shape {
            Shape::Circle { radius, .. } => assert!((radius - 0.9).abs() < 1e-12),
            _ => panic!("spot should be a circle"),
        }
        let mut odd = PlatformSpec::epuck();
        odd.v_max = 7.0;
        assert!(build_arena(&MissionSpec::new(MissionId::Aggregation), &odd).is_err());
    }

    #[test]
    fn every_arena_validates() {
        for id in MissionId::ALL {
            for start in [StartPlacement::Default, StartPlacement::OnTarget] {
                for spec in [PlatformSpec::epuck(), PlatformSpec::mercator()] {
                    let m = MissionSpec { start, ..MissionSpec::new(id) };
                    build_arena(&m, &spec).unwrap().validate().unwrap();
                }
            }
        }
    }

    #[test]
    fn foraging_layout() {
        let a = epuck_arena(MissionId::Foraging);
        assert_eq!(a.floor_at(Vec2::new(0.0, -0.5)), FloorColor::White);
        assert_eq!(a.floor_at(Vec2::new(0.3, 0.4)), FloorColor::Black);
        assert_eq!(a.floor_at(Vec2::new(-0.3, 0.4)), FloorColor::Black);
        assert_eq!(a.floor_at(Vec2::new(0.0, 0.0)), FloorColor::Gray);
        assert!((a.lights[0].position - Vec2::new(0.0, -0.45)).norm() < 1e-12);
    }

    #[test]
    fn grid_tiles_bounds() {
        let a = epuck_arena(MissionId::GridExploration);
        let cells = a.grid_cells();
        assert_eq!(cells.len(), 25);
        let area: f64 = cells
            .iter()
            .map(|c| match c {
                Shape::Rectangle { min, max } => (max.x - min.x) * (max.y - min.y),
                _ => unreachable!(),
            })
            .sum();
        assert!((area - 1.5 * 1.5).abs() < 1e-12);
        assert_eq!(a.grid_cell(Vec2::ZERO), Some(12));
    }

    #[test]
    fn aggregation_bounds_and_count() {
        let a = epuck_arena(MissionId::Aggregation);
        let on = vec![vec![(0.0, 0.0), (0.1, 0.0), (0.0, 0.1)]; 10];
        assert_eq!(objective_aggregation(&trace(MissionId::Aggregation, a.clone(), &on)).unwrap(), 1.0);
        let off = vec![vec![(0.5, 0.5), (-0.5, 0.5), (0.5, -0.5)]; 10];
        assert_eq!(objective_aggregation(&trace(MissionId::Aggregation, a.clone(), &off)).unwrap(), 0.0);
        let half: Vec<Vec<(f64, f64)>> = (0..10)
            .map(|c| vec![if c < 5 { (0.0, 0.0) } else { (0.5, 0.5) }, (-0.5, 0.5), (0.5, -0.5)])
            .collect();
        let v = objective_aggregation(&trace(MissionId::Aggregation, a, &half)).unwrap();
        assert!((v - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn foraging_counts_round_trips() {
        let a = epuck_arena(MissionId::Foraging);
        let nest = (0.0, -0.5);
        let spot = (0.3, 0.4);
        let gray = (0.0, 0.0);
        let path = [nest, gray, spot, spot, gray, nest, nest, gray, spot, gray, spot, nest];
        let positions: Vec<Vec<(f64, f64)>> = path.iter().map(|&p| vec![p, nest]).collect();
        let t = trace(MissionId::Foraging, a.clone(), &positions);
        assert_eq!(objective_foraging(&t).unwrap(), 2.0);
        let (flags, _) = foraging_flags(&t);
        let recorded: Vec<bool> = t.records.iter().map(|r| r.carrying).collect();
        assert_eq!(flags, recorded);

        let idle: Vec<Vec<(f64, f64)>> = vec![vec![nest, nest]; 20];
        assert_eq!(objective_foraging(&trace(MissionId::Foraging, a, &idle)).unwrap(), 0.0);
    }

    #[test]
    fn exploration_degenerate_and_stationary() {
        let mut one = epuck_arena(MissionId::GridExploration);
        one.grid = Some(GridSpec { rows: 1, cols: 1 });
        let t = trace(MissionId::GridExploration, one, &vec![vec![(0.0, 0.0)]; 50]);
        assert_eq!(objective_exploration(&t).unwrap(), 0.0);

        let a = epuck_arena(MissionId::GridExploration);
        let cycles = 1200;
        let t = trace(MissionId::GridExploration, a, &vec![vec![(0.0, 0.0); 3]; cycles]);
        let v = objective_exploration(&t).unwrap();
        // Unvisited cells have age c·0.1 after cycle c; the mean over c = 1..C is 0.1·(C+1)/2.
        let expect = -(24.0 / 25.0) * 0.1 * (cycles as f64 + 1.0) / 2.0;
        assert!((v - expect).abs() < 1e-9, "{v} vs {expect}");
        assert!((v + (24.0 / 25.0) * 60.0).abs() < 0.1);
        assert_eq!(t.cell_last_visit, last_visits(&t));
    }

    #[test]
    fn wrong_mission_trace() {
        let a = epuck_arena(MissionId::Aggregation);
        let t = trace(MissionId::Aggregation, a, &[vec![(0.0, 0.0)]]);
        assert!(matches!(objective_foraging(&t), Err(MissionError::WrongMission { .. })));
        assert!(matches!(objective_exploration(&t), Err(MissionError::WrongMission { .. })));
    }

    #[test]
    fn csv_round_trip() {
        let a = epuck_arena(MissionId::GridExploration);
        let positions: Vec<Vec<(f64, f64)>> = (0..30).map(|c| vec![(c as f64 * 0.02 - 0.3, 0.1), (0.0, -0.4)]).collect();
        let t = trace(MissionId::GridExploration, a.clone(), &positions);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("time,robot_id,x,y,theta,gnd,carrying\n"));
        let back = EpisodeTrace::read_csv(buf.as_slice(), MissionId::GridExploration, a).unwrap();
        assert_eq!(back, t);
        assert_eq!(objective(&back).unwrap(), objective(&t).unwrap());
    }

    #[test]
    fn mission_names_and_durations() {
        for id in MissionId::ALL {
            assert_eq!(id.name().parse::<MissionId>().unwrap(), id);
        }
        assert_eq!("grid_exploration".parse::<MissionId>().unwrap(), MissionId::GridExploration);
        assert!("dance".parse::<MissionId>().is_err());
        assert_eq!(MissionSpec::new(MissionId::Foraging).cycles(), 1200);
        let bad = MissionSpec {
            duration: 1.25,
            ..MissionSpec::new(MissionId::Foraging)
        };
        assert!(bad.validate().is_err());
    }
}
