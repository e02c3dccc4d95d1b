//! The transfer experiment: design every (method, platform, mission,
//! instance) cell once, then score the controller on its own platform, on
//! every other platform, and optionally in pseudo-reality.
//!
//! Records are appended to `records.csv` as each cell finishes, so an
//! interrupted run picks up where it stopped. When the run completes the
//! file is rewritten in canonical order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::design::{design_ann, design_fsm, write_log, DesignMethod, EsParams, Evaluator, RacingParams};
use crate::episode::ControlSoftware;
use crate::missions::{MissionId, MissionSpec};
use crate::par;
use crate::reference::PlatformSpec;
use crate::rng::{derive, purpose};
use crate::sim::SimConfig;

pub const RECORDS_FILE: &str = "records.csv";
pub const CONTROLLERS_DIR: &str = "controllers";
pub const RECORDS_HEADER: [&str; 7] = ["method", "design_platform", "eval_platform", "mission", "instance", "context", "score"];

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Records { path: String, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Context {
    DesignPlatformEval,
    TransferredEval,
    PseudoRealityEval,
}

impl Context {
    pub fn name(&self) -> &'static str {
        match self {
            Context::DesignPlatformEval => "design_platform_eval",
            Context::TransferredEval => "transferred_eval",
            Context::PseudoRealityEval => "pseudo_reality_eval",
        }
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Context {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "design_platform_eval" => Ok(Context::DesignPlatformEval),
            "transferred_eval" => Ok(Context::TransferredEval),
            "pseudo_reality_eval" => Ok(Context::PseudoRealityEval),
            other => Err(format!("unknown context `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub methods: Vec<DesignMethod>,
    /// Platform profile names, each known to [`PlatformSpec::by_name`].
    pub platforms: Vec<String>,
    pub missions: Vec<MissionId>,
    pub instances_per_cell: usize,
    pub design_budget: usize,
    pub eval_seeds_per_context: usize,
    pub master_seed: u64,
    /// Also score every controller on its design platform in pseudo-reality.
    pub pseudo_reality: bool,
    /// Noise settings for design and regular evaluation.
    pub sim: SimConfig,
    pub mission_duration: f64,
    pub swarm_size: usize,
    pub racing: RacingParams,
    pub es: EsParams,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        Self {
            methods: DesignMethod::ALL.to_vec(),
            platforms: vec!["epuck".into(), "mercator".into()],
            missions: MissionId::ALL.to_vec(),
            instances_per_cell: 10,
            design_budget: crate::design::DEFAULT_BUDGET,
            eval_seeds_per_context: 1,
            master_seed: 1,
            pseudo_reality: false,
            sim: SimConfig::default(),
            mission_duration: crate::missions::DEFAULT_DURATION,
            swarm_size: crate::missions::DEFAULT_SWARM_SIZE,
            racing: RacingParams::default(),
            es: EsParams::default(),
        }
    }
}

/// One design job of the plan.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub method: DesignMethod,
    pub design_platform: String,
    pub mission: MissionId,
    pub instance: usize,
}

impl Cell {
    pub fn file_stem(&self) -> String {
        format!(
            "{}-{}-{}-{:03}",
            self.method, self.design_platform, self.mission, self.instance
        )
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} on {} for {}, instance {}",
            self.method, self.design_platform, self.mission, self.instance
        )
    }
}

fn platform_key(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

fn mission_key(m: MissionId) -> u64 {
    MissionId::ALL.iter().position(|x| *x == m).expect("listed") as u64
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |m: &str| Err(HarnessError::Plan(m.to_string()));
        if self.methods.is_empty() || self.platforms.is_empty() || self.missions.is_empty() {
            return fail("methods, platforms and missions must each be non-empty");
        }
        for name in &self.platforms {
            if PlatformSpec::by_name(name).is_none() {
                return fail(&format!("unknown platform `{name}`"));
            }
        }
        let distinct = |n: usize, m: usize| n == m;
        if !distinct(self.methods.iter().collect::<BTreeSet<_>>().len(), self.methods.len())
            || !distinct(self.platforms.iter().collect::<BTreeSet<_>>().len(), self.platforms.len())
            || !distinct(self.missions.iter().collect::<BTreeSet<_>>().len(), self.missions.len())
        {
            return fail("methods, platforms and missions must not repeat");
        }
        if self.instances_per_cell == 0 || self.eval_seeds_per_context == 0 {
            return fail("instances_per_cell and eval_seeds_per_context must be at least 1");
        }
        self.sim.validate().map_err(|e| HarnessError::Plan(e.to_string()))?;
        self.racing.validate().map_err(|e| HarnessError::Plan(e.to_string()))?;
        self.es.validate().map_err(|e| HarnessError::Plan(e.to_string()))?;
        self.mission(MissionId::Aggregation)
            .validate()
            .map_err(|e| HarnessError::Plan(e.to_string()))?;
        Ok(())
    }

    pub fn mission(&self, id: MissionId) -> MissionSpec {
        MissionSpec {
            duration: self.mission_duration,
            swarm_size: self.swarm_size,
            ..MissionSpec::new(id)
        }
    }

    /// All cells in canonical order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &method in &self.methods {
            for platform in &self.platforms {
                for &mission in &self.missions {
                    for instance in 0..self.instances_per_cell {
                        cells.push(Cell {
                            method,
                            design_platform: platform.clone(),
                            mission,
                            instance,
                        });
                    }
                }
            }
        }
        cells.sort();
        cells
    }

    pub fn design_seed(&self, cell: &Cell) -> u64 {
        let method = DesignMethod::ALL.iter().position(|m| *m == cell.method).expect("listed") as u64;
        derive(
            self.master_seed,
            &[
                purpose::DESIGN_SEED,
                method,
                platform_key(&cell.design_platform),
                mission_key(cell.mission),
                cell.instance as u64,
            ],
        )
    }

    /// Evaluation seeds for one (mission, instance). Every method, platform
    /// and context sees the same seeds.
    pub fn eval_seeds(&self, mission: MissionId, instance: usize) -> Vec<u64> {
        (0..self.eval_seeds_per_context)
            .map(|k| derive(self.master_seed, &[purpose::EVAL_SEED, mission_key(mission), instance as u64, k as u64]))
            .collect()
    }

    /// The (context, eval platform) pairs each cell is scored in.
    pub fn contexts(&self, design_platform: &str) -> Vec<(Context, String)> {
        let mut out = vec![(Context::DesignPlatformEval, design_platform.to_string())];
        for p in &self.platforms {
            if p != design_platform {
                out.push((Context::TransferredEval, p.clone()));
            }
        }
        if self.pseudo_reality {
            out.push((Context::PseudoRealityEval, design_platform.to_string()));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceRecord {
    pub method: String,
    pub design_platform: String,
    pub eval_platform: String,
    pub mission: String,
    pub instance: usize,
    pub context: String,
    pub score: f64,
}

impl PerformanceRecord {
    fn sort_key(&self) -> (String, String, String, usize, String, String) {
        (
            self.method.clone(),
            self.design_platform.clone(),
            self.mission.clone(),
            self.instance,
            self.context.clone(),
            self.eval_platform.clone(),
        )
    }

    fn cell_key(&self) -> (String, String, String, usize) {
        (self.method.clone(), self.design_platform.clone(), self.mission.clone(), self.instance)
    }
}

pub fn sort_records(records: &mut [PerformanceRecord]) {
    records.sort_by_key(|r| r.sort_key());
}

pub fn read_records(path: &Path) -> Result<Vec<PerformanceRecord>, HarnessError> {
    let bad = |message: String| HarnessError::Records {
        path: path.display().to_string(),
        message,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if headers.iter().ne(RECORDS_HEADER) {
        return Err(bad(format!("unexpected header `{}`", headers.iter().collect::<Vec<_>>().join(","))));
    }
    let rows: Vec<csv::Result<PerformanceRecord>> = reader.deserialize().collect();
    let last = rows.len().saturating_sub(1);
    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.into_iter().enumerate() {
        match row {
            Ok(r) => out.push(r),
            // A truncated final line from an interrupted run is dropped.
            Err(_) if i == last => {}
            Err(e) => return Err(bad(e.to_string())),
        }
    }
    Ok(out)
}

fn record_line(r: &PerformanceRecord) -> String {
    format!(
        "{},{},{},{},{},{},{:?}\n",
        r.method, r.design_platform, r.eval_platform, r.mission, r.instance, r.context, r.score
    )
}

pub fn write_records(path: &Path, records: &[PerformanceRecord]) -> Result<(), HarnessError> {
    let mut text = RECORDS_HEADER.join(",");
    text.push('\n');
    for r in records {
        text.push_str(&record_line(r));
    }
    fs::write(path, text).map_err(io_err(path))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailedCell {
    pub cell: String,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub records: Vec<PerformanceRecord>,
    pub failed: Vec<FailedCell>,
    /// Cells designed in this invocation (not loaded from a previous run).
    pub designed: usize,
}

fn run_cell(plan: &ExperimentPlan, cell: &Cell, out_dir: &Path) -> Result<Vec<PerformanceRecord>, String> {
    let spec = PlatformSpec::by_name(&cell.design_platform).ok_or("unknown platform")?;
    let mission = plan.mission(cell.mission);
    let eval = Evaluator::new(mission, spec, plan.sim);
    let seed = plan.design_seed(cell);
    let outcome = match cell.method {
        DesignMethod::Fsm => design_fsm(&eval, plan.design_budget, seed, &plan.racing),
        DesignMethod::Ann => design_ann(&eval, plan.design_budget, seed, &plan.es),
    }
    .map_err(|e| e.to_string())?;

    let dir = out_dir.join(CONTROLLERS_DIR);
    let path = dir.join(format!("{}.{}", cell.file_stem(), outcome.controller.file_extension()));
    fs::write(&path, outcome.controller.to_file_text()).map_err(|e| format!("{}: {e}", path.display()))?;
    let log_path = dir.join(format!("{}.log.csv", cell.file_stem()));
    let log_file = fs::File::create(&log_path).map_err(|e| format!("{}: {e}", log_path.display()))?;
    write_log(&outcome.log, log_file).map_err(|e| e.to_string())?;

    // Evaluate the file as written, exactly as a transfer would.
    let controller = ControlSoftware::read(&path).map_err(|e| e.to_string())?;
    let seeds = plan.eval_seeds(cell.mission, cell.instance);
    let mut records = Vec::new();
    for (context, platform) in plan.contexts(&cell.design_platform) {
        let spec = PlatformSpec::by_name(&platform).ok_or("unknown platform")?;
        let sim = SimConfig {
            pseudo_reality: context == Context::PseudoRealityEval,
            ..plan.sim
        };
        let eval = Evaluator::new(mission, spec, sim);
        let jobs: Vec<(&ControlSoftware, u64)> = seeds.iter().map(|&s| (&controller, s)).collect();
        let scores = eval.evaluate_batch(&jobs).map_err(|e| e.to_string())?;
        records.push(PerformanceRecord {
            method: cell.method.to_string(),
            design_platform: cell.design_platform.clone(),
            eval_platform: platform,
            mission: cell.mission.to_string(),
            instance: cell.instance,
            context: context.to_string(),
            score: scores.iter().sum::<f64>() / scores.len() as f64,
        });
    }
    Ok(records)
}

/// Run (or resume) the plan, persisting under `out_dir`.
///
/// `progress` is called after every finished cell with (done, total).
pub fn run_experiment(
    plan: &ExperimentPlan,
    out_dir: &Path,
    progress: &(dyn Fn(usize, usize) + Sync),
) -> Result<ExperimentRun, HarnessError> {
    plan.validate()?;
    let controllers = out_dir.join(CONTROLLERS_DIR);
    fs::create_dir_all(&controllers).map_err(io_err(&controllers))?;
    let records_path: PathBuf = out_dir.join(RECORDS_FILE);

    let cells = plan.cells();
    let expected: BTreeMap<(String, String, String, usize), usize> = cells
        .iter()
        .map(|c| {
            (
                (c.method.to_string(), c.design_platform.clone(), c.mission.to_string(), c.instance),
                plan.contexts(&c.design_platform).len(),
            )
        })
        .collect();

    let previous = if records_path.exists() {
        read_records(&records_path)?
    } else {
        Vec::new()
    };
    let mut by_cell: BTreeMap<_, Vec<PerformanceRecord>> = BTreeMap::new();
    for r in previous {
        by_cell.entry(r.cell_key()).or_default().push(r);
    }
    // Keep only cells whose records are complete; anything else is redone.
    let mut kept = Vec::new();
    let mut done = BTreeSet::new();
    for (key, recs) in by_cell {
        if expected.get(&key) == Some(&recs.len()) {
            done.insert(key);
            kept.extend(recs);
        }
    }
    write_records(&records_path, &kept)?;

    let todo: Vec<Cell> = cells
        .into_iter()
        .filter(|c| !done.contains(&(c.method.to_string(), c.design_platform.clone(), c.mission.to_string(), c.instance)))
        .collect();
    let total = todo.len();
    let store = Mutex::new((kept, 0usize));
    let failures: Vec<Option<FailedCell>> = par::map(&todo, |cell| match run_cell(plan, cell, out_dir) {
        Ok(records) => {
            let mut guard = store.lock().expect("record store poisoned");
            let mut text = String::new();
            for r in &records {
                text.push_str(&record_line(r));
            }
            let append = OpenOptions::new()
                .append(true)
                .open(&records_path)
                .and_then(|mut f| f.write_all(text.as_bytes()));
            guard.0.extend(records);
            guard.1 += 1;
            progress(guard.1, total);
            append.err().map(|e| FailedCell {
                cell: cell.to_string(),
                error: format!("could not persist records: {e}"),
            })
        }
        Err(error) => {
            let mut guard = store.lock().expect("record store poisoned");
            guard.1 += 1;
            progress(guard.1, total);
            Some(FailedCell {
                cell: cell.to_string(),
                error,
            })
        }
    });
    let (mut records, _) = store.into_inner().expect("record store poisoned");
    sort_records(&mut records);
    write_records(&records_path, &records)?;
    Ok(ExperimentRun {
        records,
        failed: failures.into_iter().flatten().collect(),
        designed: total,
    })
}
