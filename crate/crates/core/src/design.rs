//! Budgeted automatic design: iterated racing over finite-state machines and
//! a (μ+λ) evolution strategy over network genomes.
//!
//! Every episode counts against the budget exactly once. Evaluations inside a
//! round or generation run as one ordered batch, so thread count never
//! changes the outcome.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::Rng;
use thiserror::Error;

use crate::episode::{evaluate, ControlSoftware, EpisodeError};
use crate::fsm::{perturb_fsm, sample_fsm, FsmDescriptor};
use crate::missions::MissionSpec;
use crate::neuro::{crossover, mutate, Genome, DEFAULT_SIGMA};
use crate::par;
use crate::reference::PlatformSpec;
use crate::rng::{derive, purpose, stream};
use crate::sim::SimConfig;
use crate::stats::{friedman, RankTable};

pub const DEFAULT_BUDGET: usize = 2000;

#[derive(Debug, Error)]
pub enum DesignError {
    #[error("budget of {budget} episodes is below the minimum of {minimum}")]
    BudgetTooSmall { budget: usize, minimum: usize },
    #[error("invalid design parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Episode(#[from] EpisodeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DesignMethod {
    Fsm,
    Ann,
}

impl DesignMethod {
    pub const ALL: [DesignMethod; 2] = [DesignMethod::Fsm, DesignMethod::Ann];

    pub fn name(&self) -> &'static str {
        match self {
            DesignMethod::Fsm => "fsm",
            DesignMethod::Ann => "ann",
        }
    }
}

impl fmt::Display for DesignMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DesignMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fsm" => Ok(DesignMethod::Fsm),
            "ann" => Ok(DesignMethod::Ann),
            other => Err(format!("unknown method `{other}` (expected fsm or ann)")),
        }
    }
}

/// Scores controllers on one mission and platform.
#[derive(Debug, Clone)]
pub struct Evaluator {
    pub mission: MissionSpec,
    pub platform: PlatformSpec,
    pub sim: SimConfig,
}

impl Evaluator {
    pub fn new(mission: MissionSpec, platform: PlatformSpec, sim: SimConfig) -> Self {
        Self { mission, platform, sim }
    }

    pub fn evaluate(&self, ctrl: &ControlSoftware, seed: u64) -> Result<f64, EpisodeError> {
        evaluate(ctrl, &self.mission, &self.platform, &self.sim, seed)
    }

    /// Score every `(controller, seed)` job, in job order.
    pub fn evaluate_batch(&self, jobs: &[(&ControlSoftware, u64)]) -> Result<Vec<f64>, EpisodeError> {
        par::map(jobs, |(c, s)| self.evaluate(c, *s)).into_iter().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRow {
    pub iteration: usize,
    pub candidate_id: usize,
    pub seed: u64,
    pub score: f64,
    /// Episodes spent so far, this one included.
    pub episodes_used: usize,
}

pub fn write_log<W: Write>(rows: &[LogRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "candidate_id", "seed", "score", "episodes_used"])?;
    for r in rows {
        w.write_record([
            r.iteration.to_string(),
            r.candidate_id.to_string(),
            r.seed.to_string(),
            format!("{:?}", r.score),
            r.episodes_used.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct DesignOutcome {
    pub controller: ControlSoftware,
    /// Mean score of the returned controller on the final seed set.
    pub mean_score: f64,
    pub episodes_used: usize,
    pub log: Vec<LogRow>,
}

struct Budget {
    max: usize,
    used: usize,
}

impl Budget {
    fn remaining(&self) -> usize {
        self.max - self.used
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RacingParams {
    pub pool_size: usize,
    pub alpha: f64,
    pub min_seeds: usize,
    pub max_seeds: usize,
    /// Survivors carried into the next iteration.
    pub elites: usize,
    pub min_budget: usize,
}

impl Default for RacingParams {
    fn default() -> Self {
        Self {
            pool_size: 30,
            alpha: 0.05,
            min_seeds: 5,
            max_seeds: 10,
            elites: 5,
            min_budget: 100,
        }
    }
}

impl RacingParams {
    pub fn validate(&self) -> Result<(), DesignError> {
        let ok = self.pool_size >= 2
            && self.alpha > 0.0
            && self.alpha < 1.0
            && self.min_seeds >= 2
            && self.max_seeds >= self.min_seeds
            && self.elites >= 1
            && self.elites < self.pool_size;
        if ok {
            Ok(())
        } else {
            Err(DesignError::Params(format!("{self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsParams {
    pub population: usize,
    pub elites: usize,
    pub seeds_per_generation: usize,
    pub sigma: f64,
}

impl Default for EsParams {
    fn default() -> Self {
        Self {
            population: 20,
            elites: 5,
            seeds_per_generation: 5,
            sigma: DEFAULT_SIGMA,
        }
    }
}

impl EsParams {
    pub fn episodes_per_generation(&self) -> usize {
        self.population * self.seeds_per_generation
    }

    pub fn validate(&self) -> Result<(), DesignError> {
        let ok = self.elites >= 1
            && self.elites < self.population
            && self.seeds_per_generation >= 1
            && self.sigma.is_finite()
            && self.sigma >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(DesignError::Params(format!("{self:?}")))
        }
    }
}

struct Candidate {
    id: usize,
    fsm: FsmDescriptor,
    ctrl: ControlSoftware,
    scores: Vec<f64>,
}

impl Candidate {
    fn new(id: usize, fsm: FsmDescriptor) -> Self {
        Self {
            id,
            ctrl: ControlSoftware::Fsm(fsm.clone()),
            fsm,
            scores: Vec::new(),
        }
    }

    fn mean(&self) -> f64 {
        self.scores.iter().sum::<f64>() / self.scores.len() as f64
    }
}

fn by_mean_desc(a: &Candidate, b: &Candidate) -> std::cmp::Ordering {
    b.mean().total_cmp(&a.mean()).then(a.id.cmp(&b.id))
}

/// Drop candidates whose average rank trails the best by more than the
/// least significant difference, when the Friedman test rejects equality.
fn eliminate(alive: &mut Vec<Candidate>, alpha: f64) {
    let seeds = alive[0].scores.len();
    let table = RankTable {
        treatments: alive.iter().map(|c| c.id.to_string()).collect(),
        blocks: (0..seeds).map(|s| alive.iter().map(|c| c.scores[s]).collect()).collect(),
    };
    let Ok(result) = friedman(&table) else { return };
    if result.p_value >= alpha {
        return;
    }
    let best = result.avg_ranks.iter().copied().fold(f64::INFINITY, f64::min);
    let lsd = 2.0 * result.ci_halfwidth[0];
    let mut keep = result.avg_ranks.iter().map(|r| r - best <= lsd);
    alive.retain(|_| keep.next().expect("one rank per candidate"));
}

/// Iterated racing over finite-state machines.
///
/// The first iteration races uniformly sampled machines. Later iterations
/// keep the best survivors and fill the pool with perturbed copies of them;
/// the chance that a perturbation redraws a behavior rather than a
/// transition is `1 / (1 + iteration)`. Each iteration races on fresh seeds.
pub fn design_fsm(eval: &Evaluator, budget: usize, master_seed: u64, params: &RacingParams) -> Result<DesignOutcome, DesignError> {
    params.validate()?;
    if budget < params.min_budget {
        return Err(DesignError::BudgetTooSmall {
            budget,
            minimum: params.min_budget,
        });
    }
    let mut budget = Budget { max: budget, used: 0 };
    let mut log = Vec::new();
    let mut next_id = 0;
    let mut sampler = stream(master_seed, &[purpose::RACE_SAMPLE]);
    let mut survivors: Vec<Candidate> = Vec::new();
    let mut best: Option<(FsmDescriptor, f64)> = None;

    for iteration in 0.. {
        // Late in the run, shrink the pool so the race can still reach the
        // minimum number of seeds.
        let pool = if iteration == 0 {
            params.pool_size
        } else {
            params.pool_size.min(budget.remaining() / params.min_seeds)
        };
        if iteration > 0 && pool <= survivors.len() {
            break;
        }
        let resample_prob = 1.0 / (1.0 + iteration as f64);
        let mut alive: Vec<Candidate> = std::mem::take(&mut survivors);
        for c in &mut alive {
            c.scores.clear();
        }
        let parents: Vec<FsmDescriptor> = alive.iter().map(|c| c.fsm.clone()).collect();
        while alive.len() < pool {
            let fsm = match parents.choose(&mut sampler) {
                None => sample_fsm(&mut sampler),
                Some(parent) => perturb_fsm(parent, &mut sampler, resample_prob),
            };
            alive.push(Candidate::new(next_id, fsm));
            next_id += 1;
        }

        let mut seeds: Vec<u64> = Vec::new();
        while seeds.len() < params.max_seeds && budget.remaining() >= alive.len() {
            // Rounds before the first test cannot eliminate anything, so
            // they share one batch.
            let rounds = if seeds.len() < params.min_seeds {
                (params.min_seeds - seeds.len()).min(budget.remaining() / alive.len())
            } else {
                1
            };
            let new_seeds: Vec<u64> = (0..rounds)
                .map(|r| derive(master_seed, &[purpose::RACE_SEED, iteration as u64, (seeds.len() + r) as u64]))
                .collect();
            let jobs: Vec<(&ControlSoftware, u64)> = new_seeds
                .iter()
                .flat_map(|&s| alive.iter().map(move |c| (&c.ctrl, s)))
                .collect();
            let scores = eval.evaluate_batch(&jobs)?;
            drop(jobs);
            let n = alive.len();
            for (r, &seed) in new_seeds.iter().enumerate() {
                for (i, c) in alive.iter_mut().enumerate() {
                    let score = scores[r * n + i];
                    c.scores.push(score);
                    budget.used += 1;
                    log.push(LogRow {
                        iteration,
                        candidate_id: c.id,
                        seed,
                        score,
                        episodes_used: budget.used,
                    });
                }
            }
            seeds.extend(new_seeds);
            if seeds.len() >= params.min_seeds && alive.len() > 2 {
                eliminate(&mut alive, params.alpha);
            }
            if alive.len() <= 2 {
                break;
            }
        }
        if seeds.is_empty() {
            break;
        }
        alive.sort_by(by_mean_desc);
        best = Some((alive[0].fsm.clone(), alive[0].mean()));
        alive.truncate(params.elites);
        survivors = alive;
    }
    let (fsm, mean_score) = best.expect("the first iteration always completes a round");
    Ok(DesignOutcome {
        controller: ControlSoftware::Fsm(fsm),
        mean_score,
        episodes_used: budget.used,
        log,
    })
}

/// (μ+λ) evolution over genomes. Every generation scores the whole
/// population, elites included, on fresh common seeds; offspring come from
/// uniform crossover of two random elites followed by Gaussian mutation.
/// Returns the best genome of the last scored generation.
pub fn design_ann(eval: &Evaluator, budget: usize, master_seed: u64, params: &EsParams) -> Result<DesignOutcome, DesignError> {
    params.validate()?;
    let per_gen = params.episodes_per_generation();
    if budget < per_gen {
        return Err(DesignError::BudgetTooSmall { budget, minimum: per_gen });
    }
    let mut budget = Budget { max: budget, used: 0 };
    let mut log = Vec::new();
    let mut rng = stream(master_seed, &[purpose::ES_VARIATION]);
    let mut population: Vec<(usize, ControlSoftware)> = (0..params.population)
        .map(|id| (id, ControlSoftware::Ann(Genome::random(&mut rng))))
        .collect();
    let mut next_id = params.population;
    let mut best = None;

    for generation in 0.. {
        if budget.remaining() < per_gen {
            break;
        }
        let seeds: Vec<u64> = (0..params.seeds_per_generation)
            .map(|k| derive(master_seed, &[purpose::ES_SEED, generation as u64, k as u64]))
            .collect();
        let jobs: Vec<(&ControlSoftware, u64)> = population
            .iter()
            .flat_map(|(_, c)| seeds.iter().map(move |&s| (c, s)))
            .collect();
        let scores = eval.evaluate_batch(&jobs)?;
        let mut fitness = Vec::with_capacity(population.len());
        for (i, (id, _)) in population.iter().enumerate() {
            let row = &scores[i * seeds.len()..(i + 1) * seeds.len()];
            for (&seed, &score) in seeds.iter().zip(row) {
                budget.used += 1;
                log.push(LogRow {
                    iteration: generation,
                    candidate_id: *id,
                    seed,
                    score,
                    episodes_used: budget.used,
                });
            }
            fitness.push(row.iter().sum::<f64>() / row.len() as f64);
        }
        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));
        best = Some((population[order[0]].1.clone(), fitness[order[0]]));

        let elites: Vec<(usize, ControlSoftware)> = order[..params.elites].iter().map(|&i| population[i].clone()).collect();
        let mut next = elites.clone();
        while next.len() < params.population {
            let (_, ControlSoftware::Ann(a)) = elites.choose(&mut rng).expect("elites") else { unreachable!() };
            let (_, ControlSoftware::Ann(b)) = elites.choose(&mut rng).expect("elites") else { unreachable!() };
            let child = mutate(&crossover(a, b, &mut rng), params.sigma, &mut rng).expect("sigma validated");
            next.push((next_id, ControlSoftware::Ann(child)));
            next_id += 1;
        }
        population = next;
    }
    let (controller, mean_score) = best.expect("budget covers one generation");
    Ok(DesignOutcome {
        controller,
        mean_score,
        episodes_used: budget.used,
        log,
    })
}

/// Run the chosen method with its default parameters.
pub fn design(method: DesignMethod, eval: &Evaluator, budget: usize, master_seed: u64) -> Result<DesignOutcome, DesignError> {
    match method {
        DesignMethod::Fsm => design_fsm(eval, budget, master_seed, &RacingParams::default()),
        DesignMethod::Ann => design_ann(eval, budget, master_seed, &EsParams::default()),
    }
}

/// A controller drawn uniformly from the method's search space.
pub fn random_controller<R: Rng + ?Sized>(method: DesignMethod, rng: &mut R) -> ControlSoftware {
    match method {
        DesignMethod::Fsm => ControlSoftware::Fsm(sample_fsm(rng)),
        DesignMethod::Ann => ControlSoftware::Ann(Genome::random(rng)),
    }
}
