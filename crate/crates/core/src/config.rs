//! Run configuration: flat `key = value` text with `#` comments.
//!
//! Lists are comma separated. Missing keys take their defaults; unknown or
//! repeated keys are errors. [`RunConfig::to_text`] emits every key in a
//! fixed order, so parsing its output and serializing again is byte-identical.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::design::DesignMethod;
use crate::harness::ExperimentPlan;
use crate::missions::MissionId;
use crate::reference::PlatformSpec;

const HEADER: &str = "# swarmbench run configuration";

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: bad value for `{key}`: {message}")]
    Value { line: usize, key: String, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub plan: ExperimentPlan,
    pub output_dir: PathBuf,
    /// Worker threads; `None` uses every available core.
    pub parallelism: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            plan: ExperimentPlan::default(),
            output_dir: PathBuf::from("swarmbench-out"),
            parallelism: None,
        }
    }
}

const KEYS: &[&str] = &[
    "methods",
    "platforms",
    "missions",
    "instances_per_cell",
    "design_budget",
    "eval_seeds_per_context",
    "master_seed",
    "pseudo_reality",
    "sensor_noise_sd",
    "actuator_noise_sd",
    "substeps_per_cycle",
    "mission_duration",
    "swarm_size",
    "racing_pool_size",
    "racing_alpha",
    "racing_min_seeds",
    "racing_max_seeds",
    "racing_elites",
    "racing_min_budget",
    "es_population",
    "es_elites",
    "es_seeds_per_generation",
    "es_sigma",
    "output_dir",
    "parallelism",
];

fn list<T: FromStr>(value: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| format!("`{s}`: {e}")))
        .collect()
}

fn num<T: FromStr>(value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| format!("`{value}`: {e}"))
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut seen = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey { line, key: key.into() });
            }
            if seen.contains(&key) {
                return Err(ConfigError::Duplicate { line, key: key.into() });
            }
            seen.push(key);
            cfg.set(key, value).map_err(|message| ConfigError::Value {
                line,
                key: key.into(),
                message,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let p = &mut self.plan;
        match key {
            "methods" => p.methods = list::<DesignMethod>(value)?,
            "platforms" => {
                let names: Vec<String> = list(value)?;
                if let Some(bad) = names.iter().find(|n| PlatformSpec::by_name(n).is_none()) {
                    return Err(format!("unknown platform `{bad}`"));
                }
                p.platforms = names;
            }
            "missions" => p.missions = list::<MissionId>(value)?,
            "instances_per_cell" => p.instances_per_cell = num(value)?,
            "design_budget" => p.design_budget = num(value)?,
            "eval_seeds_per_context" => p.eval_seeds_per_context = num(value)?,
            "master_seed" => p.master_seed = num(value)?,
            "pseudo_reality" => p.pseudo_reality = num(value)?,
            "sensor_noise_sd" => p.sim.sensor_noise_sd = num(value)?,
            "actuator_noise_sd" => p.sim.actuator_noise_sd = num(value)?,
            "substeps_per_cycle" => p.sim.substeps_per_cycle = num(value)?,
            "mission_duration" => p.mission_duration = num(value)?,
            "swarm_size" => p.swarm_size = num(value)?,
            "racing_pool_size" => p.racing.pool_size = num(value)?,
            "racing_alpha" => p.racing.alpha = num(value)?,
            "racing_min_seeds" => p.racing.min_seeds = num(value)?,
            "racing_max_seeds" => p.racing.max_seeds = num(value)?,
            "racing_elites" => p.racing.elites = num(value)?,
            "racing_min_budget" => p.racing.min_budget = num(value)?,
            "es_population" => p.es.population = num(value)?,
            "es_elites" => p.es.elites = num(value)?,
            "es_seeds_per_generation" => p.es.seeds_per_generation = num(value)?,
            "es_sigma" => p.es.sigma = num(value)?,
            "output_dir" => {
                if value.is_empty() {
                    return Err("empty path".into());
                }
                self.output_dir = PathBuf::from(value);
            }
            "parallelism" => {
                self.parallelism = match value {
                    "auto" => None,
                    v => match num::<usize>(v)? {
                        0 => return Err("must be at least 1, or `auto`".into()),
                        n => Some(n),
                    },
                }
            }
            _ => unreachable!("key list checked by the caller"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.plan.validate().map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let p = &self.plan;
        let mut out = String::new();
        writeln!(out, "{HEADER}").unwrap();
        let mut kv = |k: &str, v: String| writeln!(out, "{k} = {v}").unwrap();
        kv("methods", join(&p.methods, |m| m.name().to_string()));
        kv("platforms", p.platforms.join(", "));
        kv("missions", join(&p.missions, |m| m.name().to_string()));
        kv("instances_per_cell", p.instances_per_cell.to_string());
        kv("design_budget", p.design_budget.to_string());
        kv("eval_seeds_per_context", p.eval_seeds_per_context.to_string());
        kv("master_seed", p.master_seed.to_string());
        kv("pseudo_reality", p.pseudo_reality.to_string());
        kv("sensor_noise_sd", format!("{:?}", p.sim.sensor_noise_sd));
        kv("actuator_noise_sd", format!("{:?}", p.sim.actuator_noise_sd));
        kv("substeps_per_cycle", p.sim.substeps_per_cycle.to_string());
        kv("mission_duration", format!("{:?}", p.mission_duration));
        kv("swarm_size", p.swarm_size.to_string());
        kv("racing_pool_size", p.racing.pool_size.to_string());
        kv("racing_alpha", format!("{:?}", p.racing.alpha));
        kv("racing_min_seeds", p.racing.min_seeds.to_string());
        kv("racing_max_seeds", p.racing.max_seeds.to_string());
        kv("racing_elites", p.racing.elites.to_string());
        kv("racing_min_budget", p.racing.min_budget.to_string());
        kv("es_population", p.es.population.to_string());
        kv("es_elites", p.es.elites.to_string());
        kv("es_seeds_per_generation", p.es.seeds_per_generation.to_string());
        kv("es_sigma", format!("{:?}", p.es.sigma));
        kv("output_dir", self.output_dir.display().to_string());
        kv(
            "parallelism",
            self.parallelism.map_or_else(|| "auto".to_string(), |n| n.to_string()),
        );
        out
    }

    pub fn to_plan(&self) -> ExperimentPlan {
        self.plan.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let text = RunConfig::default().to_text();
        let parsed = RunConfig::parse(&text).unwrap();
        assert_eq!(parsed, RunConfig::default());
        assert_eq!(parsed.to_text(), text);
        assert_eq!(parsed.to_plan().cells().len(), 120);
    }

    #[test]
    fn partial_file_with_comments() {
        let text = "\
# small slice
methods = fsm   # only one
missions = foraging
design_budget = 500

parallelism = 2
sensor_noise_sd = 0.1
";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.plan.methods, vec![DesignMethod::Fsm]);
        assert_eq!(cfg.plan.missions, vec![MissionId::Foraging]);
        assert_eq!(cfg.plan.design_budget, 500);
        assert_eq!(cfg.parallelism, Some(2));
        assert_eq!(cfg.plan.sim.sensor_noise_sd, 0.1);
        assert_eq!(cfg.plan.cells().len(), 20);
        let canon = cfg.to_text();
        assert_eq!(RunConfig::parse(&canon).unwrap().to_text(), canon);
    }

    #[test]
    fn odd_values_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.plan.sim.actuator_noise_sd = 0.1 + 0.2;
        cfg.plan.master_seed = u64::MAX;
        cfg.plan.pseudo_reality = true;
        cfg.output_dir = PathBuf::from("/tmp/some dir/out");
        let text = cfg.to_text();
        assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
    }

    #[test]
    fn errors_are_located() {
        assert_eq!(
            RunConfig::parse("methods = fsm\nbogus = 1\n"),
            Err(ConfigError::UnknownKey { line: 2, key: "bogus".into() })
        );
        assert_eq!(
            RunConfig::parse("master_seed = 1\n\nmaster_seed = 2"),
            Err(ConfigError::Duplicate { line: 3, key: "master_seed".into() })
        );
        assert_eq!(RunConfig::parse("just words"), Err(ConfigError::Syntax { line: 1 }));
        assert!(matches!(
            RunConfig::parse("methods = fsm, sgd"),
            Err(ConfigError::Value { line: 1, .. })
        ));
        assert!(matches!(RunConfig::parse("platforms = kilobot"), Err(ConfigError::Value { .. })));
        assert!(matches!(RunConfig::parse("parallelism = 0"), Err(ConfigError::Value { .. })));
        assert!(matches!(RunConfig::parse("es_elites = 30"), Err(ConfigError::Invalid(_))));
        assert!(matches!(RunConfig::parse("sensor_noise_sd = -1"), Err(ConfigError::Invalid(_))));
        assert!(matches!(RunConfig::parse("methods ="), Err(ConfigError::Invalid(_))));
    }
}
