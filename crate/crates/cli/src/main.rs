use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context as _, Result};
use clap::{Args, Parser, Subcommand};

use swarmbench::config::RunConfig;
use swarmbench::design::{design, write_log, DesignMethod, Evaluator, DEFAULT_BUDGET};
use swarmbench::episode::{run_episode, ControlSoftware};
use swarmbench::harness::{read_records, run_experiment, RECORDS_FILE};
use swarmbench::missions::{objective, MissionId, MissionSpec, StartPlacement};
use swarmbench::par;
use swarmbench::reference::PlatformSpec;
use swarmbench::report::transfer_report;
use swarmbench::sim::SimConfig;

const REPORT_FILE: &str = "report.json";
const PLOT_FILE: &str = "plot_data.csv";

#[derive(Parser)]
#[command(name = "swarmbench", version, about = "Design, evaluate and transfer robot-swarm control software")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design one controller and write it with its design log.
    Design(DesignArgs),
    /// Score a controller file over a range of seeds.
    Evaluate(EvaluateArgs),
    /// Run a full experiment plan from a config file, then report on it.
    Transfer(TransferArgs),
    /// Rebuild the report from an existing records file.
    Report(ReportArgs),
}

#[derive(Args)]
struct DesignArgs {
    #[arg(long)]
    method: DesignMethod,
    #[arg(long)]
    mission: MissionId,
    /// Profile name (`epuck`, `mercator`) or path to a platform file.
    #[arg(long, value_parser = parse_platform)]
    platform: PlatformSpec,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; every available core by default.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    controller: PathBuf,
    #[arg(long)]
    mission: MissionId,
    #[arg(long, value_parser = parse_platform)]
    platform: PlatformSpec,
    /// Inclusive range `a:b`, or a single seed.
    #[arg(long, value_parser = parse_seeds, default_value = "1:10")]
    seeds: SeedRange,
    #[arg(long)]
    pseudo_reality: bool,
    /// Start every robot on the mission's scoring region.
    #[arg(long)]
    start_on_target: bool,
    /// Also write each episode's trace as `<dir>/trace-<seed>.csv`.
    #[arg(long)]
    trace_dir: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct TransferArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Records CSV written by `transfer`.
    records: PathBuf,
    /// Directory for the report files; the records' directory by default.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct SeedRange {
    first: u64,
    last: u64,
}

fn parse_seeds(s: &str) -> Result<SeedRange, String> {
    let num = |v: &str| v.trim().parse::<u64>().map_err(|e| format!("`{v}`: {e}"));
    let (first, last) = match s.split_once(':') {
        Some((a, b)) => (num(a)?, num(b)?),
        None => (num(s)?, num(s)?),
    };
    if first > last {
        return Err(format!("empty range {first}:{last}"));
    }
    Ok(SeedRange { first, last })
}

fn parse_platform(s: &str) -> Result<PlatformSpec, String> {
    if let Some(spec) = PlatformSpec::by_name(s) {
        return Ok(spec);
    }
    let text = fs::read_to_string(s).map_err(|e| format!("not a known profile and not readable as a file: {e}"))?;
    PlatformSpec::from_profile_text(&text).map_err(|e| e.to_string())
}

/// Failure kinds that map to distinct exit codes.
enum Failure {
    Usage(anyhow::Error),
    Run(anyhow::Error),
}

fn usage<T>(r: Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Usage)
}

fn run<T>(r: Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Run)
}

fn threads(requested: Option<usize>) -> usize {
    requested
        .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()))
        .unwrap_or(1)
}

fn cmd_design(args: DesignArgs) -> Result<(), Failure> {
    let eval = Evaluator::new(MissionSpec::new(args.mission), args.platform, SimConfig::default());
    let outcome = run(par::with_threads(threads(args.threads), || {
        design(args.method, &eval, args.budget, args.seed)
    })
    .context("design failed"))?;
    run(fs::write(&args.out, outcome.controller.to_file_text()).with_context(|| format!("writing {}", args.out.display())))?;
    let log_path = PathBuf::from(format!("{}.log.csv", args.out.display()));
    let log = run(fs::File::create(&log_path).with_context(|| format!("writing {}", log_path.display())))?;
    run(write_log(&outcome.log, log).context("writing design log"))?;
    eprintln!(
        "designed {} controller: mean score {:.6} over {} episodes",
        args.method, outcome.mean_score, outcome.episodes_used
    );
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), Failure> {
    let controller = usage(
        ControlSoftware::read(&args.controller).with_context(|| format!("reading controller {}", args.controller.display())),
    )?;
    let mission = MissionSpec {
        start: if args.start_on_target {
            StartPlacement::OnTarget
        } else {
            StartPlacement::Default
        },
        ..MissionSpec::new(args.mission)
    };
    let sim = SimConfig {
        pseudo_reality: args.pseudo_reality,
        ..SimConfig::default()
    };
    if let Some(dir) = &args.trace_dir {
        run(fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())))?;
    }
    let seeds: Vec<u64> = (args.seeds.first..=args.seeds.last).collect();
    let results = par::with_threads(threads(args.threads), || {
        par::map(&seeds, |&seed| -> Result<f64> {
            let trace = run_episode(&controller, &mission, &args.platform, &sim, seed)?;
            if let Some(dir) = &args.trace_dir {
                let path = dir.join(format!("trace-{seed}.csv"));
                trace.write_csv(fs::File::create(&path)?)?;
            }
            Ok(objective(&trace)?)
        })
    });
    let scores = run(results.into_iter().collect::<Result<Vec<f64>>>().context("evaluation failed"))?;
    println!("seed,score");
    for (seed, score) in seeds.iter().zip(&scores) {
        println!("{seed},{score:?}");
    }
    println!("mean,{:?}", scores.iter().sum::<f64>() / scores.len() as f64);
    Ok(())
}

fn write_report(records_path: &Path, out_dir: &Path, failed: &[swarmbench::harness::FailedCell]) -> Result<String> {
    let records = read_records(records_path)?;
    let report = transfer_report(&records, failed)?;
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join(REPORT_FILE), report.to_json() + "\n")?;
    report.write_plot_data(fs::File::create(out_dir.join(PLOT_FILE))?)?;
    Ok(report.observed_outcome)
}

fn cmd_transfer(args: TransferArgs) -> Result<(), Failure> {
    let text = usage(fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display())))?;
    let mut config = usage(RunConfig::parse(&text).with_context(|| format!("in {}", args.config.display())))?;
    if let Some(out) = args.out {
        config.output_dir = out;
    }
    let out = config.output_dir.clone();
    run(fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display())))?;
    run(fs::write(out.join("config.txt"), config.to_text()).context("saving config"))?;

    let plan = config.to_plan();
    let progress = |done: usize, total: usize| eprintln!("[{done}/{total}] cells designed");
    let result = run(par::with_threads(threads(config.parallelism), || {
        run_experiment(&plan, &out, &progress)
    })
    .context("experiment failed"))?;
    for f in &result.failed {
        eprintln!("cell {} failed: {}", f.cell, f.error);
    }
    let outcome = run(write_report(&out.join(RECORDS_FILE), &out, &result.failed))?;
    println!("{outcome}");
    println!("report written to {}", out.join(REPORT_FILE).display());
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), Failure> {
    if !args.records.is_file() {
        return Err(Failure::Usage(anyhow::anyhow!("records file {} not found", args.records.display())));
    }
    let out = args
        .out
        .unwrap_or_else(|| args.records.parent().map(Path::to_path_buf).unwrap_or_default());
    let outcome = run(write_report(&args.records, &out, &[]))?;
    println!("{outcome}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Design(a) => cmd_design(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Transfer(a) => cmd_transfer(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_ranges() {
        assert_eq!(parse_seeds("1:10"), Ok(SeedRange { first: 1, last: 10 }));
        assert_eq!(parse_seeds("4"), Ok(SeedRange { first: 4, last: 4 }));
        assert!(parse_seeds("5:1").is_err());
        assert!(parse_seeds("a:3").is_err());
    }

    #[test]
    fn cli_shape() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
