use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn swarmbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swarmbench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SLICE: &str = "\
methods = ann
missions = aggregation
instances_per_cell = 1
design_budget = 20
eval_seeds_per_context = 2
mission_duration = 2.0
es_population = 4
es_elites = 2
es_seeds_per_generation = 2
parallelism = 1
";

#[test]
fn version_and_help() {
    let o = swarmbench(&["--version"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("swarmbench "));
    assert_eq!(swarmbench(&[]).status.code(), Some(2));
}

#[test]
fn design_is_reproducible() {
    let dir = tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for (out, threads) in [(&a, "1"), (&b, "2")] {
        let o = swarmbench(&[
            "design", "--method", "fsm", "--mission", "aggregation", "--platform", "epuck",
            "--budget", "100", "--seed", "5", "--threads", threads, "--out", path(out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let log = fs::read_to_string(dir.path().join("a.txt.log.csv")).unwrap();
    assert!(log.lines().count() > 1);
    assert!(fs::read_to_string(&a).unwrap().starts_with("# fsm-v1"));
}

#[test]
fn bad_arguments_exit_with_usage_code() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("c.txt");
    let o = swarmbench(&[
        "design", "--method", "bogus", "--mission", "foraging", "--platform", "epuck", "--out", path(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));

    let junk = dir.path().join("junk.txt");
    fs::write(&junk, "not a controller\n").unwrap();
    let o = swarmbench(&["evaluate", "--controller", path(&junk), "--mission", "foraging", "--platform", "epuck"]);
    assert_eq!(o.status.code(), Some(2));

    let o = swarmbench(&[
        "evaluate", "--controller", path(&dir.path().join("missing.txt")), "--mission", "foraging", "--platform", "epuck",
    ]);
    assert_eq!(o.status.code(), Some(2));

    let o = swarmbench(&["report", path(&dir.path().join("records.csv"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stopped_swarm_on_target_scores_one() {
    let dir = tempdir().unwrap();
    let ctrl = dir.path().join("stop.txt");
    fs::write(&ctrl, "# fsm-v1\n--nstates 1 --s0 stop --n0 0\n").unwrap();
    let traces = dir.path().join("traces");
    let o = swarmbench(&[
        "evaluate", "--controller", path(&ctrl), "--mission", "aggregation", "--platform", "mercator",
        "--seeds", "1:10", "--start-on-target", "--trace-dir", path(&traces),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "seed,score");
    assert_eq!(lines.len(), 12);
    for row in &lines[1..11] {
        assert!(row.ends_with(",1.0"), "{row}");
    }
    assert_eq!(lines[11], "mean,1.0");
    assert_eq!(fs::read_dir(&traces).unwrap().count(), 10);
}

#[test]
fn transfer_slice_writes_report_and_resumes() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, SLICE).unwrap();
    let out = dir.path().join("out");
    let o = swarmbench(&["transfer", "--config", path(&cfg), "--out", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["config.txt", "records.csv", "report.json", "plot_data.csv"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let records = fs::read_to_string(out.join("records.csv")).unwrap();
    // 2 cells, each scored in 2 contexts over 2 seeds
    assert_eq!(records.lines().count(), 1 + 2 * 2);
    let report = fs::read_to_string(out.join("report.json")).unwrap();
    assert!(report.contains("\"swarmbench-transfer-report-v1\""));
    assert!(report.contains("\"ann\""));

    let o = swarmbench(&["transfer", "--config", path(&cfg), "--out", path(&out)]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(out.join("records.csv")).unwrap(), records);

    let again = dir.path().join("again");
    let o = swarmbench(&["report", path(&out.join("records.csv")), "--out", path(&again)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(again.join("report.json")).unwrap(), report);
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "methods = fsm\nbudget = 3\n").unwrap();
    let o = swarmbench(&["transfer", "--config", path(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}
