//! Rank statistics over experiment records: the not-transferred and
//! transferred comparisons, their rank inversion, and per-mission drops.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::harness::{Context, FailedCell, PerformanceRecord};
use crate::stats::{friedman, FriedmanResult, RankTable};

pub const REPORT_SCHEMA: &str = "swarmbench-transfer-report-v1";

#[derive(Debug, Error, PartialEq)]
pub enum ReportError {
    #[error("no records to report on")]
    Empty,
    #[error("record has unknown context `{0}`")]
    Context(String),
    #[error("incomplete coverage: {0}")]
    Coverage(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreatmentRank {
    pub treatment: String,
    pub avg_rank: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankSummary {
    pub blocks: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub better_is_lower_rank: bool,
    pub treatments: Vec<TreatmentRank>,
}

impl RankSummary {
    fn from_result(names: &[String], blocks: usize, r: &FriedmanResult) -> Self {
        Self {
            blocks,
            statistic: r.statistic,
            p_value: r.p_value,
            better_is_lower_rank: r.better_is_lower_rank,
            treatments: names
                .iter()
                .zip(r.avg_ranks.iter().zip(&r.ci_halfwidth))
                .map(|(n, (&rank, &h))| TreatmentRank {
                    treatment: n.clone(),
                    avg_rank: rank,
                    ci_low: rank - h,
                    ci_high: rank + h,
                })
                .collect(),
        }
    }

    /// Treatment names from best to worst average rank.
    pub fn ordering(&self) -> Vec<String> {
        let mut t = self.treatments.clone();
        t.sort_by(|a, b| a.avg_rank.total_cmp(&b.avg_rank).then(a.treatment.cmp(&b.treatment)));
        t.into_iter().map(|t| t.treatment).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DropEntry {
    pub method: String,
    pub mission: String,
    pub reference_mean: f64,
    pub other_mean: f64,
    /// `reference_mean − other_mean`; positive means performance was lost.
    pub drop: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferReport {
    pub schema: String,
    pub methods: Vec<String>,
    pub platforms: Vec<String>,
    pub missions: Vec<String>,
    /// Methods ranked on their own platform, blocks = (mission, instance).
    pub nt: Option<RankSummary>,
    /// Methods ranked after transfer.
    pub tt: Option<RankSummary>,
    /// Method × design platform, not transferred.
    pub by_platform: Option<RankSummary>,
    /// Method × context (NT, TT) in one ranking.
    pub by_context: Option<RankSummary>,
    /// Whether the method ordering differs between `nt` and `tt`.
    pub rank_inversion: Option<bool>,
    pub transfer_drops: Vec<DropEntry>,
    pub pseudo_reality_drops: Vec<DropEntry>,
    pub observed_outcome: String,
    pub failed_cells: Vec<FailedCell>,
    /// Rank tables that could not be built, with the reason.
    pub notes: Vec<String>,
}

type Key = (String, String, usize); // (method or treatment, mission, instance)

struct Scores {
    /// (method, design_platform, mission, instance, context) → scores
    values: BTreeMap<(String, String, String, usize, Context), Vec<f64>>,
}

impl Scores {
    fn mean_over_platforms(&self, context: Context) -> BTreeMap<Key, f64> {
        let mut acc: BTreeMap<Key, Vec<f64>> = BTreeMap::new();
        for ((m, _, mission, inst, ctx), v) in &self.values {
            if *ctx == context {
                acc.entry((m.clone(), mission.clone(), *inst)).or_default().extend(v);
            }
        }
        acc.into_iter().map(|(k, v)| (k, mean(&v))).collect()
    }

    fn per_platform(&self, context: Context) -> BTreeMap<Key, f64> {
        self.values
            .iter()
            .filter(|(k, _)| k.4 == context)
            .map(|((m, p, mission, inst, _), v)| ((format!("{m}@{p}"), mission.clone(), *inst), mean(v)))
            .collect()
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Build a rank table from `treatment → (mission, instance) → score`, using
/// only blocks every treatment covers.
fn rank(entries: &BTreeMap<Key, f64>, treatments: &[String]) -> Result<RankSummary, String> {
    if treatments.len() < 2 {
        return Err(format!("needs at least 2 treatments, have {}", treatments.len()));
    }
    let blocks: BTreeSet<(String, usize)> = entries.keys().map(|(_, m, i)| (m.clone(), *i)).collect();
    let mut rows = Vec::new();
    for (mission, inst) in &blocks {
        let row: Option<Vec<f64>> = treatments
            .iter()
            .map(|t| entries.get(&(t.clone(), mission.clone(), *inst)).copied())
            .collect();
        match row {
            Some(r) => rows.push(r),
            None => return Err(format!("block ({mission}, {inst}) is missing a treatment")),
        }
    }
    let table = RankTable {
        treatments: treatments.to_vec(),
        blocks: rows,
    };
    let result = friedman(&table).map_err(|e| e.to_string())?;
    Ok(RankSummary::from_result(treatments, table.blocks.len(), &result))
}

fn drops(reference: &BTreeMap<Key, f64>, other: &BTreeMap<Key, f64>) -> Vec<DropEntry> {
    let mut acc: BTreeMap<(String, String), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (k, &v) in reference {
        if let Some(&o) = other.get(k) {
            let e = acc.entry((k.0.clone(), k.1.clone())).or_default();
            e.0.push(v);
            e.1.push(o);
        }
    }
    acc.into_iter()
        .map(|((method, mission), (r, o))| {
            let (rm, om) = (mean(&r), mean(&o));
            DropEntry {
                method,
                mission,
                reference_mean: rm,
                other_mean: om,
                drop: rm - om,
            }
        })
        .collect()
}

/// Drops closer than this count as equal.
const DROP_TIE: f64 = 1e-9;

/// How the fsm and ann drops compare across missions: (fsm smaller, ann
/// smaller, tied).
fn compare_drops(drops: &[DropEntry]) -> (usize, usize, usize) {
    let missions: BTreeSet<&str> = drops.iter().map(|d| d.mission.as_str()).collect();
    let mut counts = (0, 0, 0);
    for mission in missions {
        let get = |m: &str| drops.iter().find(|d| d.method == m && d.mission == mission).map(|d| d.drop);
        if let (Some(f), Some(a)) = (get("fsm"), get("ann")) {
            if (f - a).abs() <= DROP_TIE {
                counts.2 += 1;
            } else if f < a {
                counts.0 += 1;
            } else {
                counts.1 += 1;
            }
        }
    }
    counts
}

fn describe(label: &str, drops: &[DropEntry]) -> Option<String> {
    let (fsm, ann, tied) = compare_drops(drops);
    let compared = fsm + ann + tied;
    if compared == 0 {
        return None;
    }
    if drops.iter().all(|d| d.drop.abs() <= DROP_TIE) {
        return Some(format!("{label} drop is zero for every method and mission"));
    }
    let verdict = if 2 * fsm > compared {
        "consistent with"
    } else {
        "not consistent with"
    };
    Some(format!(
        "{label} drop smaller for fsm in {fsm}, for ann in {ann}, tied in {tied} of {compared} missions, {verdict} fsm transferring better than ann"
    ))
}

fn outcome(transfer: &[DropEntry], pseudo_reality: &[DropEntry], inversion: Option<bool>) -> String {
    let mut parts: Vec<String> = [describe("transfer", transfer), describe("pseudo-reality", pseudo_reality)]
        .into_iter()
        .flatten()
        .collect();
    match inversion {
        Some(true) => parts.push("method ranking inverts between NT and TT".into()),
        Some(false) => parts.push("method ranking is the same in NT and TT".into()),
        None => {}
    }
    if parts.is_empty() {
        "not enough coverage to compare methods".into()
    } else {
        parts.join("; ")
    }
}

/// Summarise a record set. Pure: record order does not matter.
pub fn transfer_report(records: &[PerformanceRecord], failed_cells: &[FailedCell]) -> Result<TransferReport, ReportError> {
    if records.is_empty() {
        return Err(ReportError::Empty);
    }
    let mut values: BTreeMap<_, Vec<f64>> = BTreeMap::new();
    for r in records {
        let ctx: Context = r.context.parse().map_err(|_| ReportError::Context(r.context.clone()))?;
        values
            .entry((r.method.clone(), r.design_platform.clone(), r.mission.clone(), r.instance, ctx))
            .or_default()
            .push(r.score);
    }
    let scores = Scores { values };
    let methods: Vec<String> = records.iter().map(|r| r.method.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let platforms: Vec<String> = records
        .iter()
        .map(|r| r.design_platform.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let missions: Vec<String> = records.iter().map(|r| r.mission.clone()).collect::<BTreeSet<_>>().into_iter().collect();

    let nt_scores = scores.mean_over_platforms(Context::DesignPlatformEval);
    let tt_scores = scores.mean_over_platforms(Context::TransferredEval);
    let pr_scores = scores.mean_over_platforms(Context::PseudoRealityEval);
    if nt_scores.is_empty() {
        return Err(ReportError::Coverage("no design-platform evaluations".into()));
    }

    let mut notes = Vec::new();
    fn attempt(notes: &mut Vec<String>, label: &str, r: Result<RankSummary, String>) -> Option<RankSummary> {
        r.map_err(|e| notes.push(format!("{label}: {e}"))).ok()
    }
    let nt = attempt(&mut notes, "nt", rank(&nt_scores, &methods));
    let tt = if tt_scores.is_empty() {
        notes.push("tt: no transferred evaluations".into());
        None
    } else {
        attempt(&mut notes, "tt", rank(&tt_scores, &methods))
    };
    let by_platform = {
        let per = scores.per_platform(Context::DesignPlatformEval);
        let names: Vec<String> = per.keys().map(|k| k.0.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        attempt(&mut notes, "by_platform", rank(&per, &names))
    };
    let by_context = if tt_scores.is_empty() {
        None
    } else {
        let mut combined = BTreeMap::new();
        for ((m, mission, inst), v) in &nt_scores {
            combined.insert((format!("{m}:NT"), mission.clone(), *inst), *v);
        }
        for ((m, mission, inst), v) in &tt_scores {
            combined.insert((format!("{m}:TT"), mission.clone(), *inst), *v);
        }
        let names: Vec<String> = methods.iter().flat_map(|m| [format!("{m}:NT"), format!("{m}:TT")]).collect();
        attempt(&mut notes, "by_context", rank(&combined, &names))
    };
    let rank_inversion = match (&nt, &tt) {
        (Some(a), Some(b)) => Some(a.ordering() != b.ordering()),
        _ => None,
    };
    let transfer_drops = drops(&nt_scores, &tt_scores);
    let pseudo_reality_drops = drops(&nt_scores, &pr_scores);
    let observed_outcome = outcome(&transfer_drops, &pseudo_reality_drops, rank_inversion);

    Ok(TransferReport {
        schema: REPORT_SCHEMA.into(),
        methods,
        platforms,
        missions,
        nt,
        tt,
        by_platform,
        by_context,
        rank_inversion,
        transfer_drops,
        pseudo_reality_drops,
        observed_outcome,
        failed_cells: failed_cells.to_vec(),
        notes,
    })
}

impl TransferReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    /// `treatment,avg_rank,ci_low,ci_high`, treatment names prefixed by
    /// their table (`nt/`, `tt/`, `by_platform/`, `by_context/`).
    pub fn write_plot_data<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["treatment", "avg_rank", "ci_low", "ci_high"])?;
        let tables = [
            ("nt", &self.nt),
            ("tt", &self.tt),
            ("by_platform", &self.by_platform),
            ("by_context", &self.by_context),
        ];
        for (label, table) in tables {
            let Some(table) = table else { continue };
            for t in &table.treatments {
                w.write_record([
                    format!("{label}/{}", t.treatment),
                    t.avg_rank.to_string(),
                    t.ci_low.to_string(),
                    t.ci_high.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(method: &str, design: &str, mission: &str, instance: usize, context: Context, score: f64) -> PerformanceRecord {
        let eval = if context == Context::TransferredEval {
            if design == "epuck" { "mercator" } else { "epuck" }
        } else {
            design
        };
        PerformanceRecord {
            method: method.into(),
            design_platform: design.into(),
            eval_platform: eval.into(),
            mission: mission.into(),
            instance,
            context: context.name().into(),
            score,
        }
    }

    /// `nt(method)` and `tt(method)` give the score per context.
    fn records(nt: impl Fn(&str) -> f64, tt: impl Fn(&str) -> f64) -> Vec<PerformanceRecord> {
        let mut out = Vec::new();
        for method in ["fsm", "ann"] {
            for design in ["epuck", "mercator"] {
                for mission in ["aggregation", "foraging", "grid-exploration"] {
                    for i in 0..4 {
                        let jitter = i as f64 * 1e-3;
                        out.push(rec(method, design, mission, i, Context::DesignPlatformEval, nt(method) + jitter));
                        out.push(rec(method, design, mission, i, Context::TransferredEval, tt(method) + jitter));
                    }
                }
            }
        }
        out
    }

    #[test]
    fn constructed_inversion() {
        let r = records(|m| if m == "fsm" { 0.9 } else { 0.5 }, |m| if m == "fsm" { 0.1 } else { 0.4 });
        let report = transfer_report(&r, &[]).unwrap();
        assert_eq!(report.rank_inversion, Some(true));
        let nt = report.nt.as_ref().unwrap();
        assert_eq!(nt.ordering(), vec!["fsm", "ann"]);
        assert_eq!(nt.blocks, 12);
        assert_eq!(report.tt.as_ref().unwrap().ordering(), vec!["ann", "fsm"]);
        assert_eq!(report.by_context.as_ref().unwrap().treatments.len(), 4);
        assert_eq!(report.by_platform.as_ref().unwrap().treatments.len(), 4);
        let fsm_drop = report.transfer_drops.iter().find(|d| d.method == "fsm").unwrap();
        assert!((fsm_drop.drop - 0.8).abs() < 1e-12);
        assert!(
            report.observed_outcome.contains("for fsm in 0, for ann in 3, tied in 0 of 3"),
            "{}",
            report.observed_outcome
        );
    }

    #[test]
    fn identical_contexts_no_inversion() {
        let score = |m: &str| if m == "fsm" { 0.7 } else { 0.3 };
        let report = transfer_report(&records(score, score), &[]).unwrap();
        assert_eq!(report.rank_inversion, Some(false));
        assert!(report.transfer_drops.iter().all(|d| d.drop == 0.0));
        assert_eq!(report.transfer_drops.len(), 6);
        assert!(report.observed_outcome.starts_with("transfer drop is zero"), "{}", report.observed_outcome);
    }

    #[test]
    fn record_order_does_not_matter() {
        let mut r = records(|m| if m == "fsm" { 0.9 } else { 0.5 }, |m| if m == "fsm" { 0.2 } else { 0.4 });
        let a = transfer_report(&r, &[]).unwrap();
        r.reverse();
        r.swap(3, 17);
        let b = transfer_report(&r, &[]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn single_method_slice() {
        let r: Vec<_> = records(|_| 0.5, |_| 0.4).into_iter().filter(|r| r.method == "fsm").collect();
        let report = transfer_report(&r, &[]).unwrap();
        assert!(report.nt.is_none() && report.tt.is_none());
        assert_eq!(report.rank_inversion, None);
        assert_eq!(report.transfer_drops.len(), 3);
        assert!(!report.notes.is_empty());
        assert_eq!(transfer_report(&[], &[]), Err(ReportError::Empty));
    }

    #[test]
    fn json_and_plot_data_shape() {
        let report = transfer_report(&records(|_| 0.5, |_| 0.4), &[]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(v["schema"], REPORT_SCHEMA);
        for key in ["nt", "tt", "by_platform", "by_context"] {
            let t = &v[key]["treatments"];
            assert!(t.as_array().unwrap().len() >= 2, "{key}");
            assert!(t[0]["ci_low"].as_f64().unwrap() <= t[0]["avg_rank"].as_f64().unwrap());
        }
        assert!(v["rank_inversion"].is_boolean());
        let mut buf = Vec::new();
        report.write_plot_data(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("treatment,avg_rank,ci_low,ci_high\n"));
        assert!(text.contains("by_context/fsm:TT,"));
        assert_eq!(text.lines().count(), 1 + 2 + 2 + 4 + 4);
    }
}
