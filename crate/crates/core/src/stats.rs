//! Friedman two-way rank analysis with Conover's confidence intervals.
//!
//! Higher raw scores are better and receive lower ranks.

use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("a rank table needs at least 2 blocks and 2 treatments, got {blocks} x {treatments}")]
    Degenerate { blocks: usize, treatments: usize },
    #[error("block {block} has {found} entries, expected {expected}")]
    Ragged { block: usize, found: usize, expected: usize },
    #[error("block {block} treatment {treatment} is not a finite score")]
    NotFinite { block: usize, treatment: usize },
}

/// Raw scores, one row per block and one column per treatment.
#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    pub treatments: Vec<String>,
    pub blocks: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FriedmanResult {
    pub avg_ranks: Vec<f64>,
    pub ci_halfwidth: Vec<f64>,
    /// Friedman's T1.
    pub statistic: f64,
    /// Upper tail of χ²(k − 1) at `statistic`.
    pub p_value: f64,
    pub better_is_lower_rank: bool,
}

/// Ranks of one block, 1 for the highest score, ties sharing the mean of
/// the positions they span.
pub fn mid_ranks(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut ranks = vec![0.0; scores.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // Positions start+1 ..= end share their mean.
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

pub fn friedman(table: &RankTable) -> Result<FriedmanResult, StatsError> {
    let b = table.blocks.len();
    let k = table.blocks.first().map_or(table.treatments.len(), Vec::len);
    if b < 2 || k < 2 {
        return Err(StatsError::Degenerate { blocks: b, treatments: k });
    }
    let mut rank_sums = vec![0.0; k];
    let mut a = 0.0;
    for (i, row) in table.blocks.iter().enumerate() {
        if row.len() != k {
            return Err(StatsError::Ragged {
                block: i,
                found: row.len(),
                expected: k,
            });
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(StatsError::NotFinite { block: i, treatment: j });
        }
        for (j, r) in mid_ranks(row).into_iter().enumerate() {
            rank_sums[j] += r;
            a += r * r;
        }
    }
    let (bf, kf) = (b as f64, k as f64);
    let c = bf * kf * (kf + 1.0) * (kf + 1.0) / 4.0;
    let spread: f64 = rank_sums.iter().map(|r| (r - bf * (kf + 1.0) / 2.0).powi(2)).sum();
    let denom = a - c;
    // With every block fully tied, A equals C and there is nothing to test.
    let statistic = if denom <= 1e-9 * c { 0.0 } else { (kf - 1.0) * spread / denom };
    let p_value = if statistic == 0.0 {
        1.0
    } else {
        ChiSquared::new(kf - 1.0).expect("k >= 2").sf(statistic)
    };

    let df = (bf - 1.0) * (kf - 1.0);
    let t = StudentsT::new(0.0, 1.0, df).expect("df >= 1").inverse_cdf(0.975);
    let sum_sq: f64 = rank_sums.iter().map(|r| r * r).sum();
    let var = (2.0 * (a * bf - sum_sq) / (bf * bf * df)).max(0.0);
    let half = t * var.sqrt() / 2.0;

    Ok(FriedmanResult {
        avg_ranks: rank_sums.iter().map(|r| r / bf).collect(),
        ci_halfwidth: vec![half; k],
        statistic,
        p_value,
        better_is_lower_rank: true,
    })
}
