//! Brute-force reference implementations.
//!
//! Each oracle recomputes a metric from its definition with no sorting
//! tricks, usually in quadratic time. They back the equivalence tests and
//! the `oracle` CLI command; use the `metrics` functions for real work.

use crate::error::{Error, Result};
use crate::kappa::ScoreVector;
use crate::stats::neumaier_sum;

/// Counts over (correct, incorrect) pairs: κ higher on the correct one
/// (concordant), lower (discordant), or equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairCounts {
    pub concordant: u64,
    pub discordant: u64,
    pub tied: u64,
}

pub fn pair_counts(sv: &ScoreVector) -> PairCounts {
    let mut counts = PairCounts {
        concordant: 0,
        discordant: 0,
        tied: 0,
    };
    for (i, &si) in sv.scores.iter().enumerate() {
        if !sv.correct[i] {
            continue;
        }
        for (j, &sj) in sv.scores.iter().enumerate() {
            if sv.correct[j] {
                continue;
            }
            if si > sj {
                counts.concordant += 1;
            } else if si < sj {
                counts.discordant += 1;
            } else {
                counts.tied += 1;
            }
        }
    }
    counts
}

/// AUROC by exhaustive pair counting, ties worth one half.
pub fn auroc_pairs(sv: &ScoreVector) -> Result<f64> {
    let positives = sv.correct.iter().filter(|&&c| c).count();
    let negatives = sv.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::Undefined("one class of the pair count is empty".into()));
    }
    let c = pair_counts(sv);
    let doubled = 2 * c.concordant + c.tied;
    Ok((doubled as f64 / 2.0) / (positives as f64 * negatives as f64))
}

/// `c / (c + d)` over untied pairs.
pub fn concordance_ratio(sv: &ScoreVector) -> Result<f64> {
    let c = pair_counts(sv);
    if c.concordant + c.discordant == 0 {
        return Err(Error::Undefined("no untied pairs".into()));
    }
    Ok(c.concordant as f64 / (c.concordant + c.discordant) as f64)
}

/// Goodman–Kruskal `(c - d) / (c + d)`.
pub fn gamma_pairs(sv: &ScoreVector) -> Result<f64> {
    let c = pair_counts(sv);
    if c.concordant + c.discordant == 0 {
        return Err(Error::Undefined("no untied pairs".into()));
    }
    let (cc, dd) = (c.concordant as f64, c.discordant as f64);
    Ok((cc - dd) / (cc + dd))
}

fn distinct_descending(scores: &[f64]) -> Vec<f64> {
    let mut t = scores.to_vec();
    t.sort_by(|a, b| b.total_cmp(a));
    t.dedup();
    t
}

/// AURC by enumerating thresholds: every threshold `t` selects `{κ ≥ t}`,
/// whose members are counted by a full scan. Valid for tie-free scores,
/// where thresholds and the per-instance coverage grid coincide.
pub fn aurc_threshold_enumeration(sv: &ScoreVector) -> Result<f64> {
    if sv.is_empty() {
        return Err(Error::InvalidArgument("empty score vector".into()));
    }
    let thresholds = distinct_descending(&sv.scores);
    if thresholds.len() != sv.len() {
        return Err(Error::InvalidArgument("threshold enumeration needs tie-free scores".into()));
    }
    let risks = thresholds.iter().map(|&t| {
        let mut selected = 0usize;
        let mut errors = 0usize;
        for (s, &c) in sv.scores.iter().zip(&sv.correct) {
            if *s >= t {
                selected += 1;
                errors += usize::from(!c);
            }
        }
        errors as f64 / selected as f64
    });
    Ok(neumaier_sum(risks) / sv.len() as f64)
}

/// AURC with ties: the risk at depth `k` is the expected error fraction of
/// the top `k` when each tie block is ordered uniformly at random.
pub fn aurc_expected_risk(sv: &ScoreVector) -> Result<f64> {
    let n = sv.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty score vector".into()));
    }
    let thresholds = distinct_descending(&sv.scores);
    let top = thresholds[0];
    let risks = (1..=n).map(|k| {
        // the block holding position k
        let mut block = None;
        for &t in &thresholds {
            let through = sv.scores.iter().filter(|&&s| s >= t).count();
            if through >= k {
                block = Some(t);
                break;
            }
        }
        let t = block.expect("k is within n");
        let (mut above, mut above_errors, mut size, mut block_errors) = (0, 0, 0, 0);
        for (&s, &c) in sv.scores.iter().zip(&sv.correct) {
            if s > t {
                above += 1;
                above_errors += usize::from(!c);
            } else if s == t {
                size += 1;
                block_errors += usize::from(!c);
            }
        }
        let rate = block_errors as f64 / size as f64;
        if t == top {
            rate
        } else {
            (above_errors as f64 + (k - above) as f64 * rate) / k as f64
        }
    });
    Ok(neumaier_sum(risks) / n as f64)
}

/// ECE in two passes: assign bins by scanning the edges `j / m`, then
/// accumulate per-bin accuracy and confidence.
pub fn ece_two_pass(sv: &ScoreVector, bins: usize) -> Result<f64> {
    if bins == 0 || sv.is_empty() {
        return Err(Error::InvalidArgument("ECE needs bins and instances".into()));
    }
    if sv.scores.iter().any(|s| !(0.0..=1.0).contains(s)) {
        return Err(Error::OutsideUnitInterval);
    }
    let m = bins as f64;
    let assigned: Vec<usize> = sv
        .scores
        .iter()
        .map(|&s| (1..=bins).find(|&j| s <= j as f64 / m).unwrap_or(bins) - 1)
        .collect();
    let n = sv.len() as f64;
    let mut total = 0.0;
    for b in 0..bins {
        let members: Vec<usize> = (0..sv.len()).filter(|&i| assigned[i] == b).collect();
        if members.is_empty() {
            continue;
        }
        let count = members.len() as f64;
        let hits = members.iter().filter(|&&i| sv.correct[i]).count() as f64;
        let confidence = neumaier_sum(members.iter().map(|&i| sv.scores[i])) / count;
        total += (count / n) * (hits / count - confidence).abs();
    }
    Ok(total)
}

/// Rank of each value counted directly: one plus the number of smaller
/// values plus half the number of equal others.
fn counted_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&x| {
            let less = v.iter().filter(|&&y| y < x).count() as f64;
            let equal = v.iter().filter(|&&y| y == x).count() as f64 - 1.0;
            1.0 + less + equal / 2.0
        })
        .collect()
}

/// Spearman ρ as the Pearson correlation of directly counted ranks.
pub fn spearman_naive(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument("need two equal-length samples of size ≥ 2".into()));
    }
    let rx = counted_ranks(xs);
    let ry = counted_ranks(ys);
    let n = rx.len() as f64;
    let sx: f64 = rx.iter().sum();
    let sy: f64 = ry.iter().sum();
    let sxy: f64 = rx.iter().zip(&ry).map(|(a, b)| a * b).sum();
    let sxx: f64 = rx.iter().map(|a| a * a).sum();
    let syy: f64 = ry.iter().map(|b| b * b).sum();
    let cov = sxy - sx * sy / n;
    let vx = sxx - sx * sx / n;
    let vy = syy - sy * sy / n;
    if vx <= 0.0 || vy <= 0.0 {
        return Err(Error::Undefined("zero variance".into()));
    }
    Ok(cov / (vx * vy).sqrt())
}

/// Arithmetic mean summed back to front.
pub fn mean_reverse(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("mean of nothing".into()));
    }
    Ok(values.iter().rev().sum::<f64>() / values.len() as f64)
}
