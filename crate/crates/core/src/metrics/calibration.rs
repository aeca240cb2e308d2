use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kappa::{ProbabilityView, ScoreVector};
use crate::stats::neumaier_sum;

pub const DEFAULT_BINS: usize = 15;

/// Bin `j` (0-based) covers `(j/m, (j+1)/m]`; a score of exactly 0 joins bin 0.
pub(crate) fn bin_index(score: f64, bins: usize) -> usize {
    let m = bins as f64;
    let mut j = ((score * m).ceil() as usize).clamp(1, bins);
    while j > 1 && score <= (j - 1) as f64 / m {
        j -= 1;
    }
    while j < bins && score > j as f64 / m {
        j += 1;
    }
    j - 1
}

/// Expected calibration error over `bins` equal-width bins.
pub fn ece(sv: &ScoreVector, bins: usize) -> Result<f64> {
    if bins == 0 {
        return Err(Error::InvalidArgument("ECE needs at least one bin".into()));
    }
    if sv.is_empty() {
        return Err(Error::InvalidArgument("ECE of an empty score vector".into()));
    }
    if sv.scores.iter().any(|s| !(0.0..=1.0).contains(s)) {
        return Err(Error::OutsideUnitInterval);
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); bins];
    for (i, &s) in sv.scores.iter().enumerate() {
        members[bin_index(s, bins)].push(i);
    }
    let n = sv.len() as f64;
    let gaps = members.iter().filter(|b| !b.is_empty()).map(|b| {
        let count = b.len() as f64;
        let accuracy = b.iter().filter(|&&i| sv.correct[i]).count() as f64 / count;
        let confidence = neumaier_sum(b.iter().map(|&i| sv.scores[i])) / count;
        (count / n) * (accuracy - confidence).abs()
    });
    Ok(gaps.sum())
}

/// Mean negative log-likelihood of the true class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nll {
    /// `+inf` when some true class received probability zero.
    pub value: f64,
    pub zero_probability_rows: usize,
}

pub fn nll(view: &ProbabilityView<'_>) -> Nll {
    let log = view.log();
    let mut probs = Vec::new();
    let mut zero = 0;
    let terms = (0..log.len()).map(|i| {
        view.probs_into(i, &mut probs);
        let term = view.true_class_nll(i, &probs);
        if term.is_infinite() {
            zero += 1;
        }
        term
    });
    let total: f64 = terms.sum();
    Nll {
        value: total / log.len() as f64,
        zero_probability_rows: zero,
    }
}

/// Mean squared distance between the probability vector and the one-hot truth.
pub fn brier(view: &ProbabilityView<'_>) -> f64 {
    let log = view.log();
    let mut probs = Vec::new();
    let mut total = 0.0;
    for i in 0..log.len() {
        view.probs_into(i, &mut probs);
        let y = log.label(i) as usize;
        total += probs
            .iter()
            .enumerate()
            .map(|(j, &p)| {
                let d = p - if j == y { 1.0 } else { 0.0 };
                d * d
            })
            .sum::<f64>();
    }
    total / log.len() as f64
}
