//! Risk–coverage analysis.
//!
//! Instances are ranked by κ, highest first. Instances sharing a κ value
//! form a block that no threshold can split, so inside a block the curve
//! carries the expected error count under a uniformly random order of the
//! block: errors accrue pro-rata to the block's error rate. Block ends are
//! the coverages a thresholded selector can realize exactly.

use std::io::Write;

use crate::error::{Error, Result};
use crate::kappa::ScoreVector;
use crate::stats::neumaier_sum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcPoint {
    /// Instances with κ ≥ threshold are accepted.
    pub threshold: f64,
    pub coverage: f64,
    pub risk: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RcCurve {
    n: usize,
    points: Vec<RcPoint>,
    /// Expected error count among the top `i + 1` instances.
    cumulative_errors: Vec<f64>,
    /// Indices into `points` where a tie block ends.
    block_ends: Vec<usize>,
}

impl RcCurve {
    pub fn n(&self) -> usize {
        self.n
    }

    /// One point per instance on the coverage grid `i / n`, `i = 1..=n`.
    pub fn points(&self) -> &[RcPoint] {
        &self.points
    }

    /// Points realizable by a threshold on κ (the end of every tie block).
    pub fn threshold_points(&self) -> impl Iterator<Item = &RcPoint> + '_ {
        self.block_ends.iter().map(|&j| &self.points[j])
    }

    /// Expected error count when the top `k` instances are selected; `k` may
    /// be fractional.
    fn expected_errors(&self, k: f64) -> f64 {
        let below = k.floor() as usize;
        let frac = k - below as f64;
        let at = |i: usize| if i == 0 { 0.0 } else { self.cumulative_errors[i - 1] };
        if frac == 0.0 || below >= self.n {
            return at(below.min(self.n));
        }
        at(below) + frac * (at(below + 1) - at(below))
    }

    /// Selective risk at an arbitrary coverage in `(0, 1]`.
    pub fn risk_at(&self, coverage: f64) -> Result<f64> {
        if !(coverage > 0.0 && coverage <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "coverage {coverage} outside (0, 1]"
            )));
        }
        let mut k = coverage * self.n as f64;
        if (k - k.round()).abs() < 1e-9 * k.max(1.0) {
            k = k.round();
        }
        if k <= 1.0 {
            // below one instance the risk is the top block's error rate
            return Ok(self.cumulative_errors[0]);
        }
        Ok(self.expected_errors(k) / k)
    }

    /// Writes `threshold,coverage,risk` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["threshold", "coverage", "risk"])?;
        for p in &self.points {
            w.write_record([
                p.threshold.to_string(),
                p.coverage.to_string(),
                p.risk.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<rc csv>", e))?;
        Ok(())
    }
}

pub fn rc_curve(sv: &ScoreVector) -> Result<RcCurve> {
    let n = sv.len();
    if n == 0 {
        return Err(Error::InvalidArgument("RC curve of an empty score vector".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sv.scores[b].total_cmp(&sv.scores[a]));

    let mut points = Vec::with_capacity(n);
    let mut cumulative_errors = Vec::with_capacity(n);
    let mut block_ends = Vec::new();
    let mut errors_before = 0usize;
    let mut start = 0;
    while start < n {
        let threshold = sv.scores[order[start]];
        let mut end = start;
        let mut block_errors = 0usize;
        while end < n && sv.scores[order[end]] == threshold {
            block_errors += usize::from(!sv.correct[order[end]]);
            end += 1;
        }
        let size = (end - start) as f64;
        for i in start + 1..=end {
            let within = ((i - start) * block_errors) as f64 / size;
            let expected = errors_before as f64 + within;
            let risk = if start == 0 {
                // top block: the risk is the block's error rate at every depth
                block_errors as f64 / size
            } else {
                expected / i as f64
            };
            cumulative_errors.push(expected);
            points.push(RcPoint {
                threshold,
                coverage: i as f64 / n as f64,
                risk,
            });
        }
        block_ends.push(end - 1);
        errors_before += block_errors;
        start = end;
    }
    Ok(RcCurve {
        n,
        points,
        cumulative_errors,
        block_ends,
    })
}

/// Mean selective risk over the per-instance coverage grid.
pub fn aurc(curve: &RcCurve) -> f64 {
    neumaier_sum(curve.points.iter().map(|p| p.risk)) / curve.n as f64
}

/// AURC of `n` instances with `correct` of them ranked above every error.
pub fn optimal_aurc_counts(correct: usize, n: usize) -> f64 {
    neumaier_sum((correct + 1..=n).map(|i| (i - correct) as f64 / i as f64)) / n as f64
}

/// AURC of a perfectly ranked model with the given accuracy over `n` instances.
pub fn optimal_aurc(accuracy: f64, n: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&accuracy) {
        return Err(Error::InvalidArgument(format!(
            "accuracy {accuracy} outside [0, 1]"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let correct = (accuracy * n as f64).round() as usize;
    Ok(optimal_aurc_counts(correct, n))
}

/// AURC in excess of the perfectly ranked model with identical correctness.
pub fn e_aurc(sv: &ScoreVector) -> Result<f64> {
    let curve = rc_curve(sv)?;
    Ok(aurc(&curve) - optimal_aurc_counts(sv.num_correct(), sv.len()))
}

/// Mean selective risk over a fixed set of coverages.
pub fn aurc_over_coverages(curve: &RcCurve, coverages: &[f64]) -> Result<f64> {
    if coverages.is_empty() {
        return Err(Error::InvalidArgument("empty coverage set".into()));
    }
    let mut total = 0.0;
    for &c in coverages {
        total += curve.risk_at(c)?;
    }
    Ok(total / coverages.len() as f64)
}

/// Largest threshold-realizable coverage whose selective accuracy meets
/// `target`; 0 when none does.
pub fn sac_coverage(curve: &RcCurve, target: f64) -> f64 {
    let mut best = 0.0;
    for (&j, p) in curve.block_ends.iter().zip(curve.threshold_points()) {
        let selected = (j + 1) as f64;
        let accuracy = (selected - curve.cumulative_errors[j]) / selected;
        if accuracy + 1e-12 >= target && p.coverage > best {
            best = p.coverage;
        }
    }
    best
}
