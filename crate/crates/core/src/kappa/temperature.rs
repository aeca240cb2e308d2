//! Temperature scaling: one scalar `T` dividing every logit, fitted by
//! minimizing mean NLL on a calibration split.
//!
//! The objective is searched over `ln T` in `[ln 0.01, ln 100]`: a 50-point
//! grid locates the best cell, golden-section search refines inside the
//! neighbouring cells, and `T = 1` is always a candidate so the fit never
//! ends above the unscaled NLL.

use serde::{Deserialize, Serialize};

use super::functions::log_sum_exp;
use crate::error::{Error, Result};
use crate::predlog::{LogKind, PredictionLog, SplitAssignment};

pub const MIN_TEMPERATURE: f64 = 0.01;
pub const MAX_TEMPERATURE: f64 = 100.0;
const GRID_POINTS: usize = 50;
const LN_T_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureFit {
    pub temperature: f64,
    pub nll_before: f64,
    pub nll_after: f64,
    pub split_seed: u64,
    pub calibration_size: usize,
    pub test_size: usize,
}

/// Mean NLL of `indices` at temperature `t`; requires a single-pass logits log.
pub fn mean_nll_at(log: &PredictionLog, indices: &[usize], t: f64) -> f64 {
    let total: f64 = indices
        .iter()
        .map(|&i| {
            let z = log.row(i, 0);
            log_sum_exp(z, t) - z[log.label(i) as usize] / t
        })
        .sum();
    total / indices.len() as f64
}

pub fn fit_temperature(log: &PredictionLog, split: &SplitAssignment) -> Result<TemperatureFit> {
    if log.kind() != LogKind::Logits {
        return Err(Error::IncompatibleKind {
            op: "temperature fitting",
            kind: log.kind(),
        });
    }
    if log.passes() != 1 {
        return Err(Error::InvalidArgument(
            "temperature fitting needs a single-pass log".into(),
        ));
    }
    let calib = &split.calibration;
    if calib.is_empty() {
        return Err(Error::InvalidArgument("empty calibration split".into()));
    }
    if let Some(&bad) = calib.iter().find(|&&i| i >= log.len()) {
        return Err(Error::InvalidArgument(format!(
            "calibration index {bad} out of range"
        )));
    }

    let objective = |ln_t: f64| mean_nll_at(log, calib, ln_t.exp());
    let lo = MIN_TEMPERATURE.ln();
    let hi = MAX_TEMPERATURE.ln();
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let grid: Vec<(f64, f64)> = (0..GRID_POINTS)
        .map(|j| {
            let u = lo + step * j as f64;
            (u, objective(u))
        })
        .collect();
    let best = (0..GRID_POINTS)
        .min_by(|&a, &b| grid[a].1.total_cmp(&grid[b].1))
        .unwrap();
    let a = grid[best.saturating_sub(1)].0;
    let b = grid[(best + 1).min(GRID_POINTS - 1)].0;
    let refined = golden_section(&objective, a, b);

    let nll_before = objective(0.0);
    let candidates = [
        (refined, objective(refined)),
        grid[best],
        (0.0, nll_before),
    ];
    let (ln_t, nll_after) = candidates
        .into_iter()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap();

    Ok(TemperatureFit {
        temperature: ln_t.exp(),
        nll_before,
        nll_after,
        split_seed: split.seed,
        calibration_size: calib.len(),
        test_size: split.test.len(),
    })
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > LN_T_TOLERANCE {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn split_all(n: usize) -> SplitAssignment {
        SplitAssignment {
            calibration: (0..n).collect(),
            test: Vec::new(),
            seed: 0,
        }
    }

    /// Two-class log whose optimal temperature is known in closed form:
    /// every row has logit gap `g` and a fraction `q` of rows are correct,
    /// so the NLL minimizer satisfies `sigmoid(g / T) = q`.
    fn gap_log(g: f64, correct: usize, wrong: usize) -> PredictionLog {
        let n = correct + wrong;
        let labels = (0..n).map(|i| if i < correct { 0 } else { 1 }).collect();
        let values = (0..n).flat_map(|_| [g, 0.0]).collect();
        PredictionLog::new(LogKind::Logits, 2, 1, labels, values).unwrap()
    }

    #[test]
    fn recovers_closed_form_temperature() {
        let g = 4.0;
        let log = gap_log(g, 80, 20);
        let fit = fit_temperature(&log, &split_all(100)).unwrap();
        let expected = g / (0.8f64 / 0.2).ln();
        assert!((fit.temperature - expected).abs() < 1e-5, "{fit:?}");
        assert!(fit.nll_after <= fit.nll_before + 1e-9);
    }

    #[test]
    fn clamps_to_domain_edge() {
        // all correct: NLL keeps falling as T shrinks
        let log = gap_log(1.0, 10, 0);
        let fit = fit_temperature(&log, &split_all(10)).unwrap();
        assert!((fit.temperature - MIN_TEMPERATURE).abs() < 1e-4);
    }

    #[test]
    fn deterministic() {
        let log = gap_log(2.5, 70, 30);
        let a = fit_temperature(&log, &split_all(100)).unwrap();
        let b = fit_temperature(&log, &split_all(100)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn refuses_non_logits_and_empty_split() {
        let probs = PredictionLog::new(LogKind::Probs, 2, 1, vec![0], vec![0.6, 0.4]).unwrap();
        assert!(matches!(
            fit_temperature(&probs, &split_all(1)),
            Err(Error::IncompatibleKind { .. })
        ));
        let log = gap_log(1.0, 2, 2);
        let empty = SplitAssignment {
            calibration: vec![],
            test: (0..4).collect(),
            seed: 0,
        };
        assert!(fit_temperature(&log, &empty).is_err());
    }
}
