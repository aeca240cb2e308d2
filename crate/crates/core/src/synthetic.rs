//! Seeded constructors for fixture logs, score vectors and class pools.
//!
//! Everything the test suites evaluate is generated here, so no external
//! model output is needed to exercise the engine.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::coodgen::{ClassPool, PoolClass};
use crate::error::Result;
use crate::kappa::{KappaSpec, ScoreVector};
use crate::predlog::{LogKind, PredictionLog};

pub const INVESTMENT_ROWS: usize = 10_000;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Three-class probability log: `correct` rows predict class 0 with label 0,
/// the rest predict class 0 with label 1.
fn two_row_log(correct: usize, total: usize, hit: [f64; 3], miss: [f64; 3]) -> PredictionLog {
    let mut labels = Vec::with_capacity(total);
    let mut values = Vec::with_capacity(total * 3);
    for i in 0..total {
        if i < correct {
            labels.push(0);
            values.extend_from_slice(&hit);
        } else {
            labels.push(1);
            values.extend_from_slice(&miss);
        }
    }
    PredictionLog::new(LogKind::Probs, 3, 1, labels, values).expect("fixture rows are valid")
}

/// 95% accurate, every prediction at confidence 0.95.
pub fn investment_model_a() -> PredictionLog {
    let p = [0.95, 0.025, 0.025];
    two_row_log(9_500, INVESTMENT_ROWS, p, p)
}

/// 40% accurate at confidence 0.6, wrong predictions at confidence 0.4.
pub fn investment_model_b() -> PredictionLog {
    two_row_log(4_000, INVESTMENT_ROWS, [0.6, 0.2, 0.2], [0.4, 0.3, 0.3])
}

fn correct_count(n: usize, accuracy: f64) -> usize {
    (accuracy * n as f64).round() as usize
}

/// Constant κ with `round(accuracy * n)` correct instances.
pub fn flat_scores(n: usize, accuracy: f64) -> ScoreVector {
    let c = correct_count(n, accuracy);
    ScoreVector::new(vec![0.5; n], (0..n).map(|i| i < c).collect()).expect("finite")
}

/// Every correct instance scored above every error, no ties.
pub fn perfect_ranking(n: usize, accuracy: f64) -> ScoreVector {
    let c = correct_count(n, accuracy);
    let scores = (0..n).map(|i| (n - i) as f64 / n as f64).collect();
    ScoreVector::new(scores, (0..n).map(|i| i < c).collect()).expect("finite")
}

/// Random κ with correctness loosely tied to κ. With `tied`, scores are
/// drawn from a handful of values so tie blocks are common.
pub fn random_scores(n: usize, tied: bool, seed: u64) -> ScoreVector {
    let mut r = rng(seed);
    let levels = r.random_range(2..=8);
    let mut scores = Vec::with_capacity(n);
    let mut correct = Vec::with_capacity(n);
    for _ in 0..n {
        let s: f64 = if tied {
            f64::from(r.random_range(0..=levels)) / f64::from(levels)
        } else {
            r.random()
        };
        scores.push(s);
        correct.push(r.random::<f64>() < 0.2 + 0.7 * s);
    }
    ScoreVector::new(scores, correct).expect("finite")
}

/// Random logits with labels drawn independently of them.
pub fn random_logit_log(n: usize, classes: usize, seed: u64) -> PredictionLog {
    let mut r = rng(seed);
    let scale = r.random_range(0.1..6.0);
    let values = (0..n * classes)
        .map(|_| scale * r.sample::<f64, _>(StandardNormal))
        .collect();
    let labels = (0..n).map(|_| r.random_range(0..classes as u32)).collect();
    PredictionLog::new(LogKind::Logits, classes, 1, labels, values).expect("finite logits")
}

/// Rows emitted per distinct logit vector by [`calibrated_logits`].
pub const CALIBRATED_GROUP: usize = 40;

/// Logits `scale * z` whose calibrating temperature is exactly `scale`.
///
/// Each of `groups` vectors `z = ln p` has `p` a random composition of
/// [`CALIBRATED_GROUP`] into `classes` positive parts, and is emitted once
/// per unit of each part with that part's class as label. The empirical
/// label frequencies then equal `softmax(z)` group by group, so the NLL of
/// `scale * z / T` is minimized at `T = scale`. Rows are shuffled.
pub fn calibrated_logits(groups: usize, classes: usize, scale: f64, seed: u64) -> PredictionLog {
    assert!((2..CALIBRATED_GROUP).contains(&classes), "unsupported class count");
    let mut r = rng(seed);
    let spread = Normal::<f64>::new(0.0, 1.5).expect("valid normal");
    let mut rows: Vec<(u32, Vec<f64>)> = Vec::with_capacity(groups * CALIBRATED_GROUP);
    for _ in 0..groups {
        let weights: Vec<f64> = (0..classes).map(|_| spread.sample(&mut r).exp()).collect();
        let total: f64 = weights.iter().sum();
        let mut counts = vec![1usize; classes];
        for _ in classes..CALIBRATED_GROUP {
            let mut u = r.random::<f64>() * total;
            let mut j = 0;
            while j + 1 < classes && u >= weights[j] {
                u -= weights[j];
                j += 1;
            }
            counts[j] += 1;
        }
        let z: Vec<f64> = counts
            .iter()
            .map(|&c| scale * (c as f64 / CALIBRATED_GROUP as f64).ln())
            .collect();
        for (label, &c) in counts.iter().enumerate() {
            for _ in 0..c {
                rows.push((label as u32, z.clone()));
            }
        }
    }
    rows.shuffle(&mut r);
    let labels = rows.iter().map(|r| r.0).collect();
    let values = rows.into_iter().flat_map(|r| r.1).collect();
    PredictionLog::new(LogKind::Logits, classes, 1, labels, values).expect("finite logits")
}

/// A pool whose classes carry the given severities as their only
/// estimation sample, with no test samples. For level-counting checks.
pub fn pool_from_severities(severities: &[f64]) -> Result<ClassPool> {
    let classes = severities
        .iter()
        .enumerate()
        .map(|(i, &s)| PoolClass {
            class_id: i as u32,
            estimation: vec![s],
            test: Vec::new(),
        })
        .collect();
    ClassPool::new(classes, KappaSpec::raw_score(), 1, 0, false)
}

/// Random pool with class-specific score distributions.
pub fn random_pool(
    classes: usize,
    estimation: usize,
    test: usize,
    seed: u64,
) -> Result<ClassPool> {
    let mut r = rng(seed);
    let pool = (0..classes)
        .map(|i| {
            let mean: f64 = r.random_range(-2.0..2.0);
            let noise = Normal::new(mean, r.random_range(0.1..1.5)).expect("valid normal");
            PoolClass {
                class_id: i as u32,
                estimation: (0..estimation).map(|_| noise.sample(&mut r)).collect(),
                test: (0..test).map(|_| noise.sample(&mut r)).collect(),
            }
        })
        .collect();
    ClassPool::new(pool, KappaSpec::raw_score(), estimation, test, false)
}

/// ID κ scores together with an OOD pool whose difficulty is graded.
#[derive(Debug, Clone)]
pub struct GradedBenchmark {
    pub id_scores: ScoreVector,
    pub pool: ClassPool,
}

/// ID κ ~ N(0, 1). OOD class `c` of `classes` has κ ~ N(-3 (1 - d_c), 1)
/// with difficulty `d_c = c / (classes - 1)`: the easiest classes sit three
/// standard deviations below ID, the hardest coincide with it.
pub fn difficulty_graded_benchmark(
    classes: usize,
    id_samples: usize,
    estimation: usize,
    test: usize,
    seed: u64,
) -> Result<GradedBenchmark> {
    let mut r = rng(seed);
    let id_scores: Vec<f64> = (0..id_samples)
        .map(|_| r.sample::<f64, _>(StandardNormal))
        .collect();
    let id_scores = ScoreVector::new(id_scores, vec![true; id_samples])?;
    let span = (classes.max(2) - 1) as f64;
    let pool = (0..classes)
        .map(|c| {
            let mean = -3.0 * (1.0 - c as f64 / span);
            let mut draw = || mean + r.sample::<f64, _>(StandardNormal);
            PoolClass {
                class_id: c as u32,
                estimation: (0..estimation).map(|_| draw()).collect(),
                test: (0..test).map(|_| draw()).collect(),
            }
        })
        .collect();
    let pool = ClassPool::new(pool, KappaSpec::raw_score(), estimation, test, false)?;
    Ok(GradedBenchmark { id_scores, pool })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn investment_shapes() {
        let a = investment_model_a();
        assert_eq!(a.len(), INVESTMENT_ROWS);
        assert_eq!(a.labels().iter().filter(|&&l| l == 0).count(), 9_500);
        let b = investment_model_b();
        assert_eq!(b.labels().iter().filter(|&&l| l == 0).count(), 4_000);
    }

    #[test]
    fn constructors_are_seeded() {
        assert_eq!(random_scores(50, true, 3), random_scores(50, true, 3));
        assert_eq!(calibrated_logits(20, 4, 2.0, 1), calibrated_logits(20, 4, 2.0, 1));
        assert_ne!(random_logit_log(20, 4, 1), random_logit_log(20, 4, 2));
    }

    #[test]
    fn flat_and_perfect_counts() {
        assert_eq!(flat_scores(10, 0.2).num_correct(), 2);
        let p = perfect_ranking(10, 0.8);
        assert_eq!(p.num_correct(), 8);
        assert!(p.correct[..8].iter().all(|&c| c));
    }
}
