use std::collections::BTreeMap;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::PredictionLog;
use crate::error::{Error, Result};

/// Disjoint calibration/test partition of a log's instance indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub calibration: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

/// Per-class calibration quotas by largest remainder; leftover slots go to
/// the largest fractional parts, ties to the smaller class index.
fn allocate(counts: &BTreeMap<u32, usize>, total: usize, size: usize) -> BTreeMap<u32, usize> {
    let mut quota: BTreeMap<u32, usize> = counts
        .iter()
        .map(|(&c, &m)| (c, size * m / total))
        .collect();
    let assigned: usize = quota.values().sum();
    let mut remainders: Vec<(usize, u32)> = counts
        .iter()
        .map(|(&c, &m)| ((size * m) % total, c))
        .collect();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, c) in remainders.iter().take(size - assigned) {
        *quota.get_mut(&c).unwrap() += 1;
    }
    quota
}

/// Stratified random split with `calibration_size` calibration instances.
///
/// Pure in `(labels, calibration_size, seed)`. Classes are visited in
/// ascending label order, each drawing its quota from one seeded stream.
pub fn stratified_split(
    log: &PredictionLog,
    calibration_size: usize,
    seed: u64,
) -> Result<SplitAssignment> {
    let n = log.len();
    if calibration_size >= n {
        return Err(Error::InvalidArgument(format!(
            "calibration size {calibration_size} must be smaller than the log ({n} instances)"
        )));
    }
    let mut members: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &label) in log.labels().iter().enumerate() {
        members.entry(label).or_default().push(i);
    }
    let counts = members.iter().map(|(&c, v)| (c, v.len())).collect();
    let quota = allocate(&counts, n, calibration_size);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_calibration = vec![false; n];
    for (class, idx) in &members {
        let take = quota[class];
        for j in index::sample(&mut rng, idx.len(), take) {
            in_calibration[idx[j]] = true;
        }
    }
    let (calibration, test): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| in_calibration[i]);
    Ok(SplitAssignment {
        calibration,
        test,
        seed,
    })
}

/// Uniform random subset of exactly `target` samples, kept in input order.
pub fn subsample_class<T: Clone>(samples: &[T], target: usize, seed: u64) -> Result<Vec<T>> {
    if samples.len() < target {
        return Err(Error::InvalidArgument(format!(
            "cannot keep {target} of {} samples",
            samples.len()
        )));
    }
    if samples.len() == target {
        return Ok(samples.to_vec());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, samples.len(), target).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| samples[i].clone()).collect())
}
