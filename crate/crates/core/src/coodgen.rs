//! Class-out-of-distribution benchmark construction.
//!
//! Candidate OOD classes are filtered and subsampled, split per class into
//! estimation and test samples, and scored with the model's own κ. A class's
//! severity is its mean estimation κ; classes sorted by severity are grouped
//! by a sliding window, and eleven windows at evenly spaced percentiles of
//! the window sequence become the severity levels. Detection at a level is
//! the AUROC of ID test κ (positive) against the level's OOD test κ.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kappa::{score_log, KappaSpec, ScoreVector};
use crate::metrics::auroc_two_sample;
use crate::predlog::{subsample_class, PredictionLog};
use crate::stats::neumaier_sum;

pub const DEFAULT_LEVELS: usize = 11;
pub const DEFAULT_MIN_SAMPLES: usize = 200;
pub const DEFAULT_ESTIMATION: usize = 150;
pub const DEFAULT_TEST: usize = 50;

/// All κ scores observed for one candidate class, before splitting.
#[derive(Debug, Clone, PartialEq)]
pub struct RawClass {
    pub class_id: u32,
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoolClass {
    pub class_id: u32,
    pub estimation: Vec<f64>,
    pub test: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassPool {
    classes: Vec<PoolClass>,
    kappa: KappaSpec,
    exclusion_applied: bool,
}

impl ClassPool {
    /// Validates unique ids, finite scores and the per-class split sizes.
    pub fn new(
        classes: Vec<PoolClass>,
        kappa: KappaSpec,
        estimation_size: usize,
        test_size: usize,
        exclusion_applied: bool,
    ) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::InvalidArgument("empty class pool".into()));
        }
        let mut seen = BTreeSet::new();
        for c in &classes {
            if !seen.insert(c.class_id) {
                return Err(Error::InvalidArgument(format!(
                    "class {} appears twice in the pool",
                    c.class_id
                )));
            }
            if c.estimation.len() != estimation_size || c.test.len() != test_size {
                return Err(Error::InvalidArgument(format!(
                    "class {} has {}/{} estimation/test samples, expected {estimation_size}/{test_size}",
                    c.class_id,
                    c.estimation.len(),
                    c.test.len()
                )));
            }
            if c.estimation.iter().chain(&c.test).any(|s| !s.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "class {} has a non-finite score",
                    c.class_id
                )));
            }
        }
        Ok(Self {
            classes,
            kappa,
            exclusion_applied,
        })
    }

    pub fn classes(&self) -> &[PoolClass] {
        &self.classes
    }

    pub fn kappa(&self) -> &KappaSpec {
        &self.kappa
    }

    pub fn exclusion_applied(&self) -> bool {
        self.exclusion_applied
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// Seed for the per-class random stream (splitmix64 finalizer).
fn class_seed(seed: u64, class_id: u32) -> u64 {
    let mut z = seed ^ (u64::from(class_id)).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Drops excluded and undersized classes, then keeps exactly `target`
/// samples per surviving class.
pub fn filter_pool(
    raw: Vec<RawClass>,
    exclusion: &BTreeSet<u32>,
    min_samples: usize,
    target: usize,
    seed: u64,
) -> Result<Vec<RawClass>> {
    if target > min_samples {
        return Err(Error::InvalidArgument(format!(
            "target {target} exceeds the minimum class size {min_samples}"
        )));
    }
    let mut kept = Vec::new();
    for class in raw {
        if exclusion.contains(&class.class_id) || class.samples.len() < min_samples {
            continue;
        }
        let samples = subsample_class(&class.samples, target, class_seed(seed, class.class_id))?;
        kept.push(RawClass {
            class_id: class.class_id,
            samples,
        });
    }
    if kept.is_empty() {
        return Err(Error::InvalidArgument("no class survives pool filtering".into()));
    }
    Ok(kept)
}

/// Random per-class estimation/test partition of filtered classes.
pub fn split_pool(
    filtered: Vec<RawClass>,
    kappa: KappaSpec,
    estimation_size: usize,
    test_size: usize,
    seed: u64,
    exclusion_applied: bool,
) -> Result<ClassPool> {
    let classes = filtered
        .into_iter()
        .map(|mut class| {
            if class.samples.len() != estimation_size + test_size {
                return Err(Error::InvalidArgument(format!(
                    "class {} has {} samples, split needs {}",
                    class.class_id,
                    class.samples.len(),
                    estimation_size + test_size
                )));
            }
            // an independent stream from the subsampling one
            let mut rng = ChaCha8Rng::seed_from_u64(class_seed(!seed, class.class_id));
            class.samples.shuffle(&mut rng);
            let test = class.samples.split_off(estimation_size);
            Ok(PoolClass {
                class_id: class.class_id,
                estimation: class.samples,
                test,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ClassPool::new(classes, kappa, estimation_size, test_size, exclusion_applied)
}

/// Groups a pool log's κ scores by the OOD class id stored in its label column.
pub fn raw_classes_from_log(log: &PredictionLog, kappa: &KappaSpec) -> Result<Vec<RawClass>> {
    let sv = score_log(log, kappa)?;
    let mut by_class: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for (i, &s) in sv.scores.iter().enumerate() {
        by_class.entry(log.label(i)).or_default().push(s);
    }
    Ok(by_class
        .into_iter()
        .map(|(class_id, samples)| RawClass { class_id, samples })
        .collect())
}

#[derive(Debug, Deserialize)]
struct PoolRow {
    class_id: u32,
    split: String,
    score: f64,
}

/// Reads a `class_id,split,score` pool table, `split` being `est` or `test`.
pub fn read_pool_table<R: Read>(input: R) -> Result<Vec<PoolClass>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != ["class_id", "split", "score"] {
        return Err(Error::MalformedHeader(format!(
            "pool table header must be class_id,split,score, found {}",
            header.join(",")
        )));
    }
    let mut classes: BTreeMap<u32, PoolClass> = BTreeMap::new();
    for (i, row) in reader.deserialize::<PoolRow>().enumerate() {
        let row = row?;
        if !row.score.is_finite() {
            return Err(Error::NonFinite { row: i + 1 });
        }
        let class = classes.entry(row.class_id).or_insert_with(|| PoolClass {
            class_id: row.class_id,
            estimation: Vec::new(),
            test: Vec::new(),
        });
        match row.split.as_str() {
            "est" => class.estimation.push(row.score),
            "test" => class.test.push(row.score),
            other => {
                return Err(Error::Parse {
                    row: i + 1,
                    value: other.to_string(),
                })
            }
        }
    }
    Ok(classes.into_values().collect())
}

pub fn write_pool_table<W: Write>(pool: &ClassPool, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["class_id", "split", "score"])?;
    for c in pool.classes() {
        for (split, scores) in [("est", &c.estimation), ("test", &c.test)] {
            for s in scores {
                w.write_record([c.class_id.to_string(), split.to_string(), s.to_string()])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io("<pool table>", e))?;
    Ok(())
}

/// Mean κ over a class's estimation samples.
pub fn class_severity(estimation: &[f64]) -> Result<f64> {
    if estimation.is_empty() {
        return Err(Error::InvalidArgument("class has no estimation samples".into()));
    }
    Ok(neumaier_sum(estimation.iter().copied()) / estimation.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeverityLevel {
    pub index: usize,
    pub group_severity: f64,
    pub class_ids: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeverityLevels {
    pub window: usize,
    /// Number of sliding windows over the sorted pool, `N - W + 1`.
    pub num_windows: usize,
    pub levels: Vec<SeverityLevel>,
    pub class_severities: BTreeMap<u32, f64>,
}

/// Window chosen for level `i` of `levels`: `round(i (G - 1) / (levels - 1))`,
/// halves rounded up, in exact integer arithmetic.
pub fn level_window_index(level: usize, num_windows: usize, levels: usize) -> usize {
    let span = levels - 1;
    (2 * level * (num_windows - 1) + span) / (2 * span)
}

pub fn build_severity_levels(
    pool: &ClassPool,
    window: usize,
    levels: usize,
) -> Result<SeverityLevels> {
    if levels < 2 {
        return Err(Error::InvalidArgument("at least two severity levels".into()));
    }
    if window == 0 || pool.len() < window {
        return Err(Error::InvalidArgument(format!(
            "window {window} does not fit a pool of {} classes",
            pool.len()
        )));
    }
    let mut ranked: Vec<(f64, u32)> = pool
        .classes()
        .iter()
        .map(|c| Ok((class_severity(&c.estimation)?, c.class_id)))
        .collect::<Result<_>>()?;
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let num_windows = ranked.len() - window + 1;
    let levels = (0..levels)
        .map(|i| {
            let start = level_window_index(i, num_windows, levels);
            let members = &ranked[start..start + window];
            SeverityLevel {
                index: i,
                group_severity: neumaier_sum(members.iter().map(|m| m.0)) / window as f64,
                class_ids: members.iter().map(|m| m.1).collect(),
            }
        })
        .collect();
    Ok(SeverityLevels {
        window,
        num_windows,
        levels,
        class_severities: ranked.iter().map(|&(s, id)| (id, s)).collect(),
    })
}

/// AUROC separating ID κ (positive) from OOD κ.
pub fn detection_auroc(id_scores: &ScoreVector, ood_scores: &[f64]) -> Result<f64> {
    auroc_two_sample(&id_scores.scores, ood_scores)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeverityProfile {
    pub kappa: KappaSpec,
    pub id_instances: usize,
    pub aurocs: Vec<f64>,
}

impl SeverityProfile {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["level", "auroc"])?;
        for (i, a) in self.aurocs.iter().enumerate() {
            w.write_record([i.to_string(), a.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<profile csv>", e))?;
        Ok(())
    }
}

/// Builds the severity levels and evaluates detection at each, using only
/// the OOD classes' test samples.
pub fn severity_profile(
    id_scores: &ScoreVector,
    id_kappa: &KappaSpec,
    pool: &ClassPool,
    window: usize,
) -> Result<(SeverityLevels, SeverityProfile)> {
    if pool.kappa() != id_kappa {
        return Err(Error::KappaMismatch {
            pool: pool.kappa().to_string(),
            id: id_kappa.to_string(),
        });
    }
    let levels = build_severity_levels(pool, window, DEFAULT_LEVELS)?;
    let test_by_class: BTreeMap<u32, &[f64]> = pool
        .classes()
        .iter()
        .map(|c| (c.class_id, c.test.as_slice()))
        .collect();
    let aurocs = levels
        .levels
        .iter()
        .map(|level| {
            let ood: Vec<f64> = level
                .class_ids
                .iter()
                .flat_map(|id| test_by_class[id].iter().copied())
                .collect();
            detection_auroc(id_scores, &ood)
        })
        .collect::<Result<Vec<_>>>()?;
    let profile = SeverityProfile {
        kappa: id_kappa.clone(),
        id_instances: id_scores.len(),
        aurocs,
    };
    Ok((levels, profile))
}

/// Scores an ID log with `kappa` and runs [`severity_profile`].
pub fn severity_profile_for_log(
    id_log: &PredictionLog,
    kappa: &KappaSpec,
    pool: &ClassPool,
    window: usize,
) -> Result<(SeverityLevels, SeverityProfile)> {
    let sv = score_log(id_log, kappa)?;
    severity_profile(&sv, kappa, pool, window)
}

/// The JSON manifest of a benchmark's severity levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelManifest {
    pub kappa_spec: KappaSpec,
    pub window: usize,
    pub seed: u64,
    pub levels: Vec<SeverityLevel>,
}

impl LevelManifest {
    pub fn new(levels: &SeverityLevels, kappa: &KappaSpec, seed: u64) -> Self {
        Self {
            kappa_spec: kappa.clone(),
            window: levels.window,
            seed,
            levels: levels.levels.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
