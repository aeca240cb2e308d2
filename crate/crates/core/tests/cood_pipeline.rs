use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uqbench::coodgen::{
    class_severity, detection_auroc, filter_pool, raw_classes_from_log, read_pool_table,
    severity_profile, severity_profile_for_log, split_pool, write_pool_table, ClassPool, RawClass,
};
use uqbench::kappa::{KappaSpec, ScoreVector};
use uqbench::oracle;
use uqbench::predlog::{LabelPolicy, LogKind, PredictionLog};
use uqbench::Error;

#[test]
fn full_scale_pool_shape() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let raw: Vec<RawClass> = (0..12_800u32)
        .map(|c| RawClass {
            class_id: c,
            samples: (0..200 + (c % 7) as usize * 40).map(|_| rng.random()).collect(),
        })
        .collect();
    let exclusion: BTreeSet<u32> = (0..237).map(|i| i * 50).collect();
    let filtered = filter_pool(raw, &exclusion, 200, 200, 9).unwrap();
    assert_eq!(filtered.len(), 12_563);
    assert!(filtered.iter().all(|c| c.samples.len() == 200));
    let pool = split_pool(filtered, KappaSpec::softmax_response(), 150, 50, 9, true).unwrap();
    assert_eq!(pool.len(), 12_563);
    assert!(pool.exclusion_applied());
    assert!(pool.classes().iter().all(|c| c.estimation.len() == 150 && c.test.len() == 50));
}

#[test]
fn severity_matches_mean_oracle() {
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples: Vec<f64> = (0..150).map(|_| rng.random::<f64>() * 3.0 - 1.0).collect();
        let s = class_severity(&samples).unwrap();
        assert!((s - oracle::mean_reverse(&samples).unwrap()).abs() <= 1e-12);
    }
}

#[test]
fn detection_examples() {
    let id = ScoreVector::new(vec![0.9, 0.8], vec![true, true]).unwrap();
    assert_eq!(detection_auroc(&id, &[0.85, 0.1]).unwrap(), 0.75);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let draws: Vec<f64> = (0..20_000).map(|_| rng.random()).collect();
    let id = ScoreVector::new(draws[..10_000].to_vec(), vec![true; 10_000]).unwrap();
    let same = detection_auroc(&id, &draws[10_000..]).unwrap();
    assert!((same - 0.5).abs() < 0.02, "{same}");
}

#[test]
fn pool_identical_to_id_is_near_chance() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let id = ScoreVector::new((0..4_000).map(|_| rng.random()).collect(), vec![true; 4_000]).unwrap();
    let raw: Vec<RawClass> = (0..40)
        .map(|c| RawClass { class_id: c, samples: (0..200).map(|_| rng.random()).collect() })
        .collect();
    let pool = split_pool(raw, KappaSpec::raw_score(), 150, 50, 5, false).unwrap();
    let (_, profile) = severity_profile(&id, &KappaSpec::raw_score(), &pool, 10).unwrap();
    assert!(profile.aurocs.iter().all(|a| (a - 0.5).abs() < 0.06), "{:?}", profile.aurocs);
}

#[test]
fn uql1_pool_scored_through_kappa() {
    // ID log: confident and correct
    let id = PredictionLog::new(
        LogKind::Probs,
        2,
        1,
        vec![0; 6],
        [0.99, 0.01].repeat(6),
    )
    .unwrap();
    // pool: three OOD classes with ids beyond the ID label range
    let mut labels = Vec::new();
    let mut values = Vec::new();
    for (class, p) in [(5_000u32, 0.6), (5_001, 0.75), (5_002, 0.9)] {
        for j in 0..4 {
            labels.push(class);
            let q = p + 0.01 * f64::from(j);
            values.extend_from_slice(&[q, 1.0 - q]);
        }
    }
    let pool_log =
        PredictionLog::with_policy(LogKind::Probs, 2, 1, labels, values, LabelPolicy::PoolClassId).unwrap();
    let kappa = KappaSpec::softmax_response();
    let raw = raw_classes_from_log(&pool_log, &kappa).unwrap();
    assert_eq!(raw.iter().map(|c| c.class_id).collect::<Vec<_>>(), vec![5_000, 5_001, 5_002]);
    let filtered = filter_pool(raw, &BTreeSet::new(), 4, 4, 0).unwrap();
    let pool = split_pool(filtered, kappa.clone(), 2, 2, 0, false).unwrap();
    let (levels, profile) = severity_profile_for_log(&id, &kappa, &pool, 1).unwrap();
    assert_eq!(levels.levels[0].class_ids, vec![5_000]);
    assert_eq!(levels.levels[10].class_ids, vec![5_002]);
    assert!(profile.aurocs.iter().all(|&a| a == 1.0));

    let err = severity_profile_for_log(&id, &KappaSpec::negative_entropy(), &pool, 1).unwrap_err();
    assert!(matches!(err, Error::KappaMismatch { .. }));
}

#[test]
fn pool_table_file_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let raw: Vec<RawClass> = (0..5)
        .map(|c| RawClass { class_id: c * 3, samples: (0..200).map(|_| rng.random()).collect() })
        .collect();
    let pool = split_pool(raw, KappaSpec::softmax_response(), 150, 50, 2, false).unwrap();
    let mut text = Vec::new();
    write_pool_table(&pool, &mut text).unwrap();
    let classes = read_pool_table(text.as_slice()).unwrap();
    let back = ClassPool::new(classes, KappaSpec::softmax_response(), 150, 50, false).unwrap();
    assert_eq!(back, pool);
}
