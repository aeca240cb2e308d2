use proptest::prelude::*;
use uqbench::coodgen::{build_severity_levels, ClassPool, PoolClass};
use uqbench::kappa::{
    fit_temperature, mc_aggregate, negative_entropy, score_log, softmax, softmax_response,
    KappaSpec, ScoreVector,
};
use uqbench::metrics::{aurc, auroc, e_aurc, ece, rc_curve, sac_coverage, spearman};
use uqbench::oracle;
use uqbench::predlog::{
    decode_uql1, encode_uql1, stratified_split, subsample_class, LabelPolicy, LogKind,
    PredictionLog,
};

fn score_vector() -> impl Strategy<Value = ScoreVector> {
    (1usize..120).prop_flat_map(|n| {
        (
            prop::collection::vec(prop_oneof![0.0f64..=1.0, (0u8..6).prop_map(|k| f64::from(k) / 5.0)], n),
            prop::collection::vec(any::<bool>(), n),
        )
            .prop_map(|(s, c)| ScoreVector::new(s, c).unwrap())
    })
}

fn logit_log() -> impl Strategy<Value = PredictionLog> {
    (2usize..6, 4usize..60).prop_flat_map(|(k, n)| {
        (
            prop::collection::vec(-20.0f32..20.0, n * k),
            prop::collection::vec(0..k as u32, n),
        )
            .prop_map(move |(v, l)| {
                let values = v.into_iter().map(f64::from).collect();
                PredictionLog::new(LogKind::Logits, k, 1, l, values).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn softmax_on_simplex_and_shift_invariant(
        v in prop::collection::vec(-50.0f64..50.0, 1..12),
        t in 0.05f64..20.0,
        c in -100.0f64..100.0,
    ) {
        let p = softmax(&v, t).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
        let q = softmax(&shifted, t).unwrap();
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        let k = v.len() as f64;
        let sr = softmax_response(&p);
        prop_assert!(sr >= 1.0 / k - 1e-12 && sr <= 1.0);
        let ne = negative_entropy(&p);
        prop_assert!(ne <= 1e-12 && ne >= -k.ln() - 1e-12);
    }

    #[test]
    fn mc_aggregate_rows_on_simplex(
        (k, passes, v) in (2usize..5, 2usize..6).prop_flat_map(|(k, t)| {
            (Just(k), Just(t), prop::collection::vec(-10.0f32..10.0, 3 * t * k))
        })
    ) {
        let values = v.into_iter().map(f64::from).collect();
        let log = PredictionLog::new(LogKind::Logits, k, passes, vec![0, 1, 0], values).unwrap();
        let mean = mc_aggregate(&log).unwrap();
        prop_assert_eq!(mean.passes(), 1);
        for i in 0..mean.len() {
            let s: f64 = mean.row(i, 0).iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn uql1_round_trip_is_byte_identical(log in logit_log()) {
        let bytes = encode_uql1(&log);
        let back = decode_uql1(&bytes, LabelPolicy::InDistribution).unwrap();
        prop_assert_eq!(&back, &log);
        prop_assert_eq!(encode_uql1(&back), bytes);
    }

    #[test]
    fn split_is_a_deterministic_partition(
        labels in prop::collection::vec(0u32..6, 2..200),
        frac in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let n = labels.len();
        let size = ((n - 1) as f64 * frac) as usize;
        let log = PredictionLog::new(LogKind::Logits, 6, 1, labels, vec![0.0; n * 6]).unwrap();
        let split = stratified_split(&log, size, seed).unwrap();
        prop_assert_eq!(split.calibration.len(), size);
        let mut all: Vec<usize> = split.calibration.iter().chain(&split.test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        prop_assert_eq!(split, stratified_split(&log, size, seed).unwrap());
    }

    #[test]
    fn subsample_keeps_a_subset(n in 1usize..300, frac in 0.0f64..=1.0, seed in any::<u64>()) {
        let samples: Vec<usize> = (0..n).collect();
        let target = (n as f64 * frac) as usize;
        let kept = subsample_class(&samples, target, seed).unwrap();
        prop_assert_eq!(kept.len(), target);
        prop_assert!(kept.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(kept, subsample_class(&samples, target, seed).unwrap());
    }

    #[test]
    fn ranking_metrics_in_range(sv in score_vector()) {
        let curve = rc_curve(&sv).unwrap();
        for p in curve.points() {
            prop_assert!((0.0..=1.0).contains(&p.risk));
        }
        let a = aurc(&curve);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(e_aurc(&sv).unwrap() >= 0.0);
        let e = ece(&sv, 15).unwrap();
        prop_assert!((0.0..=1.0).contains(&e));
        match auroc(&sv) {
            Ok(x) => {
                prop_assert!((0.0..=1.0).contains(&x));
                prop_assert_eq!(x, oracle::auroc_pairs(&sv).unwrap());
            }
            Err(err) => prop_assert!(err.is_undefined()),
        }
        let mut last = f64::INFINITY;
        for t in [0.0, 0.3, 0.5, 0.7, 0.9, 0.95, 1.0] {
            let c = sac_coverage(&curve, t);
            prop_assert!(c <= last);
            last = c;
        }
        let o = oracle::aurc_expected_risk(&sv).unwrap();
        prop_assert!((a - o).abs() <= 1e-12);
    }

    #[test]
    fn spearman_symmetric_and_bounded(
        pairs in prop::collection::vec((0u8..10, -5.0f64..5.0), 2..80)
    ) {
        let xs: Vec<f64> = pairs.iter().map(|p| f64::from(p.0)).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        match (spearman(&xs, &ys), spearman(&ys, &xs)) {
            (Ok(a), Ok(b)) => {
                prop_assert!((a - b).abs() < 1e-15);
                prop_assert!((-1.0..=1.0).contains(&a));
                prop_assert!((a - oracle::spearman_naive(&xs, &ys).unwrap()).abs() < 1e-12);
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "asymmetric definedness"),
        }
    }

    #[test]
    fn temperature_fit_never_worsens_nll(log in logit_log(), seed in 0u64..1000) {
        let split = stratified_split(&log, log.len() / 2, seed).unwrap();
        prop_assume!(!split.calibration.is_empty());
        let fit = fit_temperature(&log, &split).unwrap();
        prop_assert!(fit.nll_after <= fit.nll_before + 1e-9);
        prop_assert_eq!(&fit, &fit_temperature(&log, &split).unwrap());
        let sr = KappaSpec::softmax_response();
        let before = score_log(&log, &sr).unwrap();
        let after = score_log(&log, &sr.with_temperature(fit.temperature)).unwrap();
        prop_assert_eq!(before.correct, after.correct);
    }

    #[test]
    fn group_severity_non_decreasing(
        sev in prop::collection::vec(-3.0f64..3.0, 1..150),
        wfrac in 0.0f64..1.0,
    ) {
        let classes = sev
            .iter()
            .enumerate()
            .map(|(i, &s)| PoolClass { class_id: i as u32, estimation: vec![s, s * 0.5], test: vec![s] })
            .collect();
        let pool = ClassPool::new(classes, KappaSpec::raw_score(), 2, 1, false).unwrap();
        let window = 1 + ((sev.len() - 1) as f64 * wfrac) as usize;
        let levels = build_severity_levels(&pool, window, 11).unwrap();
        prop_assert_eq!(levels.levels.len(), 11);
        prop_assert_eq!(levels.num_windows, sev.len() - window + 1);
        for w in levels.levels.windows(2) {
            prop_assert!(w[0].group_severity <= w[1].group_severity);
        }
        prop_assert!(levels.levels.iter().all(|l| l.class_ids.len() == window));
    }
}
