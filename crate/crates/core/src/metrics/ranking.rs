use crate::error::{Error, Result};
use crate::kappa::ScoreVector;
use crate::stats::{midranks, pearson};

/// Probability that a correct instance outranks an incorrect one by κ, ties
/// counting one half (Mann–Whitney U over midranks).
pub fn auroc(sv: &ScoreVector) -> Result<f64> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (&s, &c) in sv.scores.iter().zip(&sv.correct) {
        if c {
            pos.push(s);
        } else {
            neg.push(s);
        }
    }
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Undefined(format!(
            "AUROC needs both correct and incorrect instances ({} correct of {})",
            pos.len(),
            sv.len()
        )));
    }
    auroc_two_sample(&pos, &neg)
}

/// AUROC with `positive` expected to score higher than `negative`.
pub fn auroc_two_sample(positive: &[f64], negative: &[f64]) -> Result<f64> {
    if positive.is_empty() || negative.is_empty() {
        return Err(Error::Undefined(
            "AUROC needs at least one positive and one negative score".into(),
        ));
    }
    let pooled: Vec<f64> = positive.iter().chain(negative).copied().collect();
    let ranks = midranks(&pooled);
    let rank_sum: f64 = ranks[..positive.len()].iter().sum();
    let p = positive.len() as f64;
    let u = rank_sum - p * (p + 1.0) / 2.0;
    Ok(u / (p * negative.len() as f64))
}

/// Goodman–Kruskal γ between κ and correctness.
pub fn gamma_from_auroc(auroc: f64) -> f64 {
    2.0 * auroc - 1.0
}

/// Pearson correlation of midranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::InvalidArgument("spearman needs at least two pairs".into()));
    }
    pearson(&midranks(xs), &midranks(ys))
        .ok_or_else(|| Error::Undefined("zero variance in a correlated variable".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(pairs: &[(f64, bool)]) -> ScoreVector {
        ScoreVector::new(
            pairs.iter().map(|p| p.0).collect(),
            pairs.iter().map(|p| p.1).collect(),
        )
        .unwrap()
    }

    #[test]
    fn auroc_examples() {
        assert_eq!(
            auroc(&sv(&[(0.1, false), (0.2, true), (0.3, false), (0.4, true)])).unwrap(),
            0.75
        );
        let constant = sv(&[(0.95, true), (0.95, true), (0.95, false)]);
        assert_eq!(auroc(&constant).unwrap(), 0.5);
        let separated = sv(&[(0.6, true), (0.4, false), (0.6, true), (0.4, false)]);
        assert_eq!(auroc(&separated).unwrap(), 1.0);
    }

    #[test]
    fn auroc_undefined_without_both_classes() {
        assert!(auroc(&sv(&[(0.1, true), (0.2, true)])).unwrap_err().is_undefined());
        assert!(auroc(&sv(&[(0.1, false)])).unwrap_err().is_undefined());
    }

    #[test]
    fn two_sample_pair_count() {
        assert_eq!(auroc_two_sample(&[0.9, 0.8], &[0.85, 0.1]).unwrap(), 0.75);
        assert_eq!(auroc_two_sample(&[2.0], &[1.0]).unwrap(), 1.0);
        assert!(auroc_two_sample(&[], &[1.0]).is_err());
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_from_auroc(0.5), 0.0);
        assert_eq!(gamma_from_auroc(1.0), 1.0);
        assert_eq!(gamma_from_auroc(0.75), 0.5);
    }

    #[test]
    fn spearman_examples() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!((spearman(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(spearman(&[1.0, 1.0], &[1.0, 2.0]).unwrap_err().is_undefined());
        assert!(spearman(&[1.0], &[1.0]).is_err());
        assert!(spearman(&[1.0, 2.0], &[1.0]).is_err());
    }
}
