use crate::error::{Error, Result};

/// What a confidence function reads from an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreInput {
    /// The (temperature-scaled, pass-averaged) probability vector.
    Probabilities,
    /// The single stored score of a score-only log.
    RawScore,
}

/// A confidence-rate function κ: maps one instance's model output to a
/// scalar whose order ranks instances by expected correctness.
pub trait ConfidenceFn: Send + Sync {
    fn name(&self) -> &'static str;

    fn input(&self) -> ScoreInput;

    /// Whether every output lies in `[0, 1]`, which calibration metrics require.
    fn unit_interval(&self) -> bool;

    fn score(&self, input: &[f64]) -> f64;
}

/// Temperature-scaled softmax, computed after subtracting the max logit.
pub fn softmax(logits: &[f64], temperature: f64) -> Result<Vec<f64>> {
    check_temperature(temperature)?;
    let mut out = logits.to_vec();
    softmax_in_place(&mut out, temperature);
    Ok(out)
}

pub(crate) fn check_temperature(temperature: f64) -> Result<()> {
    if temperature.is_finite() && temperature > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "temperature must be positive and finite, got {temperature}"
        )))
    }
}

pub(crate) fn softmax_in_place(v: &mut [f64], temperature: f64) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x = ((*x - max) / temperature).exp();
        sum += *x;
    }
    for x in v.iter_mut() {
        *x /= sum;
    }
}

/// `ln Σ exp(v_j / T)`.
pub(crate) fn log_sum_exp(v: &[f64], temperature: f64) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max) / temperature;
    let sum: f64 = v.iter().map(|&x| (x / temperature - max).exp()).sum();
    max + sum.ln()
}

/// Index of the largest entry; the first one wins on ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (j, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = j;
        }
    }
    best
}

/// Probability of the predicted class.
pub fn softmax_response(probs: &[f64]) -> f64 {
    probs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// `Σ p ln p`, with `0 ln 0 = 0`. Zero at one-hot, `-ln k` at uniform.
pub fn negative_entropy(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum()
}

pub struct SoftmaxResponse;

impl ConfidenceFn for SoftmaxResponse {
    fn name(&self) -> &'static str {
        "softmax-response"
    }
    fn input(&self) -> ScoreInput {
        ScoreInput::Probabilities
    }
    fn unit_interval(&self) -> bool {
        true
    }
    fn score(&self, input: &[f64]) -> f64 {
        softmax_response(input)
    }
}

pub struct NegativeEntropy;

impl ConfidenceFn for NegativeEntropy {
    fn name(&self) -> &'static str {
        "negative-entropy"
    }
    fn input(&self) -> ScoreInput {
        ScoreInput::Probabilities
    }
    fn unit_interval(&self) -> bool {
        false
    }
    fn score(&self, input: &[f64]) -> f64 {
        negative_entropy(input)
    }
}

/// Passes a score-only log's stored score through unchanged.
pub struct RawScore;

impl ConfidenceFn for RawScore {
    fn name(&self) -> &'static str {
        "raw-score"
    }
    fn input(&self) -> ScoreInput {
        ScoreInput::RawScore
    }
    fn unit_interval(&self) -> bool {
        false
    }
    fn score(&self, input: &[f64]) -> f64 {
        input[0]
    }
}
