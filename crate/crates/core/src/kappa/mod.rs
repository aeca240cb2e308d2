//! Confidence-rate functions κ and the transforms applied before them:
//! temperature scaling, MC-Dropout pass averaging and temperature fitting.

mod functions;
mod registry;
mod temperature;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::predlog::{LogKind, PredictionLog};

pub use functions::{
    argmax, negative_entropy, softmax, softmax_response, ConfidenceFn, NegativeEntropy, RawScore,
    ScoreInput, SoftmaxResponse,
};
pub use registry::KappaRegistry;
pub use temperature::{
    fit_temperature, mean_nll_at, TemperatureFit, MAX_TEMPERATURE, MIN_TEMPERATURE,
};

/// Name accepted by [`KappaSpec::parse`] for negative entropy of the
/// pass-averaged probabilities.
pub const MC_DROPOUT: &str = "mc-dropout";

/// Which κ to apply and how to pre-process the log before applying it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaSpec {
    /// Registered confidence-function name.
    pub base: String,
    pub temperature: f64,
    pub mc_aggregation: bool,
}

impl KappaSpec {
    pub fn new(base: impl Into<String>) -> Self {
        Self {
            base: base.into(),
            temperature: 1.0,
            mc_aggregation: false,
        }
    }

    pub fn softmax_response() -> Self {
        Self::new("softmax-response")
    }

    pub fn negative_entropy() -> Self {
        Self::new("negative-entropy")
    }

    pub fn raw_score() -> Self {
        Self::new("raw-score")
    }

    pub fn mc_dropout() -> Self {
        Self {
            mc_aggregation: true,
            ..Self::negative_entropy()
        }
    }

    /// Resolves a command-line name; `mc-dropout` expands to averaged negative entropy.
    pub fn parse(name: &str) -> Self {
        if name == MC_DROPOUT {
            Self::mc_dropout()
        } else {
            Self::new(name)
        }
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }
}

impl fmt::Display for KappaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.base)?;
        if self.temperature != 1.0 {
            write!(f, "@T={}", self.temperature)?;
        }
        if self.mc_aggregation {
            f.write_str("+mc")?;
        }
        Ok(())
    }
}

/// κ values and 0/1 correctness, aligned with log record order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreVector {
    pub scores: Vec<f64>,
    pub correct: Vec<bool>,
}

impl ScoreVector {
    pub fn new(scores: Vec<f64>, correct: Vec<bool>) -> Result<Self> {
        if scores.len() != correct.len() {
            return Err(Error::InvalidArgument(format!(
                "{} scores but {} correctness flags",
                scores.len(),
                correct.len()
            )));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument("scores must be finite".into()));
        }
        Ok(Self { scores, correct })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn num_correct(&self) -> usize {
        self.correct.iter().filter(|&&c| c).count()
    }

    pub fn accuracy(&self) -> f64 {
        self.num_correct() as f64 / self.len() as f64
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            scores: indices.iter().map(|&i| self.scores[i]).collect(),
            correct: indices.iter().map(|&i| self.correct[i]).collect(),
        }
    }
}

/// Per-instance probability vectors of a vector log under a temperature and
/// optional pass averaging.
pub struct ProbabilityView<'a> {
    log: &'a PredictionLog,
    temperature: f64,
    mc: bool,
}

impl<'a> ProbabilityView<'a> {
    pub fn new(log: &'a PredictionLog, temperature: f64, mc: bool) -> Result<Self> {
        functions::check_temperature(temperature)?;
        match log.kind() {
            LogKind::ScoreOnly => {
                return Err(Error::IncompatibleKind {
                    op: "probability-based scoring",
                    kind: LogKind::ScoreOnly,
                })
            }
            LogKind::Probs if temperature != 1.0 => {
                return Err(Error::IncompatibleKind {
                    op: "temperature scaling",
                    kind: LogKind::Probs,
                })
            }
            _ => {}
        }
        if mc && log.passes() < 2 {
            return Err(Error::InvalidArgument(
                "MC aggregation needs a multi-pass log".into(),
            ));
        }
        if !mc && log.passes() > 1 {
            return Err(Error::InvalidArgument(format!(
                "log has {} passes; select MC aggregation to score it",
                log.passes()
            )));
        }
        Ok(Self {
            log,
            temperature,
            mc,
        })
    }

    pub fn for_spec(log: &'a PredictionLog, spec: &KappaSpec) -> Result<Self> {
        Self::new(log, spec.temperature, spec.mc_aggregation)
    }

    pub fn log(&self) -> &PredictionLog {
        self.log
    }

    pub fn probs_into(&self, i: usize, buf: &mut Vec<f64>) {
        buf.clear();
        buf.resize(self.log.width(), 0.0);
        let mut row = Vec::with_capacity(self.log.width());
        for pass in self.log.rows(i) {
            row.clear();
            row.extend_from_slice(pass);
            if self.log.kind() == LogKind::Logits {
                functions::softmax_in_place(&mut row, self.temperature);
            }
            for (acc, p) in buf.iter_mut().zip(&row) {
                *acc += p;
            }
        }
        let passes = self.log.passes() as f64;
        if passes > 1.0 {
            buf.iter_mut().for_each(|p| *p /= passes);
        }
    }

    /// Predicted class. Single-pass logits use the raw logits so that no
    /// temperature can move the argmax.
    pub fn predicted(&self, i: usize, probs: &[f64]) -> usize {
        if self.log.kind() == LogKind::Logits && !self.mc {
            argmax(self.log.row(i, 0))
        } else {
            argmax(probs)
        }
    }

    /// `-ln p(true class)`; log-sum-exp form for single-pass logits.
    pub fn true_class_nll(&self, i: usize, probs: &[f64]) -> f64 {
        let y = self.log.label(i) as usize;
        if self.log.kind() == LogKind::Logits && !self.mc {
            let z = self.log.row(i, 0);
            functions::log_sum_exp(z, self.temperature) - z[y] / self.temperature
        } else {
            -probs[y].ln()
        }
    }
}

/// Scores a log with the built-in confidence functions.
pub fn score_log(log: &PredictionLog, spec: &KappaSpec) -> Result<ScoreVector> {
    score_log_with(log, spec, &KappaRegistry::with_builtins())
}

pub fn score_log_with(
    log: &PredictionLog,
    spec: &KappaSpec,
    registry: &KappaRegistry,
) -> Result<ScoreVector> {
    let function = registry.get(&spec.base)?;
    match function.input() {
        ScoreInput::RawScore => {
            if log.kind() != LogKind::ScoreOnly {
                return Err(Error::IncompatibleKind {
                    op: "raw-score",
                    kind: log.kind(),
                });
            }
            if spec.temperature != 1.0 || spec.mc_aggregation {
                return Err(Error::InvalidArgument(
                    "raw scores take neither temperature nor MC aggregation".into(),
                ));
            }
            if log.passes() != 1 {
                return Err(Error::InvalidArgument("raw-score logs must be single-pass".into()));
            }
            let scores = (0..log.len()).map(|i| function.score(log.row(i, 0))).collect();
            let correct = log.labels().iter().map(|&l| l == 1).collect();
            ScoreVector::new(scores, correct)
        }
        ScoreInput::Probabilities => {
            let view = ProbabilityView::for_spec(log, spec)?;
            let mut probs = Vec::new();
            let mut scores = Vec::with_capacity(log.len());
            let mut correct = Vec::with_capacity(log.len());
            for i in 0..log.len() {
                view.probs_into(i, &mut probs);
                scores.push(function.score(&probs));
                correct.push(view.predicted(i, &probs) == log.label(i) as usize);
            }
            ScoreVector::new(scores, correct)
        }
    }
}

/// Collapses a multi-pass log to the per-instance mean probability vector.
pub fn mc_aggregate(log: &PredictionLog) -> Result<PredictionLog> {
    if log.kind() == LogKind::ScoreOnly {
        return Err(Error::IncompatibleKind {
            op: "MC aggregation",
            kind: LogKind::ScoreOnly,
        });
    }
    let view = ProbabilityView::new(log, 1.0, true)?;
    let mut values = Vec::with_capacity(log.len() * log.width());
    let mut probs = Vec::new();
    for i in 0..log.len() {
        view.probs_into(i, &mut probs);
        values.extend_from_slice(&probs);
    }
    PredictionLog::new(
        LogKind::Probs,
        log.num_classes(),
        1,
        log.labels().to_vec(),
        values,
    )
}
