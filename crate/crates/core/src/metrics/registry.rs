//! Scalar metrics behind a common trait, registered by id. A report is the
//! union of what every registered metric emits for one evaluation context.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::calibration::{brier, ece, nll, DEFAULT_BINS};
use super::ranking::{auroc, gamma_from_auroc};
use super::rc::{aurc, aurc_over_coverages, optimal_aurc_counts, sac_coverage, RcCurve};
use crate::error::Error;
use crate::kappa::{ProbabilityView, ScoreVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub bins: usize,
    pub sac_targets: Vec<f64>,
    pub coverages: Vec<f64>,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            bins: DEFAULT_BINS,
            sac_targets: vec![0.95, 0.99],
            coverages: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricOutcome {
    Value(f64),
    /// Defined for this input kind but degenerate on this data.
    Undefined(String),
    /// Not applicable to this κ or log kind; omitted from reports.
    Omitted(String),
}

pub struct EvalContext<'a> {
    pub scores: &'a ScoreVector,
    pub curve: &'a RcCurve,
    /// Absent for score-only logs.
    pub probabilities: Option<&'a ProbabilityView<'a>>,
    pub config: &'a MetricConfig,
}

pub trait Metric: Send + Sync {
    fn id(&self) -> &'static str;

    /// `(metric id, outcome)` pairs; parameterized metrics emit one per setting.
    fn evaluate(&self, ctx: &EvalContext<'_>) -> Vec<(String, MetricOutcome)>;
}

fn single(id: &str, outcome: MetricOutcome) -> Vec<(String, MetricOutcome)> {
    vec![(id.to_string(), outcome)]
}

fn from_result(r: crate::error::Result<f64>) -> MetricOutcome {
    match r {
        Ok(v) => MetricOutcome::Value(v),
        Err(Error::OutsideUnitInterval) => MetricOutcome::Omitted(Error::OutsideUnitInterval.to_string()),
        Err(e @ Error::Undefined(_)) => MetricOutcome::Undefined(e.to_string()),
        Err(e) => MetricOutcome::Omitted(e.to_string()),
    }
}

struct Accuracy;
impl Metric for Accuracy {
    fn id(&self) -> &'static str {
        "accuracy"
    }
    fn evaluate(&self, ctx: &EvalContext<'_>) -> Vec<(String, MetricOutcome)> {
        single(self.id(), MetricOutcome::Value(ctx.scores.accuracy()))
    }
}

struct Auroc;
impl Metric for Auroc {
    fn id(&self) -> &'static str {
        "auroc"
    }
    fn evaluate(&self, ctx: &EvalContext<'_>) -> Vec<(String, MetricOutcome)> {
        single(self.id(), from_result(auroc(ctx.scores)))
    }
}

struct Gamma;
impl Metric for Gamma {
    fn id(&self) -> &'static str {
        "gamma"
    }
    fn evaluate(&self, ctx: &EvalContext<'_>) -> Vec<(String, MetricOutcome)> {
        single(self.id(), from_result(auroc(ctx.scores).map(gamma_from_auroc)))
    }
}

struct Aurc;
impl Metric for Aurc {
    fn id(&self) -> &'static str {
        "aurc"
    }
    fn evaluate(&self, ctx: &EvalContext<'_>) -> Vec<(String, MetricOutcome)> {
        single(self.id(), MetricOutcome::Value(aurc(ctx.curve)))
    }
}

struct EAurc;
impl Metric for EAurc {
    fn id(&self) -> &'static str {
        "e_aurc"
    }
    fn evaluate(&self, ctx: &EvalContext<'_>) -> Vec<(String, MetricOutcome)> {
        let optimal = optimal_aurc_counts(ctx.scores.num_correct(), ctx.scores.len());
        single(self.id(), MetricOutcome::Value(aurc(ctx.curve) - optimal))
    }
}

struct AurcOverCoverages;
impl Metric for AurcOverCoverages {
    fn id(&self) -> &'static str {
        "aurc_c"
    }
    fn evaluate(&self, ctx: &EvalContext<'_>) -> Vec<(String, MetricOutcome)> {
        if ctx.config.coverages.is_empty() {
            return single(self.id(), MetricOutcome::Omitted("no coverage set given".into()));
        }
        single(
            self.id(),
            from_result(aurc_over_coverages(ctx.curve, &ctx.config.coverages)),
        )
    }
}

struct SacCoverage;
impl Metric for SacCoverage {
    fn id(&self) -> &'static str {
        "sac_coverage"
    }
    fn evaluate(&self, ctx: &EvalContext<'_>) -> Vec<(String, MetricOutcome)> {
        ctx.config
            .sac_targets
            .iter()
            .map(|&t| {
                (
                    format!("sac_coverage@{t}"),
                    MetricOutcome::Value(sac_coverage(ctx.curve, t)),
                )
            })
            .collect()
    }
}

struct Ece;
impl Metric for Ece {
    fn id(&self) -> &'static str {
        "ece"
    }
    fn evaluate(&self, ctx: &EvalContext<'_>) -> Vec<(String, MetricOutcome)> {
        single(self.id(), from_result(ece(ctx.scores, ctx.config.bins)))
    }
}

struct NegLogLikelihood;
impl Metric for NegLogLikelihood {
    fn id(&self) -> &'static str {
        "nll"
    }
    fn evaluate(&self, ctx: &EvalContext<'_>) -> Vec<(String, MetricOutcome)> {
        let outcome = match ctx.probabilities {
            None => MetricOutcome::Omitted("log carries no probability vectors".into()),
            Some(view) => {
                let r = nll(view);
                if r.value.is_finite() {
                    MetricOutcome::Value(r.value)
                } else {
                    MetricOutcome::Undefined(format!(
                        "infinite: zero probability on the true class in {} rows",
                        r.zero_probability_rows
                    ))
                }
            }
        };
        single(self.id(), outcome)
    }
}

struct Brier;
impl Metric for Brier {
    fn id(&self) -> &'static str {
        "brier"
    }
    fn evaluate(&self, ctx: &EvalContext<'_>) -> Vec<(String, MetricOutcome)> {
        let outcome = match ctx.probabilities {
            None => MetricOutcome::Omitted("log carries no probability vectors".into()),
            Some(view) => MetricOutcome::Value(brier(view)),
        };
        single(self.id(), outcome)
    }
}

#[derive(Clone)]
pub struct MetricRegistry {
    metrics: Vec<Arc<dyn Metric>>,
}

impl MetricRegistry {
    pub fn empty() -> Self {
        Self {
            metrics: Vec::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(Accuracy));
        r.register(Arc::new(Auroc));
        r.register(Arc::new(Gamma));
        r.register(Arc::new(Ece));
        r.register(Arc::new(Aurc));
        r.register(Arc::new(EAurc));
        r.register(Arc::new(AurcOverCoverages));
        r.register(Arc::new(SacCoverage));
        r.register(Arc::new(NegLogLikelihood));
        r.register(Arc::new(Brier));
        r
    }

    /// Replaces a metric with the same id, otherwise appends.
    pub fn register(&mut self, metric: Arc<dyn Metric>) {
        match self.metrics.iter().position(|m| m.id() == metric.id()) {
            Some(i) => self.metrics[i] = metric,
            None => self.metrics.push(metric),
        }
    }

    pub fn get(&self, id: &str) -> Option<Arc<dyn Metric>> {
        self.metrics.iter().find(|m| m.id() == id).cloned()
    }

    pub fn ids(&self) -> Vec<&'static str> {
        self.metrics.iter().map(|m| m.id()).collect()
    }

    pub fn evaluate_all(&self, ctx: &EvalContext<'_>) -> Vec<(String, MetricOutcome)> {
        self.metrics.iter().flat_map(|m| m.evaluate(ctx)).collect()
    }
}

impl Default for MetricRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::rc_curve;

    #[test]
    fn builtin_ids() {
        assert_eq!(
            MetricRegistry::with_builtins().ids(),
            vec![
                "accuracy",
                "auroc",
                "gamma",
                "ece",
                "aurc",
                "e_aurc",
                "aurc_c",
                "sac_coverage",
                "nll",
                "brier"
            ]
        );
    }

    #[test]
    fn score_only_context_omits_probability_metrics() {
        let sv = ScoreVector::new(vec![3.0, -1.0, 0.5], vec![true, false, true]).unwrap();
        let curve = rc_curve(&sv).unwrap();
        let config = MetricConfig::default();
        let ctx = EvalContext {
            scores: &sv,
            curve: &curve,
            probabilities: None,
            config: &config,
        };
        let out = MetricRegistry::with_builtins().evaluate_all(&ctx);
        let get = |id: &str| out.iter().find(|(k, _)| k == id).unwrap().1.clone();
        assert_eq!(get("auroc"), MetricOutcome::Value(1.0));
        assert_eq!(get("ece"), MetricOutcome::Omitted("score outside [0,1]".into()));
        assert!(matches!(get("nll"), MetricOutcome::Omitted(_)));
        assert!(matches!(get("aurc_c"), MetricOutcome::Omitted(_)));
        assert!(out.iter().any(|(k, _)| k == "sac_coverage@0.95"));
    }

    #[test]
    fn all_correct_makes_ranking_undefined() {
        let sv = ScoreVector::new(vec![0.9, 0.8], vec![true, true]).unwrap();
        let curve = rc_curve(&sv).unwrap();
        let config = MetricConfig::default();
        let ctx = EvalContext {
            scores: &sv,
            curve: &curve,
            probabilities: None,
            config: &config,
        };
        let out = Auroc.evaluate(&ctx);
        assert!(matches!(out[0].1, MetricOutcome::Undefined(_)));
    }
}
