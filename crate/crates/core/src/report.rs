//! Serializable evaluation reports and multi-model comparison tables.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kappa::{score_log_with, KappaRegistry, KappaSpec, ProbabilityView, ScoreVector};
use crate::metrics::{rc_curve, spearman, EvalContext, MetricConfig, MetricOutcome, MetricRegistry, RcCurve};
use crate::predlog::{LogKind, PredictionLog};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UndefinedStatus {
    Undefined,
}

/// A metric value, or an explicit marker for a degenerate computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricValue {
    Value(f64),
    Undefined {
        status: UndefinedStatus,
        reason: String,
    },
}

impl MetricValue {
    pub fn undefined(reason: impl Into<String>) -> Self {
        MetricValue::Undefined {
            status: UndefinedStatus::Undefined,
            reason: reason.into(),
        }
    }

    /// Non-finite numbers become undefined so that JSON never carries null.
    pub fn from_f64(v: f64) -> Self {
        if v.is_finite() {
            MetricValue::Value(v)
        } else {
            Self::undefined(format!("non-finite value {v}"))
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            MetricValue::Value(v) => Some(*v),
            MetricValue::Undefined { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    /// Input files the report was computed from.
    pub inputs: Vec<String>,
}

impl Provenance {
    pub fn new(inputs: Vec<String>) -> Self {
        Self {
            tool: "uqbench".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            inputs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub model: String,
    pub kappa: KappaSpec,
    pub instances: usize,
    pub metric_config: MetricConfig,
    pub metrics: BTreeMap<String, MetricValue>,
    /// Metrics that do not apply to this κ or log, with the reason.
    pub omitted: BTreeMap<String, String>,
    /// The run configuration that produced the report, echoed verbatim.
    pub config: serde_json::Value,
    pub provenance: Provenance,
}

impl MetricReport {
    pub fn from_outcomes(
        model: impl Into<String>,
        kappa: KappaSpec,
        instances: usize,
        metric_config: MetricConfig,
        outcomes: Vec<(String, MetricOutcome)>,
    ) -> Self {
        let mut metrics = BTreeMap::new();
        let mut omitted = BTreeMap::new();
        for (id, outcome) in outcomes {
            match outcome {
                MetricOutcome::Value(v) => {
                    metrics.insert(id, MetricValue::from_f64(v));
                }
                MetricOutcome::Undefined(reason) => {
                    metrics.insert(id, MetricValue::undefined(reason));
                }
                MetricOutcome::Omitted(reason) => {
                    omitted.insert(id, reason);
                }
            }
        }
        Self {
            model: model.into(),
            kappa,
            instances,
            metric_config,
            metrics,
            omitted,
            config: serde_json::Value::Null,
            provenance: Provenance::new(Vec::new()),
        }
    }

    pub fn with_config(mut self, config: serde_json::Value) -> Self {
        self.config = config;
        self
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.metrics.get(id).and_then(MetricValue::value)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Undefined metric ids, in order.
    pub fn undefined_metrics(&self) -> Vec<&str> {
        self.metrics
            .iter()
            .filter(|(_, v)| v.value().is_none())
            .map(|(k, _)| k.as_str())
            .collect()
    }
}

/// Everything computed for one log under one κ.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub scores: ScoreVector,
    pub curve: RcCurve,
    pub outcomes: Vec<(String, MetricOutcome)>,
}

pub fn evaluate_log(
    log: &PredictionLog,
    kappa: &KappaSpec,
    config: &MetricConfig,
    kappas: &KappaRegistry,
    metrics: &MetricRegistry,
) -> Result<Evaluation> {
    let scores = score_log_with(log, kappa, kappas)?;
    let curve = rc_curve(&scores)?;
    let view = match log.kind() {
        LogKind::ScoreOnly => None,
        _ => Some(ProbabilityView::for_spec(log, kappa)?),
    };
    let ctx = EvalContext {
        scores: &scores,
        curve: &curve,
        probabilities: view.as_ref(),
        config,
    };
    let outcomes = metrics.evaluate_all(&ctx);
    Ok(Evaluation {
        scores,
        curve,
        outcomes,
    })
}

/// Evaluates with the built-in κ and metric registries.
pub fn evaluate(log: &PredictionLog, kappa: &KappaSpec, config: &MetricConfig) -> Result<Evaluation> {
    evaluate_log(
        log,
        kappa,
        config,
        &KappaRegistry::with_builtins(),
        &MetricRegistry::with_builtins(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub metric_a: String,
    pub metric_b: String,
    pub spearman: MetricValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeImprovement {
    pub baseline: String,
    pub variant: String,
    /// `variant - baseline` per metric.
    pub deltas: BTreeMap<String, MetricValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub metrics: Vec<String>,
    pub rows: Vec<MetricReport>,
    pub correlations: Vec<Correlation>,
    pub improvements: Vec<RelativeImprovement>,
}

impl ComparisonTable {
    /// Requires at least two reports with identical metric schemas and unique
    /// model ids. `pairs` lists `(baseline, variant)` model ids.
    pub fn build(rows: Vec<MetricReport>, pairs: &[(String, String)]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::InvalidArgument("comparison needs at least two reports".into()));
        }
        let schema: BTreeSet<&String> = rows[0].metrics.keys().collect();
        for r in &rows[1..] {
            let other: BTreeSet<&String> = r.metrics.keys().collect();
            if other != schema {
                let diff: Vec<&str> = schema
                    .symmetric_difference(&other)
                    .map(|s| s.as_str())
                    .collect();
                return Err(Error::InvalidArgument(format!(
                    "metric schema mismatch between '{}' and '{}': {}",
                    rows[0].model,
                    r.model,
                    diff.join(", ")
                )));
            }
        }
        let mut ids = BTreeSet::new();
        for r in &rows {
            if !ids.insert(r.model.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate model id '{}'", r.model)));
            }
        }
        let metrics: Vec<String> = schema.into_iter().cloned().collect();

        let mut correlations = Vec::new();
        for (a, ma) in metrics.iter().enumerate() {
            for mb in &metrics[a + 1..] {
                correlations.push(Correlation {
                    metric_a: ma.clone(),
                    metric_b: mb.clone(),
                    spearman: column_correlation(&rows, ma, mb),
                });
            }
        }

        let find = |id: &str| {
            rows.iter()
                .find(|r| r.model == id)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown model id '{id}' in pair")))
        };
        let mut improvements = Vec::new();
        for (b, v) in pairs {
            let (base, var) = (find(b)?, find(v)?);
            let deltas = metrics
                .iter()
                .map(|m| {
                    let d = match (base.get(m), var.get(m)) {
                        (Some(x), Some(y)) => MetricValue::from_f64(y - x),
                        _ => MetricValue::undefined("metric undefined in one of the pair"),
                    };
                    (m.clone(), d)
                })
                .collect();
            improvements.push(RelativeImprovement {
                baseline: b.clone(),
                variant: v.clone(),
                deltas,
            });
        }
        Ok(Self {
            metrics,
            rows,
            correlations,
            improvements,
        })
    }

    /// `model,<metric>...` with `undefined` for degenerate cells.
    pub fn write_table_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["model".to_string()];
        header.extend(self.metrics.iter().cloned());
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.model.clone()];
            rec.extend(self.metrics.iter().map(|m| cell(&r.metrics[m])));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<table csv>", e))?;
        Ok(())
    }

    pub fn write_correlations_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["metric_a", "metric_b", "spearman"])?;
        for c in &self.correlations {
            w.write_record([c.metric_a.clone(), c.metric_b.clone(), cell(&c.spearman)])?;
        }
        w.flush().map_err(|e| Error::io("<correlation csv>", e))?;
        Ok(())
    }

    pub fn write_improvements_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["baseline", "variant", "metric", "delta"])?;
        for p in &self.improvements {
            for (m, d) in &p.deltas {
                w.write_record([p.baseline.clone(), p.variant.clone(), m.clone(), cell(d)])?;
            }
        }
        w.flush().map_err(|e| Error::io("<improvement csv>", e))?;
        Ok(())
    }
}

fn cell(v: &MetricValue) -> String {
    match v {
        MetricValue::Value(x) => x.to_string(),
        MetricValue::Undefined { .. } => "undefined".into(),
    }
}

fn column_correlation(rows: &[MetricReport], a: &str, b: &str) -> MetricValue {
    let mut xs = Vec::with_capacity(rows.len());
    let mut ys = Vec::with_capacity(rows.len());
    for r in rows {
        match (r.get(a), r.get(b)) {
            (Some(x), Some(y)) => {
                xs.push(x);
                ys.push(y);
            }
            _ => return MetricValue::undefined(format!("'{a}' or '{b}' undefined for '{}'", r.model)),
        }
    }
    match spearman(&xs, &ys) {
        Ok(rho) => MetricValue::Value(rho),
        Err(e) => MetricValue::undefined(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(model: &str, metrics: &[(&str, f64)]) -> MetricReport {
        let outcomes = metrics
            .iter()
            .map(|&(k, v)| (k.to_string(), MetricOutcome::Value(v)))
            .collect();
        MetricReport::from_outcomes(model, KappaSpec::softmax_response(), 10, MetricConfig::default(), outcomes)
    }

    #[test]
    fn undefined_serializes_as_status_object() {
        let r = MetricReport::from_outcomes(
            "m",
            KappaSpec::softmax_response(),
            3,
            MetricConfig::default(),
            vec![
                ("auroc".into(), MetricOutcome::Undefined("all correct".into())),
                ("ece".into(), MetricOutcome::Omitted("score outside [0,1]".into())),
                ("nll".into(), MetricOutcome::Value(f64::INFINITY)),
            ],
        );
        let json: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(json["metrics"]["auroc"]["status"], "undefined");
        assert_eq!(json["metrics"]["auroc"]["reason"], "all correct");
        assert_eq!(json["metrics"]["nll"]["status"], "undefined");
        assert_eq!(json["omitted"]["ece"], "score outside [0,1]");
        assert_eq!(json["metric_config"]["bins"], 15);
        let back = MetricReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn two_reports_one_cell_per_pair() {
        let t = ComparisonTable::build(
            vec![report("a", &[("x", 1.0), ("y", 2.0), ("z", 5.0)]), report("b", &[("x", 2.0), ("y", 1.0), ("z", 5.0)])],
            &[("a".into(), "b".into())],
        )
        .unwrap();
        assert_eq!(t.correlations.len(), 3);
        let xy = &t.correlations[0];
        assert_eq!(xy.spearman, MetricValue::Value(-1.0));
        // z is constant across rows
        assert!(t.correlations[1].spearman.value().is_none());
        assert_eq!(t.improvements[0].deltas["x"], MetricValue::Value(1.0));
        let mut out = Vec::new();
        t.write_correlations_csv(&mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().contains("x,z,undefined"));
    }

    #[test]
    fn schema_mismatch_and_size() {
        let err = ComparisonTable::build(vec![report("a", &[("x", 1.0)]), report("b", &[("y", 1.0)])], &[]);
        assert!(err.unwrap_err().to_string().contains("schema mismatch"));
        assert!(ComparisonTable::build(vec![report("a", &[("x", 1.0)])], &[]).is_err());
        let dup = ComparisonTable::build(vec![report("a", &[("x", 1.0)]), report("a", &[("x", 1.0)])], &[]);
        assert!(dup.is_err());
    }
}
