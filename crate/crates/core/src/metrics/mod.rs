//! Selective-prediction, ranking and calibration metrics.

mod calibration;
mod ranking;
mod rc;
mod registry;

pub use calibration::{brier, ece, nll, Nll, DEFAULT_BINS};
pub use ranking::{auroc, auroc_two_sample, gamma_from_auroc, spearman};
pub use rc::{
    aurc, aurc_over_coverages, e_aurc, optimal_aurc, optimal_aurc_counts, rc_curve, sac_coverage,
    RcCurve, RcPoint,
};
pub use registry::{EvalContext, Metric, MetricConfig, MetricOutcome, MetricRegistry};
