//! Prediction logs: the per-instance record of a classifier's outputs.
//!
//! A log holds one label per instance and, for each of `passes` forward
//! passes, either a logit vector, a probability vector or a single score.
//! Values are stored widened to `f64`; on disk they are `f32`.

mod csv_format;
mod split;
mod uql1;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use split::{stratified_split, subsample_class, SplitAssignment};

/// Tolerance on the sum of a stored probability vector.
pub const SIMPLEX_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogKind {
    Logits,
    Probs,
    ScoreOnly,
}

impl LogKind {
    pub fn code(self) -> u8 {
        match self {
            LogKind::Logits => 0,
            LogKind::Probs => 1,
            LogKind::ScoreOnly => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(LogKind::Logits),
            1 => Some(LogKind::Probs),
            2 => Some(LogKind::ScoreOnly),
            _ => None,
        }
    }
}

impl fmt::Display for LogKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogKind::Logits => "logits",
            LogKind::Probs => "probs",
            LogKind::ScoreOnly => "score-only",
        })
    }
}

/// On-disk encodings understood by [`load_log`] and [`save_log`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogFormat {
    Csv,
    Uql1,
}

impl LogFormat {
    /// `.csv` files are CSV, everything else is treated as UQL1.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => LogFormat::Csv,
            _ => LogFormat::Uql1,
        }
    }
}

/// How labels are checked during validation.
///
/// ID logs require `label < k` for vector payloads and a 0/1 correctness flag
/// for score-only payloads. Pool logs carry out-of-distribution class ids in
/// the label column and skip that check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelPolicy {
    InDistribution,
    PoolClassId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionLog {
    kind: LogKind,
    num_classes: usize,
    passes: usize,
    labels: Vec<u32>,
    values: Vec<f64>,
}

impl PredictionLog {
    /// Builds and validates an in-distribution log.
    ///
    /// `values` is laid out instance-major, pass-major within an instance:
    /// `values[((i * passes) + t) * width ..][..width]`.
    pub fn new(
        kind: LogKind,
        num_classes: usize,
        passes: usize,
        labels: Vec<u32>,
        values: Vec<f64>,
    ) -> Result<Self> {
        Self::with_policy(
            kind,
            num_classes,
            passes,
            labels,
            values,
            LabelPolicy::InDistribution,
        )
    }

    pub fn with_policy(
        kind: LogKind,
        num_classes: usize,
        passes: usize,
        labels: Vec<u32>,
        values: Vec<f64>,
        policy: LabelPolicy,
    ) -> Result<Self> {
        if num_classes == 0 {
            return Err(Error::MalformedHeader("num_classes must be at least 1".into()));
        }
        if passes == 0 {
            return Err(Error::MalformedHeader("passes must be at least 1".into()));
        }
        if labels.is_empty() {
            return Err(Error::MalformedHeader("log holds no records".into()));
        }
        let log = PredictionLog {
            kind,
            num_classes,
            passes,
            labels,
            values,
        };
        let width = log.width();
        let expected = log.labels.len() * passes * width;
        if log.values.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "value buffer holds {} entries, expected {expected}",
                log.values.len()
            )));
        }
        for (r, row) in log.values.chunks_exact(width).enumerate() {
            let label = log.labels[r / passes];
            validate_row(kind, num_classes, r + 1, label, row, policy)?;
        }
        Ok(log)
    }

    pub fn kind(&self) -> LogKind {
        self.kind
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn passes(&self) -> usize {
        self.passes
    }

    /// Values per stored row: `k` for vector payloads, 1 for score-only.
    pub fn width(&self) -> usize {
        match self.kind {
            LogKind::ScoreOnly => 1,
            _ => self.num_classes,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> u32 {
        self.labels[i]
    }

    /// Payload of instance `i` for forward pass `pass`.
    pub fn row(&self, i: usize, pass: usize) -> &[f64] {
        let w = self.width();
        let start = (i * self.passes + pass) * w;
        &self.values[start..start + w]
    }

    pub fn rows(&self, i: usize) -> impl Iterator<Item = &[f64]> {
        (0..self.passes).map(move |t| self.row(i, t))
    }

    pub(crate) fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sub-log holding the instances at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidArgument("subset of zero instances".into()));
        }
        let stride = self.passes * self.width();
        let mut labels = Vec::with_capacity(indices.len());
        let mut values = Vec::with_capacity(indices.len() * stride);
        for &i in indices {
            if i >= self.len() {
                return Err(Error::InvalidArgument(format!(
                    "index {i} out of range for {} instances",
                    self.len()
                )));
            }
            labels.push(self.labels[i]);
            values.extend_from_slice(&self.values[i * stride..(i + 1) * stride]);
        }
        Ok(PredictionLog {
            labels,
            values,
            ..*self
        })
    }
}

fn validate_row(
    kind: LogKind,
    num_classes: usize,
    row: usize,
    label: u32,
    values: &[f64],
    policy: LabelPolicy,
) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row });
    }
    match (kind, policy) {
        (_, LabelPolicy::PoolClassId) => {}
        (LogKind::ScoreOnly, LabelPolicy::InDistribution) => {
            if label > 1 {
                return Err(Error::CorrectnessFlag { row, label });
            }
        }
        (_, LabelPolicy::InDistribution) => {
            if label as usize >= num_classes {
                return Err(Error::LabelOutOfRange {
                    row,
                    label,
                    num_classes,
                });
            }
        }
    }
    if kind == LogKind::Probs {
        let sum: f64 = values.iter().sum();
        let in_range = values.iter().all(|p| (0.0..=1.0).contains(p));
        if !in_range || (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::Simplex { row, sum });
        }
    }
    Ok(())
}

/// Loads and validates an in-distribution log.
pub fn load_log(path: impl AsRef<Path>, format: LogFormat) -> Result<PredictionLog> {
    load_log_with(path, format, LabelPolicy::InDistribution)
}

pub fn load_log_with(
    path: impl AsRef<Path>,
    format: LogFormat,
    policy: LabelPolicy,
) -> Result<PredictionLog> {
    let path = path.as_ref();
    match format {
        LogFormat::Csv => {
            let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
            csv_format::read(std::io::BufReader::new(file), policy)
        }
        LogFormat::Uql1 => {
            let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
            uql1::decode(&bytes, policy)
        }
    }
}

pub fn save_log(log: &PredictionLog, path: impl AsRef<Path>, format: LogFormat) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    match format {
        LogFormat::Csv => csv_format::write(log, &mut out)?,
        LogFormat::Uql1 => uql1::encode_into(log, &mut out).map_err(|e| Error::io(path, e))?,
    }
    use std::io::Write;
    out.flush().map_err(|e| Error::io(path, e))
}

pub use csv_format::{read as read_csv, write as write_csv};
pub use uql1::{decode as decode_uql1, encode as encode_uql1, MAGIC as UQL1_MAGIC};

#[cfg(test)]
mod tests {
    use super::*;

    fn probs(rows: &[(u32, [f64; 3])]) -> Result<PredictionLog> {
        let labels = rows.iter().map(|r| r.0).collect();
        let values = rows.iter().flat_map(|r| r.1).collect();
        PredictionLog::new(LogKind::Probs, 3, 1, labels, values)
    }

    #[test]
    fn accepts_simplex_rows() {
        let log = probs(&[(1, [0.2, 0.7, 0.1])]).unwrap();
        assert_eq!(log.len(), 1);
        assert_eq!(log.row(0, 0), &[0.2, 0.7, 0.1]);
    }

    #[test]
    fn rejects_off_simplex_row_with_index() {
        let err = probs(&[(1, [0.2, 0.7, 0.1]), (0, [0.2, 0.9, 0.1])]).unwrap_err();
        assert!(matches!(err, Error::Simplex { row: 2, .. }), "{err}");
    }

    #[test]
    fn rejects_label_out_of_range() {
        let err = probs(&[(3, [0.2, 0.7, 0.1])]).unwrap_err();
        assert!(matches!(err, Error::LabelOutOfRange { row: 1, label: 3, .. }));
    }

    #[test]
    fn rejects_non_finite() {
        let err =
            PredictionLog::new(LogKind::Logits, 2, 1, vec![0], vec![f64::NAN, 0.0]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 1 }));
    }

    #[test]
    fn score_only_labels_are_flags() {
        assert!(PredictionLog::new(LogKind::ScoreOnly, 10, 1, vec![0, 1], vec![0.3, 0.9]).is_ok());
        let err = PredictionLog::new(LogKind::ScoreOnly, 10, 1, vec![2], vec![0.3]).unwrap_err();
        assert!(matches!(err, Error::CorrectnessFlag { row: 1, label: 2 }));
    }

    #[test]
    fn pool_policy_skips_label_range() {
        let log = PredictionLog::with_policy(
            LogKind::Logits,
            2,
            1,
            vec![9000],
            vec![0.0, 1.0],
            LabelPolicy::PoolClassId,
        );
        assert!(log.is_ok());
    }

    #[test]
    fn multi_pass_rows_are_pass_major() {
        let log = PredictionLog::new(
            LogKind::Probs,
            2,
            2,
            vec![0, 1],
            vec![1.0, 0.0, 0.0, 1.0, 0.5, 0.5, 0.25, 0.75],
        )
        .unwrap();
        assert_eq!(log.row(0, 1), &[0.0, 1.0]);
        assert_eq!(log.row(1, 0), &[0.5, 0.5]);
        assert_eq!(log.rows(1).count(), 2);
    }

    #[test]
    fn subset_preserves_order() {
        let log = probs(&[
            (0, [1.0, 0.0, 0.0]),
            (1, [0.0, 1.0, 0.0]),
            (2, [0.0, 0.0, 1.0]),
        ])
        .unwrap();
        let sub = log.subset(&[2, 0]).unwrap();
        assert_eq!(sub.labels(), &[2, 0]);
        assert_eq!(sub.row(0, 0), &[0.0, 0.0, 1.0]);
    }
}
