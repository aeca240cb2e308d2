use std::path::PathBuf;

use crate::predlog::LogKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("row {row}: expected {expected} values, found {found}")]
    RowLength {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}: unparsable value {value:?}")]
    Parse { row: usize, value: String },
    #[error("row {row}: non-finite value")]
    NonFinite { row: usize },
    #[error("row {row}: probability vector off the simplex (sum {sum}, entries must lie in [0,1] and sum to 1 within 1e-5)")]
    Simplex { row: usize, sum: f64 },
    #[error("row {row}: label {label} out of range for {num_classes} classes")]
    LabelOutOfRange {
        row: usize,
        label: u32,
        num_classes: usize,
    },
    #[error("row {row}: score-only label must be a 0/1 correctness flag, found {label}")]
    CorrectnessFlag { row: usize, label: u32 },
    #[error("row {row}: passes of one instance disagree on the label")]
    PassLabelMismatch { row: usize },
    #[error("truncated or oversized UQL1 payload: expected {expected} bytes, found {found}")]
    PayloadSize { expected: u64, found: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{op} is not defined for {kind} logs")]
    IncompatibleKind { op: &'static str, kind: LogKind },
    #[error("unknown confidence function {0:?}")]
    UnknownKappa(String),
    #[error("confidence spec mismatch: pool scored with {pool}, ID log scored with {id}")]
    KappaMismatch { pool: String, id: String },
    #[error("score outside [0,1]")]
    OutsideUnitInterval,
    #[error("{0}")]
    Undefined(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for outcomes that are mathematically undefined on otherwise valid input.
    pub fn is_undefined(&self) -> bool {
        matches!(self, Error::Undefined(_))
    }

    /// Stable machine-readable identifier used in error reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::MalformedHeader(_) => "malformed_header",
            Error::RowLength { .. } => "row_length",
            Error::Parse { .. } => "parse",
            Error::NonFinite { .. } => "non_finite",
            Error::Simplex { .. } => "simplex",
            Error::LabelOutOfRange { .. } => "label_out_of_range",
            Error::CorrectnessFlag { .. } => "correctness_flag",
            Error::PassLabelMismatch { .. } => "pass_label_mismatch",
            Error::PayloadSize { .. } => "payload_size",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::IncompatibleKind { .. } => "incompatible_kind",
            Error::UnknownKappa(_) => "unknown_kappa",
            Error::KappaMismatch { .. } => "kappa_mismatch",
            Error::OutsideUnitInterval => "outside_unit_interval",
            Error::Undefined(_) => "undefined",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
