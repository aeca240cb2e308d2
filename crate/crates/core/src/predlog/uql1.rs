//! UQL1 binary layout, little-endian throughout:
//!
//! ```text
//! magic "UQL1" | u32 version = 1 | u8 kind | u16 passes | u32 num_classes | u64 n
//! n * passes rows of: u32 label | width * f32
//! ```
//!
//! `width` is `num_classes` for logits/probs and 1 for score-only. Rows of one
//! instance are contiguous, ordered by pass.

use std::io::{self, Write};

use super::{LabelPolicy, LogKind, PredictionLog};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"UQL1";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 1 + 2 + 4 + 8;

pub fn encode(log: &PredictionLog) -> Vec<u8> {
    let row_len = 4 + 4 * log.width();
    let mut buf = Vec::with_capacity(HEADER_LEN + log.len() * log.passes() * row_len);
    encode_into(log, &mut buf).expect("writing to a Vec cannot fail");
    buf
}

pub fn encode_into<W: Write>(log: &PredictionLog, out: &mut W) -> io::Result<()> {
    let passes = u16::try_from(log.passes())
        .map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "passes exceeds u16"))?;
    let k = u32::try_from(log.num_classes())
        .map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "num_classes exceeds u32"))?;
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&[log.kind().code()])?;
    out.write_all(&passes.to_le_bytes())?;
    out.write_all(&k.to_le_bytes())?;
    out.write_all(&(log.len() as u64).to_le_bytes())?;

    let width = log.width();
    let mut row = Vec::with_capacity(4 + 4 * width);
    for (r, values) in log.values().chunks_exact(width).enumerate() {
        row.clear();
        row.extend_from_slice(&log.label(r / log.passes()).to_le_bytes());
        for &v in values {
            row.extend_from_slice(&(v as f32).to_le_bytes());
        }
        out.write_all(&row)?;
    }
    Ok(())
}

pub fn decode(bytes: &[u8], policy: LabelPolicy) -> Result<PredictionLog> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::MalformedHeader(format!(
            "UQL1 header needs {HEADER_LEN} bytes, file has {}",
            bytes.len()
        )));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::MalformedHeader("missing UQL1 magic".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::MalformedHeader(format!("unsupported version {version}")));
    }
    let kind = LogKind::from_code(bytes[8])
        .ok_or_else(|| Error::MalformedHeader(format!("unknown kind code {}", bytes[8])))?;
    let passes = u16::from_le_bytes(bytes[9..11].try_into().unwrap()) as usize;
    let num_classes = u32::from_le_bytes(bytes[11..15].try_into().unwrap()) as usize;
    let n = u64::from_le_bytes(bytes[15..23].try_into().unwrap());
    if passes == 0 || num_classes == 0 || n == 0 {
        return Err(Error::MalformedHeader(format!(
            "passes={passes}, num_classes={num_classes}, n={n}; all must be positive"
        )));
    }

    let width = if kind == LogKind::ScoreOnly { 1 } else { num_classes };
    let row_len = 4 + 4 * width as u64;
    let expected = (HEADER_LEN as u64)
        .saturating_add(n.saturating_mul(passes as u64).saturating_mul(row_len));
    if expected != bytes.len() as u64 {
        return Err(Error::PayloadSize {
            expected,
            found: bytes.len() as u64,
        });
    }

    let n = n as usize;
    let mut labels = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n * passes * width);
    for (r, row) in bytes[HEADER_LEN..].chunks_exact(row_len as usize).enumerate() {
        let label = u32::from_le_bytes(row[0..4].try_into().unwrap());
        if r % passes == 0 {
            labels.push(label);
        } else if labels[r / passes] != label {
            return Err(Error::PassLabelMismatch { row: r + 1 });
        }
        values.extend(
            row[4..]
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64),
        );
    }
    PredictionLog::with_policy(kind, num_classes, passes, labels, values, policy)
}
