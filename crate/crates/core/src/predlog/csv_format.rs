//! CSV encoding. The header fixes the kind: `label,p_0..p_{k-1}`,
//! `label,logit_0..logit_{k-1}` or `label,score`. CSV logs are single-pass.

use std::io::{Read, Write};

use super::{LabelPolicy, LogKind, PredictionLog};
use crate::error::{Error, Result};

fn parse_header(fields: &csv::StringRecord) -> Result<(LogKind, usize)> {
    let cols: Vec<&str> = fields.iter().map(str::trim).collect();
    if cols.first() != Some(&"label") {
        return Err(Error::MalformedHeader("first column must be `label`".into()));
    }
    let rest = &cols[1..];
    if rest == ["score"] {
        return Ok((LogKind::ScoreOnly, 1));
    }
    let (kind, prefix) = match rest.first() {
        Some(c) if c.starts_with("p_") => (LogKind::Probs, "p_"),
        Some(c) if c.starts_with("logit_") => (LogKind::Logits, "logit_"),
        _ => {
            return Err(Error::MalformedHeader(
                "expected p_0.., logit_0.. or score columns after label".into(),
            ))
        }
    };
    for (j, col) in rest.iter().enumerate() {
        if *col != format!("{prefix}{j}") {
            return Err(Error::MalformedHeader(format!(
                "column {} is {col:?}, expected {prefix}{j}",
                j + 1
            )));
        }
    }
    Ok((kind, rest.len()))
}

pub fn read<R: Read>(input: R, policy: LabelPolicy) -> Result<PredictionLog> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input);
    let (kind, width) = parse_header(reader.headers()?)?;
    // score-only CSV carries no class count; record the flag domain
    let num_classes = if kind == LogKind::ScoreOnly { 2 } else { width };

    let mut labels = Vec::new();
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record?;
        if record.len() != width + 1 {
            return Err(Error::RowLength {
                row,
                expected: width,
                found: record.len().saturating_sub(1),
            });
        }
        let label = record[0].trim();
        labels.push(label.parse::<u32>().map_err(|_| Error::Parse {
            row,
            value: label.to_string(),
        })?);
        for field in record.iter().skip(1) {
            let v: f32 = field.trim().parse().map_err(|_| Error::Parse {
                row,
                value: field.to_string(),
            })?;
            values.push(v as f64);
        }
    }
    PredictionLog::with_policy(kind, num_classes, 1, labels, values, policy)
}

pub fn write<W: Write>(log: &PredictionLog, out: W) -> Result<()> {
    if log.passes() != 1 {
        return Err(Error::InvalidArgument(
            "CSV logs are single-pass; use UQL1 for multi-pass logs".into(),
        ));
    }
    let mut writer = csv::Writer::from_writer(out);
    let mut header = vec!["label".to_string()];
    match log.kind() {
        LogKind::ScoreOnly => header.push("score".into()),
        LogKind::Probs => header.extend((0..log.width()).map(|j| format!("p_{j}"))),
        LogKind::Logits => header.extend((0..log.width()).map(|j| format!("logit_{j}"))),
    }
    writer.write_record(&header)?;
    let mut record = Vec::with_capacity(log.width() + 1);
    for i in 0..log.len() {
        record.clear();
        record.push(log.label(i).to_string());
        record.extend(log.row(i, 0).iter().map(|&v| (v as f32).to_string()));
        writer.write_record(&record)?;
    }
    writer.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read_str(s: &str) -> Result<PredictionLog> {
        read(s.as_bytes(), LabelPolicy::InDistribution)
    }

    #[test]
    fn minimal_probs_log() {
        let log = read_str("label,p_0,p_1,p_2\n1,0.2,0.7,0.1\n").unwrap();
        assert_eq!(log.kind(), LogKind::Probs);
        assert_eq!(log.num_classes(), 3);
        assert_eq!(log.len(), 1);
    }

    #[test]
    fn simplex_violation_reports_row() {
        let err = read_str("label,p_0,p_1,p_2\n1,0.2,0.9,0.1\n").unwrap_err();
        assert!(matches!(err, Error::Simplex { row: 1, .. }), "{err}");
    }

    #[test]
    fn kinds_from_header() {
        let log = read_str("label,logit_0,logit_1\n0,1.5,-2\n").unwrap();
        assert_eq!(log.kind(), LogKind::Logits);
        let log = read_str("label,score\n1,0.25\n0,-3\n").unwrap();
        assert_eq!(log.kind(), LogKind::ScoreOnly);
        assert_eq!(log.width(), 1);
    }

    #[test]
    fn header_errors() {
        assert!(matches!(read_str("y,p_0\n0,1\n"), Err(Error::MalformedHeader(_))));
        assert!(matches!(
            read_str("label,p_0,p_2\n0,1,0\n"),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(read_str("label,q\n0,1\n"), Err(Error::MalformedHeader(_))));
    }

    #[test]
    fn row_errors() {
        assert!(matches!(
            read_str("label,p_0,p_1\n0,0.5,0.5\n1,1.0\n"),
            Err(Error::RowLength { row: 2, expected: 2, found: 1 })
        ));
        assert!(matches!(
            read_str("label,logit_0,logit_1\n0,NaN,1\n"),
            Err(Error::NonFinite { row: 1 })
        ));
        assert!(matches!(
            read_str("label,logit_0,logit_1\n0,abc,1\n"),
            Err(Error::Parse { row: 1, .. })
        ));
        assert!(matches!(
            read_str("label,logit_0,logit_1\n2,0,1\n"),
            Err(Error::LabelOutOfRange { row: 1, .. })
        ));
    }

    #[test]
    fn write_then_read() {
        let log = read_str("label,logit_0,logit_1\n0,0.1,-2.75\n1,3,4e-3\n").unwrap();
        let mut buf = Vec::new();
        write(&log, &mut buf).unwrap();
        let back = read(buf.as_slice(), LabelPolicy::InDistribution).unwrap();
        assert_eq!(back, log);
    }
}
