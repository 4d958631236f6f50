//! CSV ingestion of two numeric columns with optional log10 transforms.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Obs2;

/// Column selector: a header name or a zero-based index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnRef {
    Name(String),
    Index(usize),
}

impl FromStr for ColumnRef {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::invalid("empty column reference"));
        }
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnRef::Index(i),
            Err(_) => ColumnRef::Name(s.to_string()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedRow {
    /// One-based line number in the file.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestResult {
    pub sample: Vec<Obs2>,
    pub rejected: Vec<RejectedRow>,
}

impl IngestResult {
    pub fn rejected_count(&self) -> usize {
        self.rejected.len()
    }
}

fn resolve(col: &ColumnRef, header: Option<&csv::StringRecord>) -> Result<usize> {
    match col {
        ColumnRef::Index(i) => Ok(*i),
        ColumnRef::Name(name) => header
            .and_then(|h| h.iter().position(|f| f.trim() == name))
            .ok_or_else(|| Error::invalid(format!("column '{name}' not found in header"))),
    }
}

fn value(rec: &csv::StringRecord, idx: usize, log10: bool, what: &str) -> std::result::Result<f64, String> {
    let raw = rec.get(idx).ok_or_else(|| format!("missing {what} field (column {idx})"))?;
    let v: f64 = raw.trim().parse().map_err(|_| format!("{what} field '{raw}' is not numeric"))?;
    let v = if log10 { v.log10() } else { v };
    if !v.is_finite() {
        return Err(format!("{what} value {raw} is not finite after transform"));
    }
    Ok(v)
}

/// Reads `(x1, x2)` pairs from a comma-separated file. A first line whose
/// selected fields are not all numeric is treated as a header. Rows that do
/// not parse, are non-finite after transforms, or have negative `x2` are
/// reported in `rejected`.
pub fn ingest_csv(
    path: impl AsRef<Path>,
    col_x1: &ColumnRef,
    col_x2: &ColumnRef,
    log10_x1: bool,
    log10_x2: bool,
) -> Result<IngestResult> {
    let path = path.as_ref();
    let mut reader =
        csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_path(path).map_err(
            |e| match e.kind() {
                csv::ErrorKind::Io(_) => Error::invalid(format!("cannot read {}: {e}", path.display())),
                _ => Error::Csv(e),
            },
        )?;
    let mut records = reader.records().enumerate().peekable();
    let mut header = None;
    if let Some((_, Ok(first))) = records.peek() {
        let numeric = |c: &ColumnRef| match c {
            ColumnRef::Index(i) => first.get(*i).is_some_and(|f| f.parse::<f64>().is_ok()),
            ColumnRef::Name(_) => false,
        };
        if !(numeric(col_x1) && numeric(col_x2)) {
            header = Some(first.clone());
            records.next();
        }
    }
    let i1 = resolve(col_x1, header.as_ref())?;
    let i2 = resolve(col_x2, header.as_ref())?;
    if let Some(h) = &header {
        for i in [i1, i2] {
            if i >= h.len() {
                return Err(Error::invalid(format!("column index {i} is out of range")));
            }
        }
    }
    let mut sample = Vec::new();
    let mut rejected = Vec::new();
    for (k, rec) in records {
        let line = k as u64 + 1;
        let rec = rec?;
        let parsed = value(&rec, i1, log10_x1, "x1").and_then(|a| {
            let b = value(&rec, i2, log10_x2, "x2")?;
            if b < 0.0 {
                return Err(format!("x2 value {b} is negative"));
            }
            Ok(Obs2::new(a, b))
        });
        match parsed {
            Ok(o) => sample.push(o),
            Err(reason) => rejected.push(RejectedRow { line, reason }),
        }
    }
    if sample.is_empty() {
        return Err(Error::invalid(format!("no usable rows in {} ({} rejected)", path.display(), rejected.len())));
    }
    Ok(IngestResult { sample, rejected })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn log10_of_powers_of_ten() {
        let f = file("a,b\n1,2\n10,0.5\n100,3\n");
        let r = ingest_csv(f.path(), &"a".parse().unwrap(), &"b".parse().unwrap(), true, false).unwrap();
        let x1: Vec<f64> = r.sample.iter().map(|o| o.x1).collect();
        assert_eq!(x1, vec![0.0, 1.0, 2.0]);
        assert_eq!(r.rejected_count(), 0);
    }

    #[test]
    fn negative_x2_is_rejected() {
        let f = file("1,2\n3,-0.1\n4,5\n");
        let r = ingest_csv(f.path(), &ColumnRef::Index(0), &ColumnRef::Index(1), false, false).unwrap();
        assert_eq!(r.sample.len(), 2);
        assert_eq!(r.rejected_count(), 1);
        assert_eq!(r.rejected[0].line, 2);
    }

    #[test]
    fn non_finite_after_log_is_rejected() {
        let f = file("x,y\n0,1\n10,1\n");
        let r = ingest_csv(f.path(), &ColumnRef::Index(0), &ColumnRef::Index(1), true, false).unwrap();
        assert_eq!(r.sample, vec![Obs2::new(1.0, 1.0)]);
        assert_eq!(r.rejected_count(), 1);
    }

    #[test]
    fn errors() {
        let f = file("a,b\n1,2\n");
        assert!(ingest_csv(f.path(), &"a".parse().unwrap(), &"zz".parse().unwrap(), false, false).is_err());
        assert!(ingest_csv("/no/such/file.csv", &ColumnRef::Index(0), &ColumnRef::Index(1), false, false).is_err());
        let g = file("a,b\n1,-2\n");
        assert!(ingest_csv(g.path(), &ColumnRef::Index(0), &ColumnRef::Index(1), false, false).is_err());
    }
}
