//! Label CSV ingestion.
//!
//! Schema: header
//! `id,pleural_effusion,infiltrate,congestion,atelectasis,pneumothorax,cardiomegaly,mass,foreign_object`,
//! one row per sample, cells strictly `0` or `1`.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use super::{Finding, N_FINDINGS};
use crate::error::{Error, Result};

pub type LabelRow = [bool; N_FINDINGS];

/// Ordered sample ids with one binary row per id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelTable {
    ids: Vec<String>,
    labels: Vec<LabelRow>,
}

impl LabelTable {
    pub fn new(ids: Vec<String>, labels: Vec<LabelRow>) -> Result<Self> {
        if ids.len() != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} ids but {} label rows",
                ids.len(),
                labels.len()
            )));
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        Ok(Self { ids, labels })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn rows(&self) -> &[LabelRow] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn positives(&self, f: Finding) -> usize {
        self.labels.iter().filter(|r| r[f.index()]).count()
    }

    /// Row lookup by id.
    pub fn index_of(&self) -> std::collections::HashMap<&str, usize> {
        self.ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect()
    }
}

fn header() -> Vec<&'static str> {
    std::iter::once("id")
        .chain(Finding::ALL.iter().map(|f| f.name()))
        .collect()
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<LabelTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_labels(&text).map_err(|e| match e {
        Error::Labels { reason, .. } => Error::Labels {
            path: path.to_path_buf(),
            reason,
        },
        other => other,
    })
}

/// Parses label CSV text; see the module docs for the schema.
pub fn parse_labels(text: &str) -> Result<LabelTable> {
    let bad = |reason: String| Error::Labels {
        path: "<memory>".into(),
        reason,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());
    let got: Vec<String> = reader
        .headers()
        .map_err(|e| bad(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let want = header();
    for col in &want {
        if !got.iter().any(|g| g == col) {
            return Err(bad(format!("missing column `{col}`")));
        }
    }
    if got != want {
        return Err(bad(format!(
            "header must be `{}`, found `{}`",
            want.join(","),
            got.join(",")
        )));
    }

    let mut ids = Vec::new();
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let id = record[0].to_string();
        if id.is_empty() {
            return Err(bad(format!("empty id on data line {}", line + 1)));
        }
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateId(id));
        }
        let mut row = [false; N_FINDINGS];
        for (j, cell) in record.iter().skip(1).enumerate() {
            row[j] = match cell {
                "0" => false,
                "1" => true,
                other => {
                    return Err(bad(format!(
                        "non-binary cell `{other}` for {id}/{}",
                        Finding::ALL[j]
                    )))
                }
            };
        }
        ids.push(id);
        rows.push(row);
    }
    LabelTable::new(ids, rows)
}

pub fn write_labels(table: &LabelTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = header().join(",");
    out.push('\n');
    for (id, row) in table.ids.iter().zip(&table.labels) {
        out.push_str(id);
        for &b in row {
            out.push_str(if b { ",1" } else { ",0" });
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Fraction of samples positive for `f`.
pub fn prevalence(table: &LabelTable, f: Finding) -> Result<f64> {
    if table.is_empty() {
        return Err(Error::InvalidParameter(
            "prevalence of an empty label table".into(),
        ));
    }
    Ok(table.positives(f) as f64 / table.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str =
        "id,pleural_effusion,infiltrate,congestion,atelectasis,pneumothorax,cardiomegaly,mass,foreign_object\n";

    #[test]
    fn single_row() {
        let t = parse_labels(&format!("{HEADER}img001,1,0,0,0,0,0,0,0\n")).unwrap();
        assert_eq!(t.ids(), &["img001".to_string()]);
        assert!(t.rows()[0][Finding::PleuralEffusion.index()]);
        assert_eq!(t.rows()[0].iter().filter(|&&b| b).count(), 1);
    }

    #[test]
    fn duplicate_id_is_named() {
        let err = parse_labels(&format!(
            "{HEADER}a,0,0,0,0,0,0,0,0\nb,0,0,0,0,0,0,0,0\na,1,0,0,0,0,0,0,0\n"
        ))
        .unwrap_err();
        assert!(matches!(&err, Error::DuplicateId(id) if id == "a"));
        assert!(err.to_string().contains("`a`"));
    }

    #[test]
    fn missing_column() {
        let err = parse_labels("id,pleural_effusion\nx,1\n").unwrap_err();
        assert!(err.to_string().contains("missing column `infiltrate`"));
    }

    #[test]
    fn non_binary_cell() {
        for cell in ["2", "yes", " 1", "1.0", ""] {
            let text = format!("{HEADER}x,0,0,{cell},0,0,0,0,0\n");
            assert!(parse_labels(&text).is_err(), "accepted `{cell}`");
        }
    }

    #[test]
    fn prevalence_cases() {
        let t = parse_labels(&format!("{HEADER}a,1,0,0,0,0,0,0,0\nb,0,0,0,0,0,0,0,0\n")).unwrap();
        assert_eq!(prevalence(&t, Finding::PleuralEffusion).unwrap(), 0.5);
        assert_eq!(prevalence(&t, Finding::Mass).unwrap(), 0.0);
        let empty = LabelTable::new(vec![], vec![]).unwrap();
        assert!(prevalence(&empty, Finding::Mass).is_err());
    }

    #[test]
    fn write_then_load() {
        let t = parse_labels(&format!("{HEADER}a,1,0,0,0,0,1,0,0\nb,0,0,0,1,0,0,0,1\n")).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("labels.csv");
        write_labels(&t, &p).unwrap();
        assert_eq!(load_labels(&p).unwrap(), t);
    }
}
