//! Score matrices: one row per test sample, one column per finding.
//!
//! On disk a matrix is a CSV whose first line is a `#` comment holding the
//! provenance as JSON, followed by the `id,<finding...>` header. Scores are
//! written with Rust's shortest round-trip float formatting, so a reload is
//! bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{Finding, N_FINDINGS};
use crate::error::{Error, Result};

/// Where a matrix came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Provenance {
    /// Experiment or variant name (`normal`, `en_normal`, ...).
    pub source: String,
    pub resample: usize,
    pub model_id: String,
    /// Member model ids for ensembles; empty for single models.
    #[serde(default)]
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionMatrix {
    pub ids: Vec<String>,
    pub scores: Vec<[f64; N_FINDINGS]>,
    pub provenance: Provenance,
}

impl PredictionMatrix {
    pub fn new(ids: Vec<String>, scores: Vec<[f64; N_FINDINGS]>, provenance: Provenance) -> Result<Self> {
        if ids.len() != scores.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} ids vs {} score rows",
                ids.len(),
                scores.len()
            )));
        }
        if scores.iter().flatten().any(|s| !s.is_finite()) {
            return Err(Error::InvalidParameter("prediction matrix holds a non-finite score".into()));
        }
        Ok(Self { ids, scores, provenance })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn column(&self, finding: usize) -> Vec<f64> {
        self.scores.iter().map(|r| r[finding]).collect()
    }

    /// Row-major samples × findings.
    pub fn flattened(&self) -> Vec<f64> {
        self.scores.iter().flatten().copied().collect()
    }

    /// Fails unless `other` has the same ids in the same order.
    pub fn check_aligned(&self, other: &PredictionMatrix) -> Result<()> {
        if self.ids != other.ids {
            return Err(Error::ShapeMismatch(format!(
                "prediction matrices `{}` and `{}` cover different sample ids",
                self.provenance.model_id, other.provenance.model_id
            )));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# {}", serde_json::to_string(&self.provenance).unwrap()).unwrap();
        out.push_str("id");
        for f in Finding::ALL {
            write!(out, ",{}", f.name()).unwrap();
        }
        out.push('\n');
        for (id, row) in self.ids.iter().zip(&self.scores) {
            out.push_str(id);
            for s in row {
                write!(out, ",{s}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |m: String| Error::Artifacts(m);
        let mut lines = text.lines();
        let provenance = lines
            .next()
            .and_then(|l| l.strip_prefix("# "))
            .ok_or_else(|| bad("prediction file lacks its provenance line".into()))?;
        let provenance: Provenance = serde_json::from_str(provenance)
            .map_err(|e| bad(format!("bad provenance: {e}")))?;
        let header = lines.next().ok_or_else(|| bad("prediction file lacks a header".into()))?;
        let expected: Vec<&str> = std::iter::once("id").chain(Finding::ALL.iter().map(|f| f.name())).collect();
        if header.split(',').collect::<Vec<_>>() != expected {
            return Err(bad(format!("unexpected prediction header `{header}`")));
        }
        let mut ids = Vec::new();
        let mut scores = Vec::new();
        for line in lines.filter(|l| !l.is_empty()) {
            let mut cells = line.split(',');
            let id = cells.next().unwrap_or_default().to_string();
            let mut row = [0.0; N_FINDINGS];
            for slot in row.iter_mut() {
                let cell = cells.next().ok_or_else(|| bad(format!("short prediction row for `{id}`")))?;
                *slot = cell.parse().map_err(|_| bad(format!("bad score `{cell}` for `{id}`")))?;
            }
            if cells.next().is_some() {
                return Err(bad(format!("long prediction row for `{id}`")));
            }
            ids.push(id);
            scores.push(row);
        }
        Self::new(ids, scores, provenance)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::dataset::write_atomic(path.as_ref(), self.to_csv().as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }
}
