//! Human-readable summaries and SVG plots of a finished run.
//!
//! Rendering reads only the run's CSV/JSON artifacts and iterates them in
//! sorted order, so identical artifacts give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::run::LATEST_RUN_FILE;
use crate::dataset::write_atomic;
use crate::error::{Error, Result};
use crate::eval::{table_text, AucReport, CorrelationMatrix, RocCurve};

/// ROC plot geometry: the unit square maps to
/// `[ROC_ORIGIN, ROC_ORIGIN + ROC_SIDE]` in both axes, TPR pointing up.
pub const ROC_ORIGIN: f64 = 40.0;
pub const ROC_SIDE: f64 = 200.0;
const ROC_VIEW: f64 = ROC_ORIGIN * 2.0 + ROC_SIDE;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone)]
pub struct ReportSummary {
    pub run_dir: PathBuf,
    /// Written files, sorted.
    pub files: Vec<PathBuf>,
    /// Results table as text.
    pub table: String,
}

/// Maps a curve point into SVG coordinates.
pub fn roc_to_svg(fpr: f64, tpr: f64) -> (f64, f64) {
    (ROC_ORIGIN + fpr * ROC_SIDE, ROC_ORIGIN + (1.0 - tpr) * ROC_SIDE)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One polyline per labelled curve over a unit-square frame with the chance
/// diagonal.
pub fn roc_svg(title: &str, curves: &[(String, RocCurve)]) -> String {
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {v} {v}" width="{v}" height="{v}">"#,
        v = ROC_VIEW
    )
    .unwrap();
    writeln!(s, r#"<rect x="0" y="0" width="{v}" height="{v}" fill="white"/>"#, v = ROC_VIEW).unwrap();
    writeln!(
        s,
        r#"<rect x="{o}" y="{o}" width="{w}" height="{w}" fill="none" stroke="black"/>"#,
        o = ROC_ORIGIN,
        w = ROC_SIDE
    )
    .unwrap();
    let (x0, y0) = roc_to_svg(0.0, 0.0);
    let (x1, y1) = roc_to_svg(1.0, 1.0);
    writeln!(
        s,
        r##"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y1}" stroke="#999999" stroke-dasharray="4 4"/>"##
    )
    .unwrap();
    writeln!(s, r#"<text x="{}" y="20" font-size="12" text-anchor="middle">{}</text>"#, ROC_VIEW / 2.0, escape(title)).unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="10" text-anchor="middle">false positive rate</text>"#,
        ROC_VIEW / 2.0,
        ROC_ORIGIN + ROC_SIDE + 25.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="12" y="{y}" font-size="10" text-anchor="middle" transform="rotate(-90 12 {y})">true positive rate</text>"#,
        y = ROC_VIEW / 2.0
    )
    .unwrap();
    for (i, (label, curve)) in curves.iter().enumerate() {
        let points: Vec<String> = curve
            .points
            .iter()
            .map(|&(f, t)| {
                let (x, y) = roc_to_svg(f, t);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.2" points="{}"><title>{}</title></polyline>"#,
            PALETTE[i % PALETTE.len()],
            points.join(" "),
            escape(label)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Diverging blue–white–red colour for a coefficient in `[-1, 1]`.
fn heat_colour(v: f64) -> String {
    let t = v.clamp(-1.0, 1.0);
    let (r, g, b) = if t >= 0.0 {
        (255.0, 255.0 * (1.0 - t), 255.0 * (1.0 - t))
    } else {
        (255.0 * (1.0 + t), 255.0 * (1.0 + t), 255.0)
    };
    format!("#{:02x}{:02x}{:02x}", r.round() as u8, g.round() as u8, b.round() as u8)
}

/// Heatmap with coefficients ×100 printed in each cell.
pub fn correlation_svg(title: &str, m: &CorrelationMatrix) -> String {
    let k = m.labels.len().max(1);
    let cell = 48.0;
    let left = 110.0;
    let top = 40.0;
    let w = left + cell * k as f64 + 10.0;
    let h = top + cell * k as f64 + 10.0;
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w} {h}" width="{w}" height="{h}">"#).unwrap();
    writeln!(s, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="20" font-size="12" text-anchor="middle">{}</text>"#, w / 2.0, escape(title)).unwrap();
    for (i, label) in m.labels.iter().enumerate() {
        let y = top + cell * i as f64;
        writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="9" text-anchor="end">{}</text>"#,
            left - 4.0,
            y + cell / 2.0 + 3.0,
            escape(label)
        )
        .unwrap();
        for (j, v) in m.values[i].iter().enumerate() {
            let x = left + cell * j as f64;
            let (fill, text) = match v {
                Some(v) => (heat_colour(*v), format!("{:.0}", v * 100.0)),
                None => ("#dddddd".to_string(), "n/a".to_string()),
            };
            writeln!(s, r#"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{fill}" stroke="white"/>"#).unwrap();
            writeln!(
                s,
                r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">{text}</text>"#,
                x + cell / 2.0,
                y + cell / 2.0 + 4.0
            )
            .unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<_>>()?;
    out.sort();
    Ok(out)
}

fn file_stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Locates the run to report on: `dir` itself when it holds a report,
/// otherwise the run named in `dir/latest_run`.
pub fn resolve_run_dir(dir: &Path) -> Result<PathBuf> {
    if dir.join("auc_report.json").is_file() {
        return Ok(dir.to_path_buf());
    }
    let pointer = dir.join(LATEST_RUN_FILE);
    if let Ok(name) = fs::read_to_string(&pointer) {
        let run = dir.join(name.trim());
        if run.join("auc_report.json").is_file() {
            return Ok(run);
        }
        return Err(Error::Artifacts(format!("run {} is incomplete", run.display())));
    }
    Err(Error::Artifacts(format!("no completed run under {}", dir.display())))
}

/// Writes `report/` inside the run directory: one ROC SVG per experiment
/// and finding (one curve per resample), one heatmap per ensemble
/// correlation matrix, and `table.txt`.
pub fn cmd_report(dir: impl AsRef<Path>) -> Result<ReportSummary> {
    let run_dir = resolve_run_dir(dir.as_ref())?;
    let report_path = run_dir.join("auc_report.json");
    let text = fs::read_to_string(&report_path).map_err(|e| Error::io(&report_path, e))?;
    let reports: Vec<(String, AucReport)> =
        serde_json::from_str(&text).map_err(|e| Error::Artifacts(format!("{}: {e}", report_path.display())))?;
    let out_dir = run_dir.join("report");
    let mut files = Vec::new();

    let roc_root = run_dir.join("roc");
    if roc_root.is_dir() {
        for exp_dir in sorted_entries(&roc_root)? {
            let exp = file_stem(&exp_dir);
            // finding -> curves over resamples
            let mut by_finding: std::collections::BTreeMap<String, Vec<(String, RocCurve)>> = Default::default();
            for r_dir in sorted_entries(&exp_dir)? {
                let r = file_stem(&r_dir);
                for f in sorted_entries(&r_dir)? {
                    let text = fs::read_to_string(&f).map_err(|e| Error::io(&f, e))?;
                    by_finding.entry(file_stem(&f)).or_default().push((r.clone(), RocCurve::from_csv(&text)?));
                }
            }
            for (finding, curves) in by_finding {
                let path = out_dir.join(format!("roc_{exp}_{finding}.svg"));
                write_atomic(&path, roc_svg(&format!("{exp}: {finding}"), &curves).as_bytes())?;
                files.push(path);
            }
        }
    }

    let corr_root = run_dir.join("correlation");
    if corr_root.is_dir() {
        for f in sorted_entries(&corr_root)? {
            let stem = file_stem(&f);
            // flattened matrices only: `<ensemble>-r<k>`
            let is_flat = stem.rsplit_once("-r").is_some_and(|(_, k)| k.chars().all(|c| c.is_ascii_digit()));
            if !is_flat {
                continue;
            }
            let text = fs::read_to_string(&f).map_err(|e| Error::io(&f, e))?;
            let m = CorrelationMatrix::from_csv(&text)?;
            let path = out_dir.join(format!("correlation_{stem}.svg"));
            write_atomic(&path, correlation_svg(&format!("Pearson ×100: {stem}"), &m).as_bytes())?;
            files.push(path);
        }
    }

    let table = table_text(&reports);
    let path = out_dir.join("table.txt");
    write_atomic(&path, table.as_bytes())?;
    files.push(path);
    files.sort();
    Ok(ReportSummary { run_dir, files, table })
}
