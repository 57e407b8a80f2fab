//! Mean ± SD of per-resample AUCs, laid out like a results table.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::{Finding, N_FINDINGS};

/// Mean and sample SD over the valid resamples of one finding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AucSummary {
    /// Absent when no resample produced a defined AUC.
    pub mean: Option<f64>,
    /// Absent with fewer than two valid resamples.
    pub sd: Option<f64>,
    pub n_valid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucReport {
    pub findings: Vec<(Finding, AucSummary)>,
    /// Mean over the findings counted in the average (pneumothorax excluded);
    /// its SD is the mean of those findings' SDs.
    pub average: AucSummary,
}

impl AucReport {
    pub fn get(&self, f: Finding) -> AucSummary {
        self.findings[f.index()].1
    }
}

/// Mean and sample (n − 1) SD.
pub fn mean_sd(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (Some(mean), None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some(var.sqrt()))
}

/// `aucs[resample][finding]`, `None` where the AUC was undefined.
pub fn aggregate(aucs: &[[Option<f64>; N_FINDINGS]]) -> AucReport {
    let findings: Vec<(Finding, AucSummary)> = Finding::ALL
        .iter()
        .map(|&f| {
            let vals: Vec<f64> = aucs.iter().filter_map(|r| r[f.index()]).collect();
            let (mean, sd) = mean_sd(&vals);
            (f, AucSummary { mean, sd, n_valid: vals.len() })
        })
        .collect();
    let counted: Vec<&AucSummary> = findings
        .iter()
        .filter(|(f, _)| f.in_average())
        .map(|(_, s)| s)
        .collect();
    let means: Option<Vec<f64>> = counted.iter().map(|s| s.mean).collect();
    let sds: Option<Vec<f64>> = counted.iter().map(|s| s.sd).collect();
    let avg = |v: Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
    let average = AucSummary {
        mean: means.map(avg),
        sd: sds.map(avg),
        n_valid: counted.iter().map(|s| s.n_valid).min().unwrap_or(0),
    };
    AucReport { findings, average }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// CSV with one row per finding plus `avg`, and `<exp>_mean,<exp>_sd,<exp>_n`
/// columns per experiment in the given order.
pub fn table_csv(columns: &[(String, AucReport)]) -> String {
    let mut out = String::from("finding");
    for (name, _) in columns {
        write!(out, ",{name}_mean,{name}_sd,{name}_n").unwrap();
    }
    out.push('\n');
    let mut row = |label: &str, pick: &dyn Fn(&AucReport) -> AucSummary| {
        out.push_str(label);
        for (_, r) in columns {
            let s = pick(r);
            write!(out, ",{},{},{}", cell(s.mean), cell(s.sd), s.n_valid).unwrap();
        }
        out.push('\n');
    };
    for f in Finding::ALL {
        row(f.name(), &|r| r.get(f));
    }
    row("avg", &|r| r.average);
    out
}

/// Fixed-width text rendering: `.891 ± .013` per cell.
pub fn table_text(columns: &[(String, AucReport)]) -> String {
    let fmt = |s: AucSummary| match (s.mean, s.sd) {
        (Some(m), Some(sd)) => format!("{} ± {}", short(m), short(sd)),
        (Some(m), None) => format!("{} ± n/a", short(m)),
        _ => "n/a".to_string(),
    };
    let mut out = format!("{:<18}", "finding");
    for (name, _) in columns {
        write!(out, "{name:>16}").unwrap();
    }
    out.push('\n');
    let mut line = |label: &str, pick: &dyn Fn(&AucReport) -> AucSummary| {
        write!(out, "{label:<18}").unwrap();
        for (_, r) in columns {
            write!(out, "{:>16}", fmt(pick(r))).unwrap();
        }
        out.push('\n');
    };
    for f in Finding::ALL {
        line(f.name(), &|r| r.get(f));
    }
    line("AVG", &|r| r.average);
    out
}

/// Three decimals without the leading zero, as in printed tables.
fn short(v: f64) -> String {
    let s = format!("{v:.3}");
    match s.strip_prefix("0.") {
        Some(rest) => format!(".{rest}"),
        None => s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_values_have_zero_sd() {
        let rows = vec![[Some(0.8); N_FINDINGS]; 5];
        let r = aggregate(&rows);
        for (_, s) in &r.findings {
            assert_eq!(s.sd, Some(0.0));
            assert_eq!(s.n_valid, 5);
        }
    }

    #[test]
    fn two_values() {
        let (m, sd) = mean_sd(&[0.7, 0.9]);
        assert!((m.unwrap() - 0.8).abs() < 1e-12);
        // sqrt(((-0.1)^2 + 0.1^2) / 1)
        assert!((sd.unwrap() - 0.02f64.sqrt()).abs() < 1e-12);
        assert!((sd.unwrap() - 0.1414).abs() < 1e-4);
    }

    #[test]
    fn single_value_has_no_sd() {
        assert_eq!(mean_sd(&[0.5]), (Some(0.5), None));
        assert_eq!(mean_sd(&[]), (None, None));
    }

    #[test]
    fn undefined_aucs_are_excluded() {
        let mut rows = vec![[Some(0.7); N_FINDINGS]; 3];
        rows[1][Finding::Pneumothorax.index()] = None;
        let r = aggregate(&rows);
        assert_eq!(r.get(Finding::Pneumothorax).n_valid, 2);
        assert_eq!(r.get(Finding::Mass).n_valid, 3);
        // pneumothorax does not feed the average
        assert_eq!(r.average.n_valid, 3);
    }

    /// Published results table, taxonomy order (pleural effusion, infiltrate,
    /// congestion, atelectasis, pneumothorax, cardiomegaly, mass, foreign
    /// object), one `(mean, sd)` column per experiment with its printed AVG.
    const PUBLISHED: [(&str, [(f64, f64); N_FINDINGS], &str, &str); 6] = [
        ("normal", [(0.951, 0.008), (0.936, 0.012), (0.937, 0.013), (0.905, 0.020), (0.731, 0.134), (0.952, 0.006), (0.764, 0.016), (0.795, 0.015)], ".891", ".013"),
        ("bs", [(0.948, 0.009), (0.938, 0.012), (0.932, 0.015), (0.907, 0.016), (0.789, 0.104), (0.950, 0.006), (0.766, 0.016), (0.815, 0.013)], ".894", ".012"),
        ("lung", [(0.955, 0.007), (0.939, 0.007), (0.941, 0.014), (0.917, 0.017), (0.813, 0.132), (0.953, 0.005), (0.821, 0.020), (0.808, 0.013)], ".905", ".012"),
        ("bs_lung", [(0.955, 0.009), (0.936, 0.014), (0.938, 0.014), (0.913, 0.020), (0.794, 0.128), (0.952, 0.003), (0.840, 0.011), (0.805, 0.015)], ".906", ".012"),
        ("en_normal", [(0.960, 0.004), (0.944, 0.010), (0.941, 0.012), (0.905, 0.020), (0.736, 0.163), (0.955, 0.004), (0.769, 0.014), (0.811, 0.018)], ".898", ".012"),
        ("en_preprocessed", [(0.957, 0.007), (0.943, 0.011), (0.946, 0.013), (0.923, 0.016), (0.792, 0.142), (0.959, 0.003), (0.837, 0.014), (0.821, 0.015)], ".912", ".011"),
    ];

    #[test]
    fn published_table_averages() {
        // Two splits at mean ± sd/√2 give sample SD = sd exactly.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (name, column, avg_mean, avg_sd) in PUBLISHED {
            let mut rows = vec![[None; N_FINDINGS]; 2];
            for (i, (m, sd)) in column.iter().enumerate() {
                rows[0][i] = Some(m + sd * h);
                rows[1][i] = Some(m - sd * h);
            }
            let r = aggregate(&rows);
            for (i, (m, sd)) in column.iter().enumerate() {
                let s = r.findings[i].1;
                assert!((s.mean.unwrap() - m).abs() < 1e-12);
                assert!((s.sd.unwrap() - sd).abs() < 1e-12);
            }
            assert_eq!(short(r.average.mean.unwrap()), avg_mean, "{name}");
            assert_eq!(short(r.average.sd.unwrap()), avg_sd, "{name}");
        }
    }

    #[test]
    fn table_layout() {
        let r = aggregate(&[[Some(0.75); N_FINDINGS], [Some(0.85); N_FINDINGS]]);
        let csv = table_csv(&[("normal".into(), r.clone()), ("lung".into(), r)]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + N_FINDINGS + 1);
        assert_eq!(lines[0], "finding,normal_mean,normal_sd,normal_n,lung_mean,lung_sd,lung_n");
        assert!(lines[9].starts_with("avg,0.800000,"));
    }
}
