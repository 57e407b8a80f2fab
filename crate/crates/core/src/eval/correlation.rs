//! Pearson correlation between predictors, for ensemble-diversity analysis.

use std::fmt::Write as _;

use super::PredictionMatrix;
use crate::dataset::N_FINDINGS;
use crate::error::{Error, Result};

/// Product-moment correlation. Centred sums are accumulated in f64.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::ShapeMismatch(format!(
            "pearson needs two equal-length vectors of length >= 2 (got {} and {})",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Symmetric matrix of pairwise coefficients; `None` marks an undefined cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl CorrelationMatrix {
    fn build(labels: Vec<String>, vectors: &[Vec<f64>]) -> Self {
        let k = vectors.len();
        let mut values = vec![vec![None; k]; k];
        for i in 0..k {
            values[i][i] = Some(1.0);
            for j in i + 1..k {
                let r = pearson(&vectors[i], &vectors[j]).ok();
                values[i][j] = r;
                values[j][i] = r;
            }
        }
        Self { labels, values }
    }

    /// Mean of the defined off-diagonal entries.
    pub fn mean_off_diagonal(&self) -> Option<f64> {
        let vals: Vec<f64> = (0..self.values.len())
            .flat_map(|i| (0..self.values.len()).filter(move |&j| j != i).map(move |j| (i, j)))
            .filter_map(|(i, j)| self.values[i][j])
            .collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }

    /// Coefficients ×100, two decimals, blank for undefined cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# pearson correlation coefficients scaled by 100\nmodel");
        for l in &self.labels {
            write!(out, ",{l}").unwrap();
        }
        out.push('\n');
        for (l, row) in self.labels.iter().zip(&self.values) {
            out.push_str(l);
            for v in row {
                match v {
                    Some(v) => write!(out, ",{:.2}", v * 100.0).unwrap(),
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Artifacts(format!("correlation file: {m}"));
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| bad("missing header"))?;
        let labels: Vec<String> = header.split(',').skip(1).map(str::to_string).collect();
        let mut values = Vec::new();
        for line in lines.filter(|l| !l.is_empty()) {
            let row = line
                .split(',')
                .skip(1)
                .map(|c| {
                    if c.is_empty() {
                        Ok(None)
                    } else {
                        c.parse::<f64>().map(|v| Some(v / 100.0)).map_err(|_| bad("bad value"))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            if row.len() != labels.len() {
                return Err(bad("ragged row"));
            }
            values.push(row);
        }
        if values.len() != labels.len() {
            return Err(bad("matrix is not square"));
        }
        Ok(Self { labels, values })
    }
}

fn check_all_aligned(preds: &[PredictionMatrix]) -> Result<()> {
    if let Some(first) = preds.first() {
        for p in &preds[1..] {
            first.check_aligned(p)?;
        }
    }
    Ok(())
}

/// Pearson over each matrix flattened row-major (samples × findings).
pub fn correlation_matrix(preds: &[PredictionMatrix], labels: Vec<String>) -> Result<CorrelationMatrix> {
    check_all_aligned(preds)?;
    let vectors: Vec<Vec<f64>> = preds.iter().map(PredictionMatrix::flattened).collect();
    Ok(CorrelationMatrix::build(labels, &vectors))
}

/// One matrix per finding, over that finding's score column only.
pub fn per_finding_correlation(
    preds: &[PredictionMatrix],
    labels: Vec<String>,
) -> Result<Vec<CorrelationMatrix>> {
    check_all_aligned(preds)?;
    Ok((0..N_FINDINGS)
        .map(|f| {
            let vectors: Vec<Vec<f64>> = preds.iter().map(|p| p.column(f)).collect();
            CorrelationMatrix::build(labels.clone(), &vectors)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::Provenance;
    use crate::rng::Rng;

    fn matrix(scores: Vec<[f64; N_FINDINGS]>) -> PredictionMatrix {
        let ids = (0..scores.len()).map(|i| format!("s{i}")).collect();
        PredictionMatrix::new(ids, scores, Provenance::default()).unwrap()
    }

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("m{i}")).collect()
    }

    #[test]
    fn hand_evaluated() {
        // means 2.5; dx = (-1.5,-.5,.5,1.5), dy = (-1.5,.5,-.5,1.5)
        // sxy = 2.25 - .25 - .25 + 2.25 = 4, sxx = syy = 5
        let r = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.8).abs() < 1e-15);
        let x = [0.3, 0.1, 0.7, 0.2];
        assert_eq!(pearson(&x, &x).unwrap(), 1.0);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(pearson(&x, &neg).unwrap(), -1.0);
        assert!(matches!(pearson(&[1.0, 1.0], &[0.0, 1.0]), Err(Error::ZeroVariance)));
    }

    #[test]
    fn duplicate_and_negated_predictors() {
        let mut rng = Rng::new(4);
        let scores: Vec<[f64; N_FINDINGS]> =
            (0..30).map(|_| std::array::from_fn(|_| rng.uniform(0.0, 1.0))).collect();
        let flipped = scores.iter().map(|r| r.map(|p| 1.0 - p)).collect();
        let a = matrix(scores);
        let c = correlation_matrix(&[a.clone(), a.clone()], names(2)).unwrap();
        assert!((c.values[0][1].unwrap() - 1.0).abs() < 1e-12);
        let c = correlation_matrix(&[a, matrix(flipped)], names(2)).unwrap();
        assert!((c.values[0][1].unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn noisier_pairs_correlate_less() {
        let mut rng = Rng::new(5);
        let signal: Vec<[f64; N_FINDINGS]> =
            (0..200).map(|_| std::array::from_fn(|_| rng.normal())).collect();
        let mut noisy = |sd: f64| {
            matrix(signal.iter().map(|r| r.map(|s| s + sd * rng.normal())).collect())
        };
        let preds = [noisy(0.2), noisy(0.2), noisy(1.5), noisy(1.5)];
        let c = correlation_matrix(&preds, names(4)).unwrap();
        assert!(c.values[0][1].unwrap() > c.values[2][3].unwrap());
    }

    /// Smallest eigenvalue via Jacobi rotations, written independently of the
    /// code under test.
    fn min_eigenvalue(mut a: Vec<Vec<f64>>) -> f64 {
        let n = a.len();
        for _ in 0..100 {
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q].abs() < 1e-15 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[k][p], a[k][q]);
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[p][k], a[q][k]);
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a[i][i]).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn random_matrices_are_valid_correlations() {
        let mut rng = Rng::new(6);
        for trial in 0..30 {
            let k = 2 + trial % 5;
            let preds: Vec<PredictionMatrix> = (0..k)
                .map(|_| matrix((0..12).map(|_| std::array::from_fn(|_| rng.uniform(0.0, 1.0))).collect()))
                .collect();
            let c = correlation_matrix(&preds, names(k)).unwrap();
            let dense: Vec<Vec<f64>> = c.values.iter().map(|r| r.iter().map(|v| v.unwrap()).collect()).collect();
            for i in 0..k {
                assert_eq!(dense[i][i], 1.0);
                for j in 0..k {
                    assert_eq!(dense[i][j], dense[j][i]);
                    assert!((-1.0..=1.0).contains(&dense[i][j]));
                }
            }
            assert!(min_eigenvalue(dense) > -1e-9);
        }
    }

    #[test]
    fn id_mismatch_is_an_error() {
        let a = matrix(vec![[0.1; N_FINDINGS], [0.2; N_FINDINGS]]);
        let mut b = a.clone();
        b.ids.swap(0, 1);
        assert!(correlation_matrix(&[a, b], names(2)).is_err());
    }

    #[test]
    fn csv_is_scaled() {
        let c = CorrelationMatrix { labels: names(2), values: vec![vec![Some(1.0), Some(0.9612)], vec![Some(0.9612), Some(1.0)]] };
        let csv = c.to_csv();
        assert!(csv.starts_with("# pearson correlation coefficients scaled by 100\n"));
        assert!(csv.contains("m0,100.00,96.12"));
        let back = CorrelationMatrix::from_csv(&csv).unwrap();
        assert!((back.values[0][1].unwrap() - 0.9612).abs() < 1e-12);
    }
}
