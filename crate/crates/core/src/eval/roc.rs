//! ROC curves with tie-aware threshold sweeps.

use std::fmt::Write as _;

use super::PredictionMatrix;
use crate::dataset::{Finding, LabelRow};
use crate::error::{Error, Result};

/// `(false positive rate, true positive rate)` points from `(0, 0)` to `(1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
}

impl RocCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fpr,tpr\n");
        for (x, y) in &self.points {
            writeln!(out, "{x},{y}").unwrap();
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some("fpr,tpr") {
            return Err(Error::Artifacts("ROC file lacks the `fpr,tpr` header".into()));
        }
        let points = lines
            .filter(|l| !l.is_empty())
            .map(|l| {
                let (a, b) = l
                    .split_once(',')
                    .ok_or_else(|| Error::Artifacts(format!("bad ROC row `{l}`")))?;
                let p = |s: &str| s.parse::<f64>().map_err(|_| Error::Artifacts(format!("bad ROC value `{s}`")));
                Ok((p(a)?, p(b)?))
            })
            .collect::<Result<_>>()?;
        Ok(Self { points })
    }
}

/// Sweeps thresholds over the distinct scores in descending order. Samples
/// sharing a score move TP and FP together, giving one diagonal segment.
pub fn roc_curve(scores: &[f64], labels: &[bool]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} scores vs {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidParameter("non-finite score".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass { finding: None });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
    }
    Ok(RocCurve { points })
}

/// Trapezoidal area under the curve.
pub fn auc(curve: &RocCurve) -> f64 {
    curve
        .points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum()
}

/// Per-finding AUC of a prediction matrix; `None` where the labels hold a
/// single class.
pub fn finding_aucs(preds: &PredictionMatrix, labels: &[LabelRow]) -> Result<Vec<Option<f64>>> {
    if labels.len() != preds.ids.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} prediction rows vs {} label rows",
            preds.ids.len(),
            labels.len()
        )));
    }
    Finding::ALL
        .iter()
        .map(|&f| {
            let scores = preds.column(f.index());
            let y: Vec<bool> = labels.iter().map(|r| r[f.index()]).collect();
            match roc_curve(&scores, &y) {
                Ok(c) => Ok(Some(auc(&c))),
                Err(Error::SingleClass { .. }) => {
                    log::info!("AUC undefined for {f}: single-class test labels");
                    Ok(None)
                }
                Err(e) => Err(e),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use proptest::prelude::*;

    /// Exhaustive pair counting: P(s+ > s-) + 0.5 P(s+ == s-).
    fn mann_whitney(scores: &[f64], labels: &[bool]) -> f64 {
        let (mut wins, mut pairs) = (0.0, 0.0);
        for (i, &si) in scores.iter().enumerate() {
            if !labels[i] {
                continue;
            }
            for (j, &sj) in scores.iter().enumerate() {
                if labels[j] {
                    continue;
                }
                pairs += 1.0;
                if si > sj {
                    wins += 1.0;
                } else if si == sj {
                    wins += 0.5;
                }
            }
        }
        wins / pairs
    }

    #[test]
    fn perfect_ranking() {
        let c = roc_curve(&[0.9, 0.1], &[true, false]).unwrap();
        assert_eq!(c.points, vec![(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)]);
        assert_eq!(auc(&c), 1.0);
    }

    #[test]
    fn all_tied() {
        let c = roc_curve(&[0.3; 6], &[true, false, false, true, false, false]).unwrap();
        assert_eq!(c.points, vec![(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(auc(&c), 0.5);
    }

    #[test]
    fn single_class_is_an_error() {
        assert!(matches!(
            roc_curve(&[0.1, 0.2], &[true, true]),
            Err(Error::SingleClass { .. })
        ));
    }

    #[test]
    fn random_instances_match_pair_counting() {
        let mut rng = Rng::new(2);
        for _ in 0..200 {
            let n = 2 + rng.index_inclusive(48);
            let mut labels: Vec<bool> = (0..n).map(|_| rng.bernoulli(0.4)).collect();
            labels[0] = true;
            labels[1] = false;
            // coarse grid forces ties
            let scores: Vec<f64> = (0..n).map(|_| rng.index_inclusive(6) as f64 / 6.0).collect();
            let c = roc_curve(&scores, &labels).unwrap();
            assert!((auc(&c) - mann_whitney(&scores, &labels)).abs() < 1e-12);
            assert_eq!(c.points.first(), Some(&(0.0, 0.0)));
            assert_eq!(c.points.last(), Some(&(1.0, 1.0)));
            assert!(c.points.windows(2).all(|w| w[1].0 >= w[0].0 && w[1].1 >= w[0].1));
        }
    }

    #[test]
    fn csv_round_trip() {
        let c = roc_curve(&[0.9, 0.4, 0.4, 0.1], &[true, false, true, false]).unwrap();
        assert_eq!(RocCurve::from_csv(&c.to_csv()).unwrap(), c);
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
        (3usize..40).prop_flat_map(|n| {
            (
                proptest::collection::vec(-5.0f64..5.0, n),
                proptest::collection::vec(any::<bool>(), n),
            )
        })
    }

    proptest! {
        #[test]
        fn invariant_under_increasing_maps((scores, mut labels) in instance()) {
            labels[0] = true;
            labels[1] = false;
            let base = auc(&roc_curve(&scores, &labels).unwrap());
            let exp: Vec<f64> = scores.iter().map(|s| s.exp()).collect();
            let affine: Vec<f64> = scores.iter().map(|s| 3.0 * s + 7.0).collect();
            prop_assert!((auc(&roc_curve(&exp, &labels).unwrap()) - base).abs() < 1e-12);
            prop_assert!((auc(&roc_curve(&affine, &labels).unwrap()) - base).abs() < 1e-12);
        }

        #[test]
        fn negation_complements((scores, mut labels) in instance()) {
            labels[0] = true;
            labels[1] = false;
            let mut sorted = scores.clone();
            sorted.sort_by(f64::total_cmp);
            prop_assume!(sorted.windows(2).all(|w| w[0] != w[1]));
            let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
            let sum = auc(&roc_curve(&scores, &labels).unwrap()) + auc(&roc_curve(&neg, &labels).unwrap());
            prop_assert!((sum - 1.0).abs() < 1e-12);
        }
    }
}
