//! Averaging ensembles.

use super::{PredictionMatrix, Provenance};
use crate::dataset::N_FINDINGS;
use crate::error::{Error, Result};

/// Element-wise mean of the members' scores. Each cell sums its member values
/// in sorted order, so the result does not depend on member order.
pub fn ensemble_average(members: &[PredictionMatrix], provenance: Provenance) -> Result<PredictionMatrix> {
    if members.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "an ensemble needs at least two members, got {}",
            members.len()
        )));
    }
    let first = &members[0];
    for m in &members[1..] {
        first.check_aligned(m)?;
    }
    let k = members.len() as f64;
    let mut cell = Vec::with_capacity(members.len());
    let scores = (0..first.len())
        .map(|i| {
            std::array::from_fn::<f64, N_FINDINGS, _>(|f| {
                cell.clear();
                cell.extend(members.iter().map(|m| m.scores[i][f]));
                cell.sort_by(f64::total_cmp);
                cell.iter().sum::<f64>() / k
            })
        })
        .collect();
    let mut provenance = provenance;
    if provenance.members.is_empty() {
        provenance.members = members.iter().map(|m| m.provenance.model_id.clone()).collect();
    }
    PredictionMatrix::new(first.ids.clone(), scores, provenance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{auc, roc_curve};
    use crate::rng::Rng;

    fn matrix(scores: Vec<[f64; N_FINDINGS]>, id: &str) -> PredictionMatrix {
        let ids = (0..scores.len()).map(|i| format!("s{i}")).collect();
        let prov = Provenance { model_id: id.into(), ..Provenance::default() };
        PredictionMatrix::new(ids, scores, prov).unwrap()
    }

    #[test]
    fn identical_members_are_a_fixed_point() {
        let mut rng = Rng::new(1);
        let a = matrix((0..10).map(|_| std::array::from_fn(|_| rng.uniform(0.0, 1.0))).collect(), "a");
        let e = ensemble_average(&[a.clone(), a.clone()], Provenance::default()).unwrap();
        assert_eq!(e.scores, a.scores);
        assert_eq!(e.provenance.members, vec!["a", "a"]);
    }

    #[test]
    fn cell_mean() {
        let e = ensemble_average(
            &[matrix(vec![[0.2; N_FINDINGS]], "a"), matrix(vec![[0.8; N_FINDINGS]], "b")],
            Provenance::default(),
        )
        .unwrap();
        assert_eq!(e.scores[0][3], 0.5);
    }

    #[test]
    fn member_order_does_not_matter() {
        let mut rng = Rng::new(2);
        let members: Vec<PredictionMatrix> = (0..5)
            .map(|m| matrix((0..20).map(|_| std::array::from_fn(|_| rng.uniform(0.0, 1.0))).collect(), &m.to_string()))
            .collect();
        let base = ensemble_average(&members, Provenance { members: vec!["x".into()], ..Default::default() }).unwrap();
        for _ in 0..20 {
            let mut shuffled = members.clone();
            rng.shuffle(&mut shuffled);
            let e = ensemble_average(&shuffled, Provenance { members: vec!["x".into()], ..Default::default() }).unwrap();
            for (a, b) in e.flattened().iter().zip(base.flattened()) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn single_member_is_rejected() {
        assert!(ensemble_average(&[matrix(vec![[0.5; N_FINDINGS]], "a")], Provenance::default()).is_err());
    }

    #[test]
    fn averaging_noisy_members_helps() {
        // Members see a shared label-dependent signal plus independent noise;
        // averaging shrinks the noise, so the ensemble should rank better.
        let mut rng = Rng::new(3);
        let mut not_worse = 0;
        for _ in 0..100 {
            let labels: Vec<bool> = (0..300).map(|i| i % 3 == 0).collect();
            let signal: Vec<f64> = labels.iter().map(|&l| if l { 0.6 } else { 0.0 } + 0.5 * rng.normal()).collect();
            let members: Vec<PredictionMatrix> = (0..4)
                .map(|m| {
                    let s = signal.iter().map(|&v| [v + rng.normal(); N_FINDINGS]).collect();
                    matrix(s, &m.to_string())
                })
                .collect();
            let member_auc: f64 = members
                .iter()
                .map(|m| auc(&roc_curve(&m.column(0), &labels).unwrap()))
                .sum::<f64>()
                / 4.0;
            let e = ensemble_average(&members, Provenance::default()).unwrap();
            if auc(&roc_curve(&e.column(0), &labels).unwrap()) >= member_auc {
                not_worse += 1;
            }
        }
        assert_eq!(not_worse, 100);
    }
}
