//! Averaging ensembles and prediction correlation on simulated scores.
//!
//! Each member sees the same latent signal plus its own noise; a shared
//! noise term controls how correlated the members are. Less correlated
//! members gain more from averaging.
//!
//! ```text
//! cargo run --release --example ensemble_correlation
//! ```

use cxrpipe::dataset::{LabelRow, N_FINDINGS};
use cxrpipe::eval::{aggregate, correlation_matrix, ensemble_average, finding_aucs, PredictionMatrix, Provenance};
use cxrpipe::rng::Rng;

fn members(labels: &[LabelRow], shared: f64, rng: &mut Rng) -> cxrpipe::Result<Vec<PredictionMatrix>> {
    let ids: Vec<String> = (0..labels.len()).map(|i| format!("s{i}")).collect();
    let common: Vec<[f64; N_FINDINGS]> = labels.iter().map(|_| std::array::from_fn(|_| rng.normal())).collect();
    (0..4)
        .map(|m| {
            let scores = labels
                .iter()
                .zip(&common)
                .map(|(row, c)| {
                    std::array::from_fn(|f| {
                        let signal = if row[f] { 1.0 } else { 0.0 };
                        signal + shared.sqrt() * c[f] + (1.0 - shared).sqrt() * rng.normal()
                    })
                })
                .collect();
            let prov = Provenance { source: "simulated".into(), model_id: format!("m{m}"), ..Provenance::default() };
            PredictionMatrix::new(ids.clone(), scores, prov)
        })
        .collect()
}

fn main() -> cxrpipe::Result<()> {
    let mut rng = Rng::new(21);
    let labels: Vec<LabelRow> = (0..1000).map(|_| std::array::from_fn(|_| rng.bernoulli(0.2))).collect();

    println!("shared noise  mean r   member AVG AUC  ensemble AVG AUC");
    for shared in [0.9, 0.6, 0.3, 0.0] {
        let ms = members(&labels, shared, &mut rng)?;
        let names = ms.iter().map(|m| m.provenance.model_id.clone()).collect();
        let r = correlation_matrix(&ms, names)?.mean_off_diagonal().unwrap_or(f64::NAN);
        let per_member: Vec<[Option<f64>; N_FINDINGS]> = ms
            .iter()
            .map(|m| Ok(finding_aucs(m, &labels)?.try_into().expect("eight findings")))
            .collect::<cxrpipe::Result<_>>()?;
        let member_avg = aggregate(&per_member).average.mean.unwrap_or(f64::NAN);
        let en = ensemble_average(&ms, Provenance { source: "ensemble".into(), ..Provenance::default() })?;
        let en_aucs: [Option<f64>; N_FINDINGS] = finding_aucs(&en, &labels)?.try_into().expect("eight findings");
        let en_avg = aggregate(&[en_aucs]).average.mean.unwrap_or(f64::NAN);
        println!("{shared:>12.1}  {r:>6.3}  {member_avg:>14.3}  {en_avg:>16.3}");
    }
    Ok(())
}
