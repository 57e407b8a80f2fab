//! ROC curves and AUC: ties, the Mann-Whitney identity, and a CSV round
//! trip of a curve.
//!
//! ```text
//! cargo run --release --example roc_auc
//! ```

use cxrpipe::eval::{auc, roc_curve, RocCurve};
use cxrpipe::rng::Rng;

fn main() -> cxrpipe::Result<()> {
    // Two positives and three negatives with a tie across the classes.
    let scores = [0.9, 0.4, 0.4, 0.2, 0.7];
    let labels = [true, true, false, false, false];
    let curve = roc_curve(&scores, &labels)?;
    println!("points (fpr, tpr):");
    for p in &curve.points {
        println!("  ({:.3}, {:.3})", p.0, p.1);
    }
    // Pairs: 0.9 beats all three negatives, 0.4 beats 0.2, ties 0.4, loses to 0.7.
    println!("AUC {:.4} (hand count: (3 + 1 + 0.5) / 6 = {:.4})", auc(&curve), 4.5 / 6.0);

    // Scores drawn from two shifted normals: AUC approaches Φ(d / √2).
    let mut rng = Rng::new(3);
    let d = 1.0;
    let n = 5000;
    let mut s = Vec::with_capacity(2 * n);
    let mut y = Vec::with_capacity(2 * n);
    for i in 0..2 * n {
        let pos = i < n;
        s.push(rng.normal() + if pos { d } else { 0.0 });
        y.push(pos);
    }
    let a = auc(&roc_curve(&s, &y)?);
    println!("binormal d = {d}: AUC {a:.4} (theory 0.7602)");

    let text = curve.to_csv();
    assert_eq!(RocCurve::from_csv(&text)?, curve);
    print!("curve as CSV:\n{text}");
    Ok(())
}
