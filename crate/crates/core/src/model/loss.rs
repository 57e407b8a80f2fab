use crate::error::{Error, Result};

/// Probabilities are clamped to `[BCE_EPSILON, 1 - BCE_EPSILON]` before the log.
pub const BCE_EPSILON: f64 = 1e-7;

fn check_shapes<R: AsRef<[bool]>>(probs: &[Vec<f64>], labels: &[R]) -> Result<usize> {
    if probs.is_empty() || probs.len() != labels.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} prediction rows vs {} label rows",
            probs.len(),
            labels.len()
        )));
    }
    let n = probs[0].len();
    if n == 0 || probs.iter().any(|p| p.len() != n) || labels.iter().any(|l| l.as_ref().len() != n) {
        return Err(Error::ShapeMismatch("ragged prediction or label rows".into()));
    }
    Ok(n)
}

/// Mean over batch and outputs of `-[y ln p + (1 - y) ln(1 - p)]`.
pub fn bce_loss<R: AsRef<[bool]>>(probs: &[Vec<f64>], labels: &[R]) -> Result<f64> {
    let n = check_shapes(probs, labels)?;
    let mut total = 0.0;
    for (p_row, y_row) in probs.iter().zip(labels) {
        for (&p, &y) in p_row.iter().zip(y_row.as_ref()) {
            let p = p.clamp(BCE_EPSILON, 1.0 - BCE_EPSILON);
            total -= if y { p.ln() } else { (1.0 - p).ln() };
        }
    }
    Ok(total / (probs.len() * n) as f64)
}

/// Gradient of [`bce_loss`] with respect to the pre-sigmoid logits.
/// Entries whose probability sits in the clamped region get zero gradient.
pub fn bce_logit_gradient<R: AsRef<[bool]>>(probs: &[Vec<f64>], labels: &[R]) -> Result<Vec<Vec<f64>>> {
    let n = check_shapes(probs, labels)?;
    let scale = 1.0 / (probs.len() * n) as f64;
    Ok(probs
        .iter()
        .zip(labels)
        .map(|(p_row, y_row)| {
            p_row
                .iter()
                .zip(y_row.as_ref())
                .map(|(&p, &y)| {
                    if !(BCE_EPSILON..=1.0 - BCE_EPSILON).contains(&p) {
                        0.0
                    } else {
                        (p - if y { 1.0 } else { 0.0 }) * scale
                    }
                })
                .collect()
        })
        .collect())
}
