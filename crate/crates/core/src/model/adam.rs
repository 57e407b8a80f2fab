//! ADAM with bias-corrected moment estimates.

use super::network::{Gradients, Model};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        Self {
            lr: 0.005,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First and second moment accumulators mirroring the parameter tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub t: u64,
}

impl AdamState {
    pub fn for_shapes(lens: &[usize]) -> Self {
        Self {
            m: lens.iter().map(|&n| vec![0.0; n]).collect(),
            v: lens.iter().map(|&n| vec![0.0; n]).collect(),
            t: 0,
        }
    }

    pub fn for_model(model: &Model) -> Self {
        Self::for_shapes(&model.params().iter().map(Vec::len).collect::<Vec<_>>())
    }

    /// One update of `params` in place. Fails without touching anything if
    /// a gradient is non-finite or shapes disagree.
    pub fn step(&mut self, params: &mut [Vec<f64>], grads: &[Vec<f64>], hp: &AdamHyper) -> Result<()> {
        if params.len() != grads.len()
            || params.len() != self.m.len()
            || params.iter().zip(grads).zip(&self.m).any(|((p, g), m)| p.len() != g.len() || p.len() != m.len())
        {
            return Err(Error::ShapeMismatch("ADAM state, parameters and gradients disagree".into()));
        }
        if grads.iter().flatten().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient { step: self.t + 1 });
        }
        self.t += 1;
        let t = self.t.min(i32::MAX as u64) as i32;
        let c1 = 1.0 - hp.beta1.powi(t);
        let c2 = 1.0 - hp.beta2.powi(t);
        for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            for i in 0..p.len() {
                m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * g[i];
                v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= hp.lr * m_hat / (v_hat.sqrt() + hp.epsilon);
            }
        }
        Ok(())
    }
}

pub fn adam_step(model: &mut Model, state: &mut AdamState, grads: &Gradients, hp: &AdamHyper) -> Result<()> {
    state.step(model.params_mut(), &grads.0, hp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut params = vec![vec![0.3, -1.2], vec![4.0]];
        let before = params.clone();
        let mut s = AdamState::for_shapes(&[2, 1]);
        s.step(&mut params, &[vec![0.0, 0.0], vec![0.0]], &AdamHyper::default()).unwrap();
        assert_eq!(params, before);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn single_scalar_step_by_hand() {
        // m = 0.1, v = 0.001; both bias corrections give exactly 1 at t = 1,
        // so theta = -lr * 1 / (1 + eps).
        let mut params = vec![vec![0.0]];
        let mut s = AdamState::for_shapes(&[1]);
        s.step(&mut params, &[vec![1.0]], &AdamHyper::default()).unwrap();
        let expect = -0.005 / (1.0 + 1e-8);
        assert!((params[0][0] - expect).abs() < 1e-15);
        assert!((params[0][0] + 0.005).abs() < 1e-9);
    }

    #[test]
    fn non_finite_gradient_reports_step() {
        let mut params = vec![vec![0.0]];
        let mut s = AdamState::for_shapes(&[1]);
        s.step(&mut params, &[vec![1.0]], &AdamHyper::default()).unwrap();
        let err = s.step(&mut params, &[vec![f64::NAN]], &AdamHyper::default()).unwrap_err();
        assert!(matches!(err, Error::NonFiniteGradient { step: 2 }));
        assert_eq!(s.t, 1);
    }

    #[test]
    fn runs_are_bit_identical() {
        let run = || {
            let mut p = vec![vec![0.5, -0.5]];
            let mut s = AdamState::for_shapes(&[2]);
            for k in 0..50 {
                let g = vec![vec![(k as f64 * 0.37).sin(), p[0][0] * 0.1]];
                s.step(&mut p, &g, &AdamHyper::default()).unwrap();
            }
            p
        };
        assert_eq!(run(), run());
    }
}
