//! Gradient checks on the tiny model (8×8 input, two conv blocks).

use cxrpipe::imaging::Image;
use cxrpipe::model::{adam_step, AdamHyper, AdamState, ConvBlock, Gradients, Model, ModelConfig};
use cxrpipe::rng::Rng;

fn tiny(seed: u64) -> ModelConfig {
    ModelConfig {
        input_size: 8,
        conv_blocks: vec![ConvBlock::new(3, 3, 2), ConvBlock::new(4, 3, 2)],
        n_outputs: 3,
        seed,
        standardize_input: true,
    }
}

fn batch(rng: &mut Rng, n: usize) -> (Vec<Image>, Vec<Vec<bool>>) {
    let images = (0..n)
        .map(|_| Image::from_fn(8, 8, |_, _| rng.uniform(0.0, 1.0) as f32))
        .collect();
    let labels = (0..n).map(|_| (0..3).map(|_| rng.bernoulli(0.5)).collect()).collect();
    (images, labels)
}

fn shifted(m: &Model, dir: &[Vec<f64>], t: f64) -> Model {
    let mut out = m.clone();
    for (p, d) in out.params_mut().iter_mut().zip(dir) {
        for (v, dv) in p.iter_mut().zip(d) {
            *v += t * dv;
        }
    }
    out
}

#[test]
fn directional_derivatives_match_central_differences() {
    let mut rng = Rng::new(21);
    let model = Model::init(&tiny(4)).unwrap();
    let (images, labels) = batch(&mut rng, 4);
    let grads = model.backward(&images, &labels).unwrap();
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let mut dir: Vec<Vec<f64>> = model.params().iter().map(|p| p.iter().map(|_| rng.normal()).collect()).collect();
        let norm = dir.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
        dir.iter_mut().flatten().for_each(|v| *v /= norm);
        let analytic: f64 = grads.0.iter().flatten().zip(dir.iter().flatten()).map(|(g, d)| g * d).sum();
        let plus = shifted(&model, &dir, h).loss(&images, &labels).unwrap();
        let minus = shifted(&model, &dir, -h).loss(&images, &labels).unwrap();
        let numeric = (plus - minus) / (2.0 * h);
        let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    assert!(worst < 1e-4, "max relative error {worst:e}");
}

/// With the trunk frozen the pooled features are fixed, so training the
/// head is logistic regression: convex, and full-batch ADAM with a small
/// rate decreases the loss at every step.
#[test]
fn head_only_training_decreases_loss_monotonically() {
    for zero_trunk in [true, false] {
        let mut rng = Rng::new(8);
        let mut model = Model::init(&tiny(2)).unwrap();
        let head = model.head_start();
        if zero_trunk {
            for t in &mut model.params_mut()[..head] {
                t.iter_mut().for_each(|v| *v = 0.0);
            }
        }
        let (images, labels) = batch(&mut rng, 12);
        let trunk_before: Vec<Vec<f64>> = model.params()[..head].to_vec();
        let mut state = AdamState::for_model(&model);
        let hp = AdamHyper { lr: 1e-3, ..AdamHyper::default() };
        let mut last = model.loss(&images, &labels).unwrap();
        for step in 0..60 {
            let (_, mut g): (f64, Gradients) = model.loss_and_gradients(&images, &labels).unwrap();
            for t in &mut g.0[..head] {
                t.iter_mut().for_each(|v| *v = 0.0);
            }
            adam_step(&mut model, &mut state, &g, &hp).unwrap();
            let loss = model.loss(&images, &labels).unwrap();
            assert!(loss <= last + 1e-15, "step {step}: {loss} > {last} (zero trunk: {zero_trunk})");
            last = loss;
        }
        assert_eq!(&model.params()[..head], &trunk_before[..]);
    }
}
