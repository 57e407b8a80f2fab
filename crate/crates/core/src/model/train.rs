//! Mini-batch training with validation-driven learning-rate halving.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::adam::{AdamHyper, AdamState};
use super::config::{ModelConfig, TrainConfig};
use super::loss::BCE_EPSILON;
use super::network::Model;
use crate::augment::{augment, test_transform, AugConfig};
use crate::error::{Error, Result};
use crate::imaging::{resize, Image};
use crate::rng::{domain, hash_str, Rng};

const TAG_VALIDATION: u64 = 1;
const TAG_SHUFFLE: u64 = 2;
const TAG_AUGMENT: u64 = 3;

#[derive(Debug, Clone, Copy)]
pub struct TrainSample<'a> {
    pub id: &'a str,
    pub image: &'a Image,
    pub labels: &'a [bool],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    /// Rate used during this epoch.
    pub lr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub adam_epsilon: f64,
    pub bce_epsilon: f64,
    pub train_ids: Vec<String>,
    pub val_ids: Vec<String>,
}

impl TrainingLog {
    /// `epoch,train_loss,val_loss,lr`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,val_loss,lr\n");
        for r in &self.epochs {
            writeln!(out, "{},{},{},{}", r.epoch, r.train_loss, r.val_loss, r.lr).unwrap();
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the lowest validation loss.
    pub model: Model,
    pub log: TrainingLog,
}

fn check_sizes(mc: &ModelConfig, ac: &AugConfig) -> Result<()> {
    if ac.train_size != mc.input_size || ac.crop_size != mc.input_size {
        return Err(Error::Config(format!(
            "train_size ({}) and crop_size ({}) must equal the model input_size ({})",
            ac.train_size, ac.crop_size, mc.input_size
        )));
    }
    Ok(())
}

/// Trains a freshly initialized model; see [`train_from`].
pub fn train(samples: &[TrainSample<'_>], tc: &TrainConfig, mc: &ModelConfig, ac: &AugConfig) -> Result<TrainOutcome> {
    train_from(Model::init(mc)?, samples, tc, ac)
}

/// Trains `initial` on `samples`.
///
/// `val_frac` of the samples (at least one) are held out for validation,
/// chosen from `tc.seed`. Each epoch shuffles the rest, runs ADAM over
/// batches of `batch_size` (the last partial batch is kept) with fresh
/// augmentation per `(epoch, sample)`, then scores the validation set on
/// plain resized images. After `plateau_patience` epochs without a new best
/// validation loss the rate is multiplied by `lr_factor`, not going below
/// `min_lr`.
pub fn train_from(
    initial: Model,
    samples: &[TrainSample<'_>],
    tc: &TrainConfig,
    ac: &AugConfig,
) -> Result<TrainOutcome> {
    tc.validate()?;
    check_sizes(initial.arch(), ac)?;
    if samples.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "training needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    let n_out = initial.n_outputs();
    if let Some(s) = samples.iter().find(|s| s.labels.len() != n_out) {
        return Err(Error::ShapeMismatch(format!(
            "sample {} has {} labels, model has {n_out} outputs",
            s.id,
            s.labels.len()
        )));
    }

    let mut order: Vec<usize> = (0..samples.len()).collect();
    Rng::derive(tc.seed, &[domain::TRAIN, TAG_VALIDATION]).shuffle(&mut order);
    let n_val = ((tc.val_frac * samples.len() as f64).round() as usize).clamp(1, samples.len() - 1);
    let mut val_idx = order[..n_val].to_vec();
    let mut train_idx = order[n_val..].to_vec();
    val_idx.sort_unstable();
    train_idx.sort_unstable();

    let input = initial.input_size();
    let val_images: Vec<Image> = val_idx
        .iter()
        .map(|&i| resize(samples[i].image, input, input))
        .collect::<Result<_>>()?;
    let val_labels: Vec<&[bool]> = val_idx.iter().map(|&i| samples[i].labels).collect();

    let mut model = initial;
    let mut state = AdamState::for_model(&model);
    let mut lr = tc.lr;
    let mut best: Option<(f64, usize, Model)> = None;
    let mut stale = 0usize;
    let mut epochs = Vec::with_capacity(tc.max_epochs);

    for epoch in 1..=tc.max_epochs {
        let mut perm = train_idx.clone();
        Rng::derive(tc.seed, &[domain::TRAIN, TAG_SHUFFLE, epoch as u64]).shuffle(&mut perm);
        let hp = AdamHyper {
            lr,
            beta1: tc.beta1,
            beta2: tc.beta2,
            epsilon: tc.epsilon,
        };
        let mut loss_sum = 0.0;
        for chunk in perm.chunks(tc.batch_size) {
            let batch: Vec<Image> = chunk
                .iter()
                .map(|&i| {
                    let s = &samples[i];
                    let mut rng = Rng::derive(tc.seed, &[domain::TRAIN, TAG_AUGMENT, epoch as u64, hash_str(s.id)]);
                    augment(s.image, &mut rng, ac)
                })
                .collect();
            let labels: Vec<&[bool]> = chunk.iter().map(|&i| samples[i].labels).collect();
            let (loss, grads) = model.loss_and_gradients(&batch, &labels)?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss(format!("training loss at epoch {epoch}")));
            }
            super::adam::adam_step(&mut model, &mut state, &grads, &hp)?;
            loss_sum += loss * chunk.len() as f64;
        }
        let train_loss = loss_sum / perm.len() as f64;
        let val_loss = model.loss(&val_images, &val_labels)?;
        if !val_loss.is_finite() {
            return Err(Error::NonFiniteLoss(format!("validation loss at epoch {epoch}")));
        }
        epochs.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            lr,
        });
        log::debug!("epoch {epoch}: train {train_loss:.5} val {val_loss:.5} lr {lr}");

        if best.as_ref().is_none_or(|(b, _, _)| val_loss < *b) {
            best = Some((val_loss, epoch, model.clone()));
            stale = 0;
        } else {
            stale += 1;
            if stale >= tc.plateau_patience {
                lr = (lr * tc.lr_factor).max(tc.min_lr);
                stale = 0;
            }
        }
    }

    let (best_val_loss, best_epoch, model) = match best {
        Some(b) => b,
        None => {
            // zero epochs requested: report the initial model
            let v = model.loss(&val_images, &val_labels)?;
            (v, 0, model)
        }
    };
    let ids = |idx: &[usize]| idx.iter().map(|&i| samples[i].id.to_string()).collect();
    Ok(TrainOutcome {
        model,
        log: TrainingLog {
            epochs,
            best_epoch,
            best_val_loss,
            adam_epsilon: tc.epsilon,
            bce_epsilon: BCE_EPSILON,
            train_ids: ids(&train_idx),
            val_ids: ids(&val_idx),
        },
    })
}

/// Mean of the model's probabilities over the five test crops.
pub fn predict_five_crop(model: &Model, img: &Image, ac: &AugConfig) -> Result<Vec<f64>> {
    let crops = test_transform(img, ac)?;
    let probs = model.forward(&crops)?;
    let mut mean = vec![0.0; model.n_outputs()];
    for row in &probs {
        for (m, p) in mean.iter_mut().zip(row) {
            *m += p;
        }
    }
    mean.iter_mut().for_each(|m| *m /= probs.len() as f64);
    Ok(mean)
}
