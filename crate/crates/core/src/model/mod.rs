//! Small convolutional multi-label classifier and its training loop.
//!
//! Architecture: a stack of `kernel x kernel` convolutions (zero padding
//! `kernel / 2`, configurable stride) each followed by ReLU, global average
//! pooling, a dense head and an element-wise sigmoid. Gradients are exact
//! and analytic; optimization is ADAM with plateau-based learning-rate
//! halving.

mod adam;
mod checkpoint;
mod config;
mod loss;
mod network;
mod train;

pub use adam::{adam_step, AdamHyper, AdamState};
pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint};
pub use config::{ConvBlock, ModelConfig, TrainConfig};
pub use loss::{bce_logit_gradient, bce_loss, BCE_EPSILON};
pub use network::{sigmoid, Gradients, Model};
pub use train::{predict_five_crop, train, train_from, EpochRecord, TrainOutcome, TrainSample, TrainingLog};
