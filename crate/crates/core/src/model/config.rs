use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvBlock {
    pub channels: usize,
    #[serde(default = "default_kernel")]
    pub kernel: usize,
    #[serde(default = "default_stride")]
    pub stride: usize,
}

fn default_kernel() -> usize {
    3
}

fn default_stride() -> usize {
    2
}

impl ConvBlock {
    pub fn new(channels: usize, kernel: usize, stride: usize) -> Self {
        Self {
            channels,
            kernel,
            stride,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    /// Square input side in pixels.
    pub input_size: usize,
    pub conv_blocks: Vec<ConvBlock>,
    pub n_outputs: usize,
    pub seed: u64,
    /// Shift and scale each input image to zero mean and unit variance.
    pub standardize_input: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            input_size: 56,
            conv_blocks: vec![
                ConvBlock::new(8, 3, 2),
                ConvBlock::new(16, 3, 2),
                ConvBlock::new(32, 3, 2),
            ],
            n_outputs: crate::dataset::N_FINDINGS,
            seed: 0,
            standardize_input: true,
        }
    }
}

impl ModelConfig {
    /// Spatial side after each block; errors if a stride does not divide
    /// the incoming size.
    pub fn spatial_schedule(&self) -> Result<Vec<usize>> {
        if self.input_size == 0 {
            return Err(Error::Config("input_size must be >= 1".into()));
        }
        if self.n_outputs == 0 {
            return Err(Error::Config("n_outputs must be >= 1".into()));
        }
        if self.conv_blocks.is_empty() {
            return Err(Error::Config("at least one conv block is required".into()));
        }
        let mut size = self.input_size;
        let mut out = Vec::with_capacity(self.conv_blocks.len());
        for (i, b) in self.conv_blocks.iter().enumerate() {
            if b.channels == 0 || b.stride == 0 || b.kernel % 2 == 0 {
                return Err(Error::Config(format!(
                    "conv block {i}: need channels >= 1, stride >= 1 and an odd kernel"
                )));
            }
            if size % b.stride != 0 {
                return Err(Error::Config(format!(
                    "conv block {i}: stride {} does not divide spatial size {size}",
                    b.stride
                )));
            }
            size /= b.stride;
            out.push(size);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation improvement before the rate is reduced.
    pub plateau_patience: usize,
    pub lr_factor: f64,
    /// The rate is never reduced below this.
    pub min_lr: f64,
    /// Fraction of the training ids held out for validation.
    pub val_frac: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 0.005,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 15,
            max_epochs: 20,
            plateau_patience: 3,
            lr_factor: 0.5,
            min_lr: 1e-5,
            val_frac: 0.1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.lr > 0.0) {
            return bad("lr must be > 0");
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2)) {
            return bad("beta1 and beta2 must lie in [0, 1)");
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be > 0");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1");
        }
        if !(self.lr_factor > 0.0 && self.lr_factor <= 1.0) {
            return bad("lr_factor must lie in (0, 1]");
        }
        if !(self.val_frac > 0.0 && self.val_frac < 1.0) {
            return bad("val_frac must lie in (0, 1)");
        }
        if self.min_lr < 0.0 {
            return bad("min_lr must be >= 0");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schedule() {
        assert_eq!(ModelConfig::default().spatial_schedule().unwrap(), vec![28, 14, 7]);
    }

    #[test]
    fn incompatible_stride_is_rejected() {
        let cfg = ModelConfig {
            input_size: 30,
            ..ModelConfig::default()
        };
        assert!(cfg.spatial_schedule().is_err());
    }
}
