//! Shared fixtures for the integration tests.

#![allow(dead_code)]

use std::path::Path;

use cxrpipe::augment::AugConfig;
use cxrpipe::model::{ConvBlock, ModelConfig, TrainConfig};
use cxrpipe::pipeline::{Paths, PipelineConfig, SplitConfig};
use cxrpipe::synthetic::{generate_corpus, write_corpus, ChestConfig};

/// Writes `n` synthetic images plus labels into `dir` and returns a config
/// with a small, fast model.
pub fn tiny_workspace(dir: &Path, n: usize) -> PipelineConfig {
    let corpus = generate_corpus(n, &ChestConfig::default(), 5).unwrap();
    write_corpus(&corpus, dir).unwrap();
    let mut cfg = PipelineConfig::desk_scale(Paths {
        images: dir.join("images"),
        labels: dir.join("labels.csv"),
        cache: dir.join("cache"),
        output: dir.join("runs"),
    });
    cfg.augment = AugConfig {
        train_size: 16,
        test_size: 18,
        crop_size: 16,
        ..cfg.augment
    };
    cfg.model = ModelConfig {
        input_size: 16,
        conv_blocks: vec![ConvBlock::new(4, 3, 2), ConvBlock::new(8, 3, 2)],
        ..cfg.model
    };
    cfg.train = TrainConfig {
        max_epochs: 2,
        ..cfg.train
    };
    cfg.split = SplitConfig {
        n_resamples: 2,
        ..cfg.split
    };
    cfg
}
