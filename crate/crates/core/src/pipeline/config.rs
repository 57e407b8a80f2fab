//! Versioned TOML configuration of a whole experiment run.
//!
//! ```toml
//! version = 1
//! experiments = ["normal", "lung", "en_normal"]
//!
//! [paths]
//! images = "images"        # <images>/<id>.pgm
//! labels = "labels.csv"
//! cache = "cache"          # overridden by CXRPIPE_CACHE_DIR
//! output = "runs"
//!
//! [preprocess]             # operator settings
//! [augment]                # augmentation and test-time sizes
//! [model]                  # architecture
//! [train]                  # optimizer and schedule
//! [split]                  # resampling protocol
//! ```
//!
//! Relative paths are resolved against the config file's directory. Unknown
//! keys anywhere are errors.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::Experiment;
use crate::augment::AugConfig;
use crate::dataset::PreprocessConfig;
use crate::error::{Error, Result};
use crate::imaging::BoneSuppression;
use crate::model::{ModelConfig, TrainConfig};

pub const CONFIG_VERSION: u32 = 1;

/// Environment variable that replaces `paths.cache`.
pub const CACHE_DIR_ENV: &str = "CXRPIPE_CACHE_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub images: PathBuf,
    pub labels: PathBuf,
    pub cache: PathBuf,
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitConfig {
    pub n_resamples: usize,
    pub train_frac: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            n_resamples: 5,
            train_frac: 0.7,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub version: u32,
    pub paths: Paths,
    #[serde(default = "Experiment::all")]
    pub experiments: Vec<Experiment>,
    #[serde(default)]
    pub preprocess: PreprocessConfig,
    #[serde(default)]
    pub augment: AugConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub split: SplitConfig,
}

impl PipelineConfig {
    /// Settings sized for 64×64 inputs: 32-pixel training crops, a 3-pixel
    /// lung border, 30 epochs with patience 5.
    pub fn desk_scale(paths: Paths) -> Self {
        Self {
            version: CONFIG_VERSION,
            paths,
            experiments: Experiment::all(),
            preprocess: PreprocessConfig {
                bone_suppression: BoneSuppression::default(),
                border: 3,
                ..PreprocessConfig::default()
            },
            augment: AugConfig {
                train_size: 32,
                test_size: 36,
                crop_size: 32,
                ..AugConfig::default()
            },
            model: ModelConfig {
                input_size: 32,
                ..ModelConfig::default()
            },
            train: TrainConfig {
                max_epochs: 30,
                plateau_patience: 5,
                ..TrainConfig::default()
            },
            split: SplitConfig::default(),
        }
    }

    /// Parses, resolves relative paths against `base`, applies the cache
    /// override and validates.
    pub fn from_toml_str(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.paths.images);
        resolve(&mut cfg.paths.labels);
        resolve(&mut cfg.paths.cache);
        resolve(&mut cfg.paths.output);
        if let Some(dir) = std::env::var_os(CACHE_DIR_ENV).filter(|d| !d.is_empty()) {
            cfg.paths.cache = PathBuf::from(dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, base)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::dataset::write_atomic(path.as_ref(), self.to_toml().as_bytes())
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "config version {} is not supported (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        if !self.paths.images.is_dir() {
            return Err(Error::Config(format!(
                "image directory {} does not exist",
                self.paths.images.display()
            )));
        }
        if !self.paths.labels.is_file() {
            return Err(Error::Config(format!(
                "label file {} does not exist",
                self.paths.labels.display()
            )));
        }
        if self.experiments.is_empty() {
            return Err(Error::Config("no experiments selected".into()));
        }
        Experiment::check_dependencies(&self.experiments)?;
        self.preprocess.validate()?;
        self.augment.validate()?;
        self.model.spatial_schedule().map_err(|e| Error::Config(e.to_string()))?;
        self.train.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.augment.train_size != self.model.input_size || self.augment.crop_size != self.model.input_size {
            return Err(Error::Config(format!(
                "augment.train_size ({}) and augment.crop_size ({}) must equal model.input_size ({})",
                self.augment.train_size, self.augment.crop_size, self.model.input_size
            )));
        }
        let s = &self.split;
        if s.n_resamples == 0 || !(s.train_frac > 0.0 && s.train_frac < 1.0) {
            return Err(Error::Config(format!(
                "split needs n_resamples >= 1 and 0 < train_frac < 1, got {} / {}",
                s.n_resamples, s.train_frac
            )));
        }
        Ok(())
    }

    /// Hex SHA-256 over every setting that influences results (paths and
    /// the experiment selection excluded). Keys the run directory and guards
    /// resumed jobs against stale artifacts.
    pub fn hash(&self) -> String {
        #[derive(Serialize)]
        struct Keyed<'a> {
            version: u32,
            preprocess: &'a PreprocessConfig,
            augment: &'a AugConfig,
            model: &'a ModelConfig,
            train: &'a TrainConfig,
            split: &'a SplitConfig,
        }
        let json = serde_json::to_vec(&Keyed {
            version: self.version,
            preprocess: &self.preprocess,
            augment: &self.augment,
            model: &self.model,
            train: &self.train,
            split: &self.split,
        })
        .expect("config serializes");
        hex::encode(Sha256::digest(json))
    }

    /// `<output>/run-<first 12 hex digits of the hash>`.
    pub fn run_dir(&self) -> PathBuf {
        self.paths.output.join(format!("run-{}", &self.hash()[..12]))
    }
}
