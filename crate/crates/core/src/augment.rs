//! Training-time augmentation and the deterministic test transform.
//!
//! Training samples go through: random patch (80-100% of the area, aspect
//! ratio log-uniform in [3/4, 4/3]) -> resize to `train_size` -> horizontal
//! flip with probability `flip_prob` -> rotation uniform in
//! `[-max_rotation, max_rotation]` degrees. Test images are resized to
//! `test_size` and split into five `crop_size` crops.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{crop, five_crop, horizontal_flip, resize, rotate, BoundingBox, Image};
use crate::rng::Rng;

const PATCH_RETRIES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AugConfig {
    pub area_min: f64,
    pub area_max: f64,
    pub aspect_min: f64,
    pub aspect_max: f64,
    pub flip_prob: f64,
    /// Degrees.
    pub max_rotation: f64,
    pub train_size: usize,
    pub test_size: usize,
    pub crop_size: usize,
}

impl Default for AugConfig {
    fn default() -> Self {
        Self {
            area_min: 0.8,
            area_max: 1.0,
            aspect_min: 3.0 / 4.0,
            aspect_max: 4.0 / 3.0,
            flip_prob: 0.5,
            max_rotation: 7.0,
            train_size: 56,
            test_size: 64,
            crop_size: 56,
        }
    }
}

impl AugConfig {
    /// The full-scale setting: 448 training input, 480 test resize.
    pub fn full_scale() -> Self {
        Self {
            train_size: 448,
            test_size: 480,
            crop_size: 448,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.area_min > 0.0 && self.area_min <= self.area_max && self.area_max <= 1.0) {
            return bad(format!(
                "need 0 < area_min <= area_max <= 1, got {} / {}",
                self.area_min, self.area_max
            ));
        }
        if !(self.aspect_min > 0.0 && self.aspect_min <= self.aspect_max) {
            return bad(format!(
                "need 0 < aspect_min <= aspect_max, got {} / {}",
                self.aspect_min, self.aspect_max
            ));
        }
        if !(0.0..=1.0).contains(&self.flip_prob) {
            return bad(format!("flip_prob {} outside [0, 1]", self.flip_prob));
        }
        if !(self.max_rotation >= 0.0 && self.max_rotation <= 45.0) {
            return bad(format!("max_rotation {} outside [0, 45]", self.max_rotation));
        }
        if self.train_size == 0 || self.test_size == 0 || self.crop_size == 0 {
            return bad("train_size, test_size and crop_size must be >= 1".into());
        }
        if self.crop_size > self.test_size {
            return bad(format!(
                "crop_size {} exceeds test_size {}",
                self.crop_size, self.test_size
            ));
        }
        Ok(())
    }
}

/// Drawn patch parameters, exposed for distribution checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchGeometry {
    /// Area fraction as drawn, before rounding and clamping.
    pub area_frac: f64,
    /// Width / height ratio as drawn.
    pub aspect: f64,
    pub bbox: BoundingBox,
    /// No valid patch was found; `bbox` is the full image.
    pub fell_back: bool,
}

/// Draws a patch box for a `width` x `height` image.
pub fn sample_patch(width: usize, height: usize, rng: &mut Rng, cfg: &AugConfig) -> PatchGeometry {
    let area = (width * height) as f64;
    let (ln_lo, ln_hi) = (cfg.aspect_min.ln(), cfg.aspect_max.ln());
    let mut last = (cfg.area_max, 1.0);
    for _ in 0..PATCH_RETRIES {
        let a = rng.uniform(cfg.area_min, cfg.area_max);
        let r = rng.uniform(ln_lo, ln_hi).exp();
        last = (a, r);
        let w = ((a * area * r).sqrt().round() as usize).min(width);
        let h = ((a * area / r).sqrt().round() as usize).min(height);
        if w == 0 || h == 0 {
            continue;
        }
        let x0 = rng.index_inclusive(width - w);
        let y0 = rng.index_inclusive(height - h);
        return PatchGeometry {
            area_frac: a,
            aspect: r,
            bbox: BoundingBox::new(x0, y0, x0 + w, y0 + h),
            fell_back: false,
        };
    }
    PatchGeometry {
        area_frac: last.0,
        aspect: last.1,
        bbox: BoundingBox::new(0, 0, width, height),
        fell_back: true,
    }
}

pub fn random_patch(img: &Image, rng: &mut Rng, cfg: &AugConfig) -> Image {
    let g = sample_patch(img.width(), img.height(), rng, cfg);
    crop(img, &g.bbox).expect("sampled patch lies inside the image")
}

/// Full training augmentation; output is always `train_size` square.
pub fn augment(img: &Image, rng: &mut Rng, cfg: &AugConfig) -> Image {
    let patch = random_patch(img, rng, cfg);
    let mut out = resize(&patch, cfg.train_size, cfg.train_size).expect("train_size >= 1");
    if rng.bernoulli(cfg.flip_prob) {
        out = horizontal_flip(&out);
    }
    let angle = rng.uniform(-cfg.max_rotation, cfg.max_rotation);
    rotate(&out, angle)
}

/// Resize to `test_size` square, then five `crop_size` crops
/// (TL, TR, BL, BR, C).
pub fn test_transform(img: &Image, cfg: &AugConfig) -> Result<[Image; 5]> {
    if cfg.crop_size > cfg.test_size {
        return Err(Error::InvalidParameter(format!(
            "crop_size {} exceeds test_size {}",
            cfg.crop_size, cfg.test_size
        )));
    }
    let resized = resize(img, cfg.test_size, cfg.test_size)?;
    five_crop(&resized, cfg.crop_size)
}
