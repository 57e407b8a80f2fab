//! The four image versions each model family is trained on.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::imaging::{
    crop, lung_bounding_box, BoneSuppression, BoneSuppressor, BoundingBox, Image,
    LungSegmentation, LungSegmenter,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Normal,
    BoneSuppressed,
    LungCropped,
    /// Bone suppression followed by lung cropping.
    Combined,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Normal,
        Variant::BoneSuppressed,
        Variant::LungCropped,
        Variant::Combined,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Normal => "normal",
            Variant::BoneSuppressed => "bone_suppressed",
            Variant::LungCropped => "lung_cropped",
            Variant::Combined => "combined",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown variant `{s}`")))
    }
}

/// Operator settings shared by every variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PreprocessConfig {
    pub bone_suppression: BoneSuppression,
    pub segmentation: LungSegmentation,
    /// Pixels added on every side of the lung box, at the segmented
    /// image's native resolution.
    pub border: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            bone_suppression: BoneSuppression::default(),
            segmentation: LungSegmentation::default(),
            border: 100,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        let b = &self.bone_suppression;
        if !(0.0..=1.0).contains(&b.strength) {
            return Err(Error::Config(format!(
                "bone suppression strength {} outside [0, 1]",
                b.strength
            )));
        }
        if !(b.sigma_fine > 0.0 && b.sigma_coarse > b.sigma_fine) {
            return Err(Error::Config(format!(
                "need 0 < sigma_fine < sigma_coarse, got {} and {}",
                b.sigma_fine, b.sigma_coarse
            )));
        }
        if !(0.0..1.0).contains(&self.segmentation.min_region_frac) {
            return Err(Error::Config("min_region_frac must lie in [0, 1)".into()));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form; keys the variant cache.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(json))
    }

    /// Segment and compute the lung crop box.
    pub fn lung_box(&self, img: &Image) -> Result<BoundingBox> {
        let mask = self.segmentation.segment(img)?;
        lung_bounding_box(&mask, self.border)
    }

    /// Crops `target` to the lung box found on `reference`.
    fn lung_crop(&self, reference: &Image, target: &Image) -> (Image, bool) {
        match self.lung_box(reference).and_then(|b| crop(target, &b)) {
            Ok(out) => (out, false),
            Err(e) => {
                log::warn!("lung cropping fell back to the full image: {e}");
                (target.clone(), true)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Materialized {
    pub image: Image,
    /// Segmentation failed and the uncropped image was kept.
    pub fell_back: bool,
}

/// Applies the variant's operator chain. Segmentation failures fall back to
/// the uncropped image and are reported through `fell_back`.
pub fn materialize_variant(img: &Image, v: Variant, cfg: &PreprocessConfig) -> Materialized {
    let (image, fell_back) = match v {
        Variant::Normal => (img.clone(), false),
        Variant::BoneSuppressed => (cfg.bone_suppression.suppress(img), false),
        Variant::LungCropped => cfg.lung_crop(img, img),
        // The box comes from the unsuppressed image, so both cropped
        // variants share the same field of view.
        Variant::Combined => cfg.lung_crop(img, &cfg.bone_suppression.suppress(img)),
    };
    Materialized { image, fell_back }
}
