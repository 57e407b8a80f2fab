//! Classical lung-field segmentation used as the reference segmenter.
//!
//! This is a stand-in for a learned segmenter: Otsu threshold (lung fields
//! are dark), one 3x3 morphological opening, then removal of components
//! smaller than a fraction of the image area. On an image with bright
//! structures on a dark background it selects the background; that is the
//! expected behaviour of the threshold-side convention.

use serde::{Deserialize, Serialize};

use super::{connected_components, Image, Mask};
use crate::error::{Error, Result};

const BINS: usize = 256;

/// Otsu level as a histogram bin index over 256 equal bins of `[0, 1]`.
/// Pixels in bins `0..=k` form the dark class.
pub fn otsu_threshold(img: &Image) -> Result<usize> {
    let mut hist = [0u64; BINS];
    for &v in img.data() {
        hist[bin_of(v)] += 1;
    }
    if hist.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::SegmentationFailed(
            "intensity histogram has a single level".into(),
        ));
    }
    let total = img.data().len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let (mut w0, mut sum0) = (0.0f64, 0.0f64);
    let (mut best_k, mut best_var) = (0usize, -1.0f64);
    for (k, &c) in hist.iter().enumerate().take(BINS - 1) {
        w0 += c as f64;
        sum0 += k as f64 * c as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let mu0 = sum0 / w0;
        let mu1 = (sum_all - sum0) / w1;
        let var = w0 * w1 * (mu0 - mu1).powi(2);
        if var > best_var {
            best_var = var;
            best_k = k;
        }
    }
    Ok(best_k)
}

#[inline]
fn bin_of(v: f32) -> usize {
    ((v * BINS as f32) as usize).min(BINS - 1)
}

fn morph(mask: &[bool], w: usize, h: usize, erode: bool) -> Vec<bool> {
    let mut out = vec![false; w * h];
    for y in 0..h {
        let ys = y.saturating_sub(1)..=(y + 1).min(h - 1);
        for x in 0..w {
            let xs = x.saturating_sub(1)..=(x + 1).min(w - 1);
            let mut acc = erode;
            'window: for yy in ys.clone() {
                for xx in xs.clone() {
                    let v = mask[yy * w + xx];
                    if erode && !v {
                        acc = false;
                        break 'window;
                    }
                    if !erode && v {
                        acc = true;
                        break 'window;
                    }
                }
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Pluggable lung-field segmenter.
pub trait LungSegmenter {
    fn segment(&self, img: &Image) -> Result<Mask>;
}

/// Otsu + opening + small-component removal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LungSegmentation {
    /// Components below this fraction of the image area are dropped.
    pub min_region_frac: f64,
}

impl Default for LungSegmentation {
    fn default() -> Self {
        Self {
            min_region_frac: 0.005,
        }
    }
}

impl LungSegmenter for LungSegmentation {
    fn segment(&self, img: &Image) -> Result<Mask> {
        let k = otsu_threshold(img)?;
        let (w, h) = (img.width(), img.height());
        let dark: Vec<bool> = img.data().iter().map(|&v| bin_of(v) <= k).collect();
        let opened = morph(&morph(&dark, w, h, true), w, h, false);
        let opened = Mask::new(w, h, opened)?;
        let min_area = self.min_region_frac * (w * h) as f64;
        let mut keep = vec![false; w * h];
        let mut any = false;
        for region in connected_components(&opened) {
            if region.area() as f64 >= min_area {
                any = true;
                for &i in &region.pixels {
                    keep[i] = true;
                }
            }
        }
        if !any {
            return Err(Error::SegmentationFailed(
                "no dark component survived the area filter".into(),
            ));
        }
        Mask::new(w, h, keep)
    }
}

/// Reference segmentation with default settings.
pub fn segment_lung_fields(img: &Image) -> Result<Mask> {
    LungSegmentation::default().segment(img)
}
