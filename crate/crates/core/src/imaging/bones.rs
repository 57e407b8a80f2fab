//! Band-attenuation bone suppression used as the reference suppressor.
//!
//! Rib shadows are modelled as mid-frequency structure: the image minus
//! `strength` times a difference-of-Gaussians band-pass component, clamped
//! back into `[0, 1]`.

use serde::{Deserialize, Serialize};

use super::Image;

/// Pluggable bone suppressor.
pub trait BoneSuppressor {
    fn suppress(&self, img: &Image) -> Image;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoneSuppression {
    /// Fraction of the band component removed, in `[0, 1]`.
    pub strength: f64,
    /// Standard deviation of the fine blur (pixels).
    pub sigma_fine: f64,
    /// Standard deviation of the coarse blur (pixels).
    pub sigma_coarse: f64,
}

impl Default for BoneSuppression {
    fn default() -> Self {
        Self {
            strength: 1.0,
            sigma_fine: 2.0,
            sigma_coarse: 8.0,
        }
    }
}

impl BoneSuppressor for BoneSuppression {
    fn suppress(&self, img: &Image) -> Image {
        suppress_bones(img, self.strength, self.sigma_fine, self.sigma_coarse)
    }
}

fn kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil().max(1.0) as isize;
    let k: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.into_iter().map(|v| v / s).collect()
}

/// Separable Gaussian blur, replicate boundary, kernel truncated at 3 sigma.
pub fn gaussian_blur(data: &[f64], width: usize, height: usize, sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return data.to_vec();
    }
    let k = kernel(sigma);
    let r = (k.len() / 2) as isize;
    let clampi = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
    let mut tmp = vec![0.0; data.len()];
    for y in 0..height {
        let row = &data[y * width..(y + 1) * width];
        for x in 0..width {
            tmp[y * width + x] = k
                .iter()
                .enumerate()
                .map(|(j, kv)| kv * row[clampi(x as isize + j as isize - r, width)])
                .sum();
        }
    }
    let mut out = vec![0.0; data.len()];
    for y in 0..height {
        for x in 0..width {
            out[y * width + x] = k
                .iter()
                .enumerate()
                .map(|(j, kv)| kv * tmp[clampi(y as isize + j as isize - r, height) * width + x])
                .sum();
        }
    }
    out
}

/// `img - strength * (blur(sigma_fine) - blur(sigma_coarse))`, clamped.
/// Strength 0 returns the input unchanged.
pub fn suppress_bones(img: &Image, strength: f64, sigma_fine: f64, sigma_coarse: f64) -> Image {
    if strength == 0.0 {
        return img.clone();
    }
    let (w, h) = (img.width(), img.height());
    let src: Vec<f64> = img.data().iter().map(|&v| f64::from(v)).collect();
    let fine = gaussian_blur(&src, w, h, sigma_fine);
    let coarse = gaussian_blur(&src, w, h, sigma_coarse);
    let out = src
        .iter()
        .zip(fine.iter().zip(&coarse))
        .map(|(&v, (&f, &c))| (v - strength * (f - c)) as f32)
        .collect();
    Image::from_raw_clamped(w, h, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn textured(n: usize) -> Image {
        Image::from_fn(n, n, |x, y| {
            (0.5 + 0.3 * ((x * 7 + y * 3) as f32 * 0.37).sin()) as f32
        })
    }

    #[test]
    fn zero_strength_is_identity() {
        let img = textured(20);
        assert_eq!(suppress_bones(&img, 0.0, 2.0, 8.0), img);
    }

    #[test]
    fn constant_image_unchanged() {
        let img = Image::constant(24, 16, 0.42);
        for s in [0.3, 1.0] {
            let out = suppress_bones(&img, s, 2.0, 8.0);
            for (a, b) in out.data().iter().zip(img.data()) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }

    /// Amplitude of the `period`-pixel sinusoid along a column, by projection
    /// onto sine and cosine over whole periods.
    fn amplitude(img: &Image, x: usize, rows: std::ops::Range<usize>, period: f64) -> f64 {
        let (mut s, mut c) = (0.0, 0.0);
        let n = rows.len() as f64;
        for y in rows {
            let v = f64::from(img.get(x, y));
            let t = 2.0 * PI * y as f64 / period;
            s += v * t.sin();
            c += v * t.cos();
        }
        2.0 * (s * s + c * c).sqrt() / n
    }

    #[test]
    fn stripe_attenuation_matches_gaussian_response() {
        let (n, period) = (128usize, 8.0);
        let img = Image::from_fn(n, n, |_, y| {
            (0.5 + 0.3 * (2.0 * PI * y as f64 / period).sin()) as f32
        });
        let (s1, s2) = (2.0, 8.0);
        let out = suppress_bones(&img, 1.0, s1, s2);
        // Continuous Gaussian transfer function exp(-2 pi^2 sigma^2 f^2).
        let f = 1.0 / period;
        let g = |s: f64| (-2.0 * PI * PI * s * s * f * f).exp();
        let predicted = 1.0 - (g(s1) - g(s2));
        let rows = 32..96; // 8 whole periods, away from the replicate boundary
        let ratio = amplitude(&out, n / 2, rows.clone(), period) / amplitude(&img, n / 2, rows, period);
        assert!((ratio - predicted).abs() < 0.01, "ratio {ratio} predicted {predicted}");
    }
}
