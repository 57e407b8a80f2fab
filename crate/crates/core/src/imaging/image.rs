use crate::error::{Error, Result};

/// Row-major single-channel raster with intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl Image {
    /// Validating constructor.
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "zero-area image ({width}x{height})"
            )));
        }
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "data length {} != {width}x{height}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite() || *v < 0.0 || *v > 1.0) {
            return Err(Error::InvalidImage(format!(
                "intensity {} at index {i} outside [0, 1]",
                data[i]
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Builds an image from a per-pixel function; values are clamped to `[0, 1]`
    /// and non-finite values become 0.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        assert!(width > 0 && height > 0, "zero-area image");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(sanitize(f(x, y)));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn constant(width: usize, height: usize, value: f32) -> Self {
        Self::from_fn(width, height, |_, _| value)
    }

    /// Internal constructor for operators that already produce valid,
    /// correctly sized data; clamps to restore the intensity invariant.
    pub(crate) fn from_raw_clamped(width: usize, height: usize, mut data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        for v in &mut data {
            *v = sanitize(*v);
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    pub fn full_box(&self) -> BoundingBox {
        BoundingBox {
            x0: 0,
            y0: 0,
            x1: self.width,
            y1: self.height,
        }
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| f64::from(v)).sum::<f64>() / self.data.len() as f64
    }
}

#[inline]
fn sanitize(v: f32) -> f32 {
    if v.is_finite() {
        v.clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Binary mask aligned with an image; `true` marks lung field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "mask length {} != {width}x{height}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}

/// Axis-aligned box, inclusive `x0`/`y0`, exclusive `x1`/`y1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoundingBox {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl BoundingBox {
    pub fn new(x0: usize, y0: usize, x1: usize, y1: usize) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> usize {
        self.x1.saturating_sub(self.x0)
    }

    pub fn height(&self) -> usize {
        self.y1.saturating_sub(self.y0)
    }

    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        if self.x0 < self.x1 && self.x1 <= width && self.y0 < self.y1 && self.y1 <= height {
            Ok(())
        } else {
            Err(Error::InvalidBox {
                x0: self.x0,
                y0: self.y0,
                x1: self.x1,
                y1: self.y1,
                width,
                height,
            })
        }
    }

    /// `true` when `other` lies entirely inside `self`.
    pub fn contains(&self, other: &BoundingBox) -> bool {
        self.x0 <= other.x0 && self.y0 <= other.y0 && self.x1 >= other.x1 && self.y1 >= other.y1
    }

    /// Translates a box expressed in the coordinates of `self`'s crop back
    /// into the parent image.
    pub fn offset_into(&self, inner: &BoundingBox) -> BoundingBox {
        BoundingBox {
            x0: self.x0 + inner.x0,
            y0: self.y0 + inner.y0,
            x1: self.x0 + inner.x1,
            y1: self.y0 + inner.y1,
        }
    }
}
