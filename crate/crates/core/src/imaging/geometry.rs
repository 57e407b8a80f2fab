//! Resampling and rearranging operators.

use super::{BoundingBox, Image};
use crate::error::{Error, Result};

/// Bilinear resize with half-pixel-centered sampling.
///
/// Output pixel `x` samples the source at `(x + 0.5) * W / w - 0.5`, with
/// coordinates clamped to the source domain.
pub fn resize(img: &Image, width: usize, height: usize) -> Result<Image> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter(format!(
            "resize target {width}x{height} has a zero dimension"
        )));
    }
    let (sw, sh) = (img.width(), img.height());
    if (sw, sh) == (width, height) {
        return Ok(img.clone());
    }
    let sx_scale = sw as f64 / width as f64;
    let sy_scale = sh as f64 / height as f64;
    // Horizontal taps are shared by every row.
    let xtaps: Vec<(usize, usize, f64)> = (0..width)
        .map(|x| axis_tap((x as f64 + 0.5) * sx_scale - 0.5, sw))
        .collect();
    let src = img.data();
    let mut out = Vec::with_capacity(width * height);
    for y in 0..height {
        let (y0, y1, fy) = axis_tap((y as f64 + 0.5) * sy_scale - 0.5, sh);
        let r0 = &src[y0 * sw..(y0 + 1) * sw];
        let r1 = &src[y1 * sw..(y1 + 1) * sw];
        for &(x0, x1, fx) in &xtaps {
            let top = f64::from(r0[x0]) * (1.0 - fx) + f64::from(r0[x1]) * fx;
            let bot = f64::from(r1[x0]) * (1.0 - fx) + f64::from(r1[x1]) * fx;
            out.push((top * (1.0 - fy) + bot * fy) as f32);
        }
    }
    Ok(Image::from_raw_clamped(width, height, out))
}

/// Clamped source coordinate split into two neighbouring indices and a weight.
#[inline]
fn axis_tap(coord: f64, len: usize) -> (usize, usize, f64) {
    let c = coord.clamp(0.0, (len - 1) as f64);
    let i0 = c.floor() as usize;
    let i1 = (i0 + 1).min(len - 1);
    (i0, i1, c - i0 as f64)
}

/// Copies the pixels inside `bbox`; no resampling.
pub fn crop(img: &Image, bbox: &BoundingBox) -> Result<Image> {
    bbox.validate(img.width(), img.height())?;
    let w = bbox.width();
    let mut out = Vec::with_capacity(w * bbox.height());
    for y in bbox.y0..bbox.y1 {
        let row = y * img.width();
        out.extend_from_slice(&img.data()[row + bbox.x0..row + bbox.x1]);
    }
    Ok(Image::from_raw_clamped(w, bbox.height(), out))
}

pub fn horizontal_flip(img: &Image) -> Image {
    let w = img.width();
    let mut out = Vec::with_capacity(img.data().len());
    for row in img.data().chunks_exact(w) {
        out.extend(row.iter().rev());
    }
    Image::from_raw_clamped(w, img.height(), out)
}

/// Rotation by `angle_deg` (counter-clockwise in display coordinates) about
/// the image center. Bilinear sampling; samples outside the source read as 0.
pub fn rotate(img: &Image, angle_deg: f64) -> Image {
    if angle_deg == 0.0 {
        return img.clone();
    }
    let (w, h) = (img.width(), img.height());
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let (sin, cos) = angle_deg.to_radians().sin_cos();
    let src = img.data();
    let at = |x: isize, y: isize| -> f64 {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            f64::from(src[y as usize * w + x as usize])
        }
    };
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let dy = y as f64 - cy;
        for x in 0..w {
            let dx = x as f64 - cx;
            // inverse map: output -> source
            let sx = cx + cos * dx - sin * dy;
            let sy = cy + sin * dx + cos * dy;
            let x0 = sx.floor();
            let y0 = sy.floor();
            let fx = sx - x0;
            let fy = sy - y0;
            let (xi, yi) = (x0 as isize, y0 as isize);
            let top = at(xi, yi) * (1.0 - fx) + at(xi + 1, yi) * fx;
            let bot = at(xi, yi + 1) * (1.0 - fx) + at(xi + 1, yi + 1) * fx;
            out.push((top * (1.0 - fy) + bot * fy) as f32);
        }
    }
    Image::from_raw_clamped(w, h, out)
}

/// Boxes of the five crops in order top-left, top-right, bottom-left,
/// bottom-right, center. The center offset is `floor((dim - size) / 2)`.
pub fn five_crop_boxes(width: usize, height: usize, size: usize) -> Result<[BoundingBox; 5]> {
    if size == 0 || size > width || size > height {
        return Err(Error::InvalidParameter(format!(
            "five-crop size {size} does not fit a {width}x{height} image"
        )));
    }
    let (dx, dy) = (width - size, height - size);
    let at = |x: usize, y: usize| BoundingBox::new(x, y, x + size, y + size);
    Ok([
        at(0, 0),
        at(dx, 0),
        at(0, dy),
        at(dx, dy),
        at(dx / 2, dy / 2),
    ])
}

pub fn five_crop(img: &Image, size: usize) -> Result<[Image; 5]> {
    let boxes = five_crop_boxes(img.width(), img.height(), size)?;
    let crops: Vec<Image> = boxes
        .iter()
        .map(|b| crop(img, b))
        .collect::<Result<_>>()?;
    Ok(crops.try_into().expect("five boxes"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp(w: usize, h: usize) -> Image {
        let n = (w * h - 1).max(1) as f32;
        Image::from_fn(w, h, |x, y| (y * w + x) as f32 / n)
    }

    /// Scalar bilinear sample written directly from the interpolation formula.
    fn bilinear_oracle(img: &Image, sx: f64, sy: f64) -> f64 {
        let sx = sx.max(0.0).min((img.width() - 1) as f64);
        let sy = sy.max(0.0).min((img.height() - 1) as f64);
        let x0 = sx.floor() as usize;
        let y0 = sy.floor() as usize;
        let x1 = (x0 + 1).min(img.width() - 1);
        let y1 = (y0 + 1).min(img.height() - 1);
        let (a, b) = (sx - x0 as f64, sy - y0 as f64);
        let p = |x, y| f64::from(img.get(x, y));
        (1.0 - a) * (1.0 - b) * p(x0, y0)
            + a * (1.0 - b) * p(x1, y0)
            + (1.0 - a) * b * p(x0, y1)
            + a * b * p(x1, y1)
    }

    #[test]
    fn identity_resize_is_bit_identical() {
        let img = ramp(7, 5);
        assert_eq!(resize(&img, 7, 5).unwrap(), img);
    }

    #[test]
    fn two_by_two_to_one_by_one_averages() {
        let img = Image::new(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let out = resize(&img, 1, 1).unwrap();
        assert_eq!(out.data(), &[0.5]);
    }

    #[test]
    fn ramp_downsample_matches_scalar_oracle() {
        let img = ramp(4, 4);
        let out = resize(&img, 2, 2).unwrap();
        for y in 0..2 {
            for x in 0..2 {
                // (x + 0.5) * 4/2 - 0.5 = 2x + 0.5
                let expect = bilinear_oracle(&img, 2.0 * x as f64 + 0.5, 2.0 * y as f64 + 0.5);
                assert!((f64::from(out.get(x, y)) - expect).abs() < 1e-6);
            }
        }
        // ramp value at (0.5, 0.5) is the mean of the top-left 2x2 block
        assert!((f64::from(out.get(0, 0)) - 2.5 / 15.0).abs() < 1e-6);
    }

    #[test]
    fn resize_rejects_zero_target() {
        assert!(resize(&ramp(3, 3), 0, 2).is_err());
    }

    #[test]
    fn crop_inner_block() {
        let img = ramp(4, 4);
        let c = crop(&img, &BoundingBox::new(1, 1, 3, 3)).unwrap();
        assert_eq!(c.width(), 2);
        assert_eq!(c.data(), &[img.get(1, 1), img.get(2, 1), img.get(1, 2), img.get(2, 2)]);
        assert_eq!(crop(&img, &img.full_box()).unwrap(), img);
        assert!(crop(&img, &BoundingBox::new(2, 2, 5, 3)).is_err());
    }

    #[test]
    fn flip_examples() {
        let row = Image::new(3, 1, vec![0.1, 0.2, 0.3]).unwrap();
        assert_eq!(horizontal_flip(&row).data(), &[0.3, 0.2, 0.1]);
        let sym = Image::new(3, 2, vec![0.1, 0.5, 0.1, 0.7, 0.2, 0.7]).unwrap();
        assert_eq!(horizontal_flip(&sym), sym);
    }

    #[test]
    fn rotate_zero_is_identity() {
        let img = ramp(9, 6);
        assert_eq!(rotate(&img, 0.0), img);
    }

    #[test]
    fn center_pixel_is_fixed_point() {
        let img = Image::from_fn(9, 9, |x, y| if (x, y) == (4, 4) { 1.0 } else { 0.0 });
        for angle in [-45.0, -7.0, 3.3, 7.0, 30.0, 45.0] {
            let r = rotate(&img, angle);
            assert!((r.get(4, 4) - 1.0).abs() < 1e-6, "angle {angle}");
        }
    }

    #[test]
    fn rotate_round_trip_on_smooth_fixture() {
        // Smooth Gaussian bump, dark toward the borders.
        let n = 64;
        let c = (n as f32 - 1.0) / 2.0;
        let img = Image::from_fn(n, n, |x, y| {
            let r2 = (x as f32 - c).powi(2) + (y as f32 - c).powi(2);
            (-r2 / (2.0 * 14.0 * 14.0)).exp()
        });
        let back = rotate(&rotate(&img, 7.0), -7.0);
        let mad: f64 = img
            .data()
            .iter()
            .zip(back.data())
            .map(|(a, b)| f64::from((a - b).abs()))
            .sum::<f64>()
            / (n * n) as f64;
        assert!(mad < 0.05, "mean abs diff {mad}");
    }

    #[test]
    fn five_crop_examples() {
        let img = ramp(4, 4);
        let crops = five_crop(&img, 4).unwrap();
        assert!(crops.iter().all(|c| *c == img));

        let crops = five_crop(&img, 2).unwrap();
        assert_eq!(crops[0].data(), &[img.get(0, 0), img.get(1, 0), img.get(0, 1), img.get(1, 1)]);
        assert!(five_crop(&img, 5).is_err());
    }

    #[test]
    fn five_crop_center_offset_5x5() {
        // (5 - 2) / 2 = 1 in both axes: by hand the center crop covers
        // columns 1..3 and rows 1..3; corners sit at offsets 0 and 3.
        let boxes = five_crop_boxes(5, 5, 2).unwrap();
        assert_eq!(boxes[0], BoundingBox::new(0, 0, 2, 2));
        assert_eq!(boxes[1], BoundingBox::new(3, 0, 5, 2));
        assert_eq!(boxes[2], BoundingBox::new(0, 3, 2, 5));
        assert_eq!(boxes[3], BoundingBox::new(3, 3, 5, 5));
        assert_eq!(boxes[4], BoundingBox::new(1, 1, 3, 3));
        let img = ramp(5, 5);
        let c = &five_crop(&img, 2).unwrap()[4];
        assert_eq!(c.data(), &[img.get(1, 1), img.get(2, 1), img.get(1, 2), img.get(2, 2)]);
    }

    fn arb_image() -> impl Strategy<Value = Image> {
        (1usize..12, 1usize..12).prop_flat_map(|(w, h)| {
            proptest::collection::vec(0.0f32..=1.0, w * h)
                .prop_map(move |d| Image::new(w, h, d).unwrap())
        })
    }

    fn arb_box(w: usize, h: usize) -> impl Strategy<Value = BoundingBox> {
        (0..w, 0..h).prop_flat_map(move |(x0, y0)| {
            (x0 + 1..=w, y0 + 1..=h).prop_map(move |(x1, y1)| BoundingBox::new(x0, y0, x1, y1))
        })
    }

    proptest! {
        #[test]
        fn flip_is_involution(img in arb_image()) {
            prop_assert_eq!(horizontal_flip(&horizontal_flip(&img)), img);
        }

        #[test]
        fn crop_composition(
            (img, outer, inner) in arb_image().prop_flat_map(|img| {
                let (w, h) = (img.width(), img.height());
                (Just(img), arb_box(w, h)).prop_flat_map(|(img, outer)| {
                    let inner = arb_box(outer.width(), outer.height());
                    (Just(img), Just(outer), inner)
                })
            })
        ) {
            let nested = crop(&crop(&img, &outer).unwrap(), &inner).unwrap();
            let direct = crop(&img, &outer.offset_into(&inner)).unwrap();
            prop_assert_eq!(nested, direct);
        }

        #[test]
        fn five_crop_matches_direct_crops(img in arb_image(), frac in 0.0f64..1.0) {
            let size = 1 + ((img.width().min(img.height()) - 1) as f64 * frac) as usize;
            let boxes = five_crop_boxes(img.width(), img.height(), size).unwrap();
            let crops = five_crop(&img, size).unwrap();
            for (b, c) in boxes.iter().zip(crops.iter()) {
                prop_assert_eq!(&crop(&img, b).unwrap(), c);
            }
        }

        #[test]
        fn operators_preserve_invariants(img in arb_image(), angle in -45.0f64..45.0, w in 1usize..20, h in 1usize..20) {
            for out in [resize(&img, w, h).unwrap(), rotate(&img, angle), horizontal_flip(&img)] {
                prop_assert!(Image::new(out.width(), out.height(), out.data().to_vec()).is_ok());
            }
            prop_assert_eq!(rotate(&img, 0.0), img);
        }
    }
}
