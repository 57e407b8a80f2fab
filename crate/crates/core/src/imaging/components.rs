//! Connected-component labelling and the lung crop box rule.

use super::{BoundingBox, Mask};
use crate::error::{Error, Result};

/// A 4-connected set of `true` mask pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    /// Row-major pixel indices, ascending.
    pub pixels: Vec<usize>,
    /// Tight box inclusive-exclusive.
    pub bbox: BoundingBox,
}

impl Region {
    pub fn area(&self) -> usize {
        self.pixels.len()
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        // keep the smaller index as root so labels are deterministic
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi] = lo;
    }
}

/// Two-pass union-find labelling with 4-connectivity.
///
/// Regions come back sorted by area, largest first; equal areas are ordered
/// by their first pixel in raster order.
pub fn connected_components(mask: &Mask) -> Vec<Region> {
    let (w, h) = (mask.width(), mask.height());
    let data = mask.data();
    let mut parent: Vec<usize> = (0..data.len()).collect();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !data[i] {
                continue;
            }
            if x > 0 && data[i - 1] {
                union(&mut parent, i, i - 1);
            }
            if y > 0 && data[i - w] {
                union(&mut parent, i, i - w);
            }
        }
    }

    let mut slot_of_root = vec![usize::MAX; data.len()];
    let mut regions: Vec<Region> = Vec::new();
    for i in 0..data.len() {
        if !data[i] {
            continue;
        }
        let root = find(&mut parent, i);
        let (x, y) = (i % w, i / w);
        if slot_of_root[root] == usize::MAX {
            slot_of_root[root] = regions.len();
            regions.push(Region {
                pixels: Vec::new(),
                bbox: BoundingBox::new(x, y, x + 1, y + 1),
            });
        }
        let r = &mut regions[slot_of_root[root]];
        r.pixels.push(i);
        r.bbox.x0 = r.bbox.x0.min(x);
        r.bbox.y0 = r.bbox.y0.min(y);
        r.bbox.x1 = r.bbox.x1.max(x + 1);
        r.bbox.y1 = r.bbox.y1.max(y + 1);
    }
    // stable sort keeps raster order of first pixels among equal areas
    regions.sort_by(|a, b| b.area().cmp(&a.area()));
    regions
}

/// Tight box around the two largest regions (or the only one), grown by
/// `border` pixels on every side and clamped to the mask.
///
/// An empty mask is a segmentation failure; callers fall back to the full
/// image.
pub fn lung_bounding_box(mask: &Mask, border: usize) -> Result<BoundingBox> {
    let regions = connected_components(mask);
    if regions.is_empty() {
        return Err(Error::SegmentationFailed(
            "mask has no foreground regions".into(),
        ));
    }
    let tight = regions
        .iter()
        .take(2)
        .map(|r| r.bbox)
        .reduce(|a, b| BoundingBox {
            x0: a.x0.min(b.x0),
            y0: a.y0.min(b.y0),
            x1: a.x1.max(b.x1),
            y1: a.y1.max(b.y1),
        })
        .expect("non-empty");
    Ok(BoundingBox {
        x0: tight.x0.saturating_sub(border),
        y0: tight.y0.saturating_sub(border),
        x1: (tight.x1 + border).min(mask.width()),
        y1: (tight.y1 + border).min(mask.height()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::VecDeque;

    fn rect(mask: &mut [bool], w: usize, x0: usize, y0: usize, x1: usize, y1: usize) {
        for y in y0..y1 {
            for x in x0..x1 {
                mask[y * w + x] = true;
            }
        }
    }

    /// Independent BFS flood fill returning each component as a sorted pixel list.
    fn flood_fill_oracle(mask: &Mask) -> Vec<Vec<usize>> {
        let (w, h) = (mask.width(), mask.height());
        let mut seen = vec![false; w * h];
        let mut out = Vec::new();
        for start in 0..w * h {
            if !mask.data()[start] || seen[start] {
                continue;
            }
            let mut comp = Vec::new();
            let mut queue = VecDeque::from([start]);
            seen[start] = true;
            while let Some(i) = queue.pop_front() {
                comp.push(i);
                let (x, y) = ((i % w) as i64, (i / w) as i64);
                for (nx, ny) in [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)] {
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if mask.data()[j] && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out.sort();
        out
    }

    #[test]
    fn empty_mask_has_no_regions() {
        let m = Mask::from_fn(5, 4, |_, _| false);
        assert!(connected_components(&m).is_empty());
        assert!(matches!(
            lung_bounding_box(&m, 100),
            Err(Error::SegmentationFailed(_))
        ));
    }

    #[test]
    fn two_blocks() {
        let mut d = vec![false; 10 * 10];
        rect(&mut d, 10, 0, 0, 3, 3);
        rect(&mut d, 10, 5, 5, 8, 8);
        let m = Mask::new(10, 10, d).unwrap();
        let regions = connected_components(&m);
        assert_eq!(regions.len(), 2);
        assert!(regions.iter().all(|r| r.area() == 9));
    }

    #[test]
    fn diagonal_pixels_are_separate() {
        let m = Mask::new(2, 2, vec![true, false, false, true]).unwrap();
        assert_eq!(connected_components(&m).len(), 2);
    }

    #[test]
    fn single_full_region_saturates_to_full_box() {
        let m = Mask::from_fn(20, 10, |_, _| true);
        assert_eq!(lung_bounding_box(&m, 100).unwrap(), BoundingBox::new(0, 0, 20, 10));
    }

    #[test]
    fn two_blobs_with_border_clamped() {
        let w = 512;
        let mut d = vec![false; w * w];
        rect(&mut d, w, 150, 100, 250, 450);
        rect(&mut d, w, 300, 120, 400, 430);
        let m = Mask::new(w, w, d).unwrap();
        assert_eq!(lung_bounding_box(&m, 100).unwrap(), BoundingBox::new(50, 0, 500, 512));
    }

    #[test]
    fn smallest_of_three_regions_is_ignored() {
        // areas: A 6x8 = 48, B 5x5 = 25, C 2x2 = 4
        let (w, h) = (40, 30);
        let mut d = vec![false; w * h];
        rect(&mut d, w, 10, 5, 16, 13); // A
        rect(&mut d, w, 20, 10, 25, 15); // B
        rect(&mut d, w, 35, 25, 37, 27); // C, far corner
        let m = Mask::new(w, h, d).unwrap();
        // union of A and B: x 10..25, y 5..15; border 3 -> 7..28, 2..18
        assert_eq!(lung_bounding_box(&m, 3).unwrap(), BoundingBox::new(7, 2, 28, 18));
        assert_eq!(lung_bounding_box(&m, 0).unwrap(), BoundingBox::new(10, 5, 25, 15));
    }

    fn arb_mask() -> impl Strategy<Value = Mask> {
        proptest::collection::vec(proptest::bool::weighted(0.45), 16 * 16)
            .prop_map(|d| Mask::new(16, 16, d).unwrap())
    }

    proptest! {
        #[test]
        fn matches_flood_fill(mask in arb_mask()) {
            let regions = connected_components(&mask);
            let mut got: Vec<Vec<usize>> = regions.iter().map(|r| r.pixels.clone()).collect();
            got.sort();
            prop_assert_eq!(got, flood_fill_oracle(&mask));
            for pair in regions.windows(2) {
                prop_assert!(pair[0].area() >= pair[1].area());
            }
            let total: usize = regions.iter().map(Region::area).sum();
            prop_assert_eq!(total, mask.count());
        }

        #[test]
        fn border_monotone(mask in arb_mask(), b1 in 0usize..10, extra in 0usize..10) {
            prop_assume!(mask.count() > 0);
            let small = lung_bounding_box(&mask, b1).unwrap();
            let large = lung_bounding_box(&mask, b1 + extra).unwrap();
            prop_assert!(large.contains(&small));
            prop_assert!(small.validate(16, 16).is_ok());
        }
    }
}
