use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::imgcore::{BinaryMask, GrayImage, RING8};

/// Reconstructs occluded pixels of a chromosome. Implementations must leave
/// pixels outside `gap_mask` untouched and return `image` unchanged when
/// the gap is empty.
pub trait GapFiller {
    fn fill(&self, image: &GrayImage, object_mask: &BinaryMask, gap_mask: &BinaryMask) -> Result<GrayImage>;
}

/// Inverse-distance interpolation along the object's principal axis.
#[derive(Debug, Clone, Copy, Default)]
pub struct BaselineGapFiller;

impl GapFiller for BaselineGapFiller {
    fn fill(&self, image: &GrayImage, object_mask: &BinaryMask, gap_mask: &BinaryMask) -> Result<GrayImage> {
        baseline_gap_fill(image, object_mask, gap_mask)
    }
}

fn principal_axis(mask: &BinaryMask) -> (f64, f64) {
    let n = mask.count() as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for p in mask.positions() {
        sx += p.x as f64;
        sy += p.y as f64;
    }
    let (mx, my) = (sx / n, sy / n);
    let (mut cxx, mut cyy, mut cxy) = (0.0, 0.0, 0.0);
    for p in mask.positions() {
        let (dx, dy) = (p.x as f64 - mx, p.y as f64 - my);
        cxx += dx * dx;
        cyy += dy * dy;
        cxy += dx * dy;
    }
    let theta = 0.5 * (2.0 * cxy).atan2(cxx - cyy);
    (theta.cos(), theta.sin())
}

/// Fills every gap pixel from the first object pixels met walking both ways
/// along the principal axis of `object_mask ∪ gap_mask`, weighted by inverse
/// distance. A pixel whose walks both leave the object takes the value of
/// the nearest object pixel reachable through the gap.
pub fn baseline_gap_fill(image: &GrayImage, object_mask: &BinaryMask, gap_mask: &BinaryMask) -> Result<GrayImage> {
    let (w, h) = (image.width(), image.height());
    if object_mask.width() != w || object_mask.height() != h || !object_mask.same_dims(gap_mask) {
        return Err(Error::invalid("image, object mask and gap mask must share dimensions"));
    }
    let source = object_mask.difference(gap_mask);
    if gap_mask.is_empty() {
        return Ok(image.clone());
    }

    // nearest source value through the gap, by breadth-first search
    let mut nearest: Vec<Option<u8>> = vec![None; w * h];
    let mut queue = VecDeque::new();
    for p in source.positions() {
        nearest[p.y * w + p.x] = Some(image.get(p.x, p.y));
        queue.push_back(p);
    }
    while let Some(p) = queue.pop_front() {
        let v = nearest[p.y * w + p.x];
        for (dx, dy) in RING8 {
            let (nx, ny) = (p.x as isize + dx, p.y as isize + dy);
            if gap_mask.get_or_bg(nx, ny) {
                let i = ny as usize * w + nx as usize;
                if nearest[i].is_none() {
                    nearest[i] = v;
                    queue.push_back(crate::imgcore::Pos::new(nx as usize, ny as usize));
                }
            }
        }
    }
    if gap_mask.positions().any(|p| nearest[p.y * w + p.x].is_none()) {
        return Err(Error::UnfillableGap);
    }

    let (ux, uy) = principal_axis(&object_mask.union(gap_mask));
    let limit = (w + h) as isize;
    let walk = |x: usize, y: usize, sign: f64| -> Option<(f64, f64)> {
        for t in 1..limit {
            let qx = (x as f64 + sign * t as f64 * ux).round() as isize;
            let qy = (y as f64 + sign * t as f64 * uy).round() as isize;
            if source.get_or_bg(qx, qy) {
                return Some((image.get(qx as usize, qy as usize) as f64, t as f64));
            }
            if !gap_mask.get_or_bg(qx, qy) {
                return None;
            }
        }
        None
    };
    let mut out = image.clone();
    for p in gap_mask.positions() {
        let v = match (walk(p.x, p.y, 1.0), walk(p.x, p.y, -1.0)) {
            (Some((a, da)), Some((b, db))) => (a / da + b / db) / (1.0 / da + 1.0 / db),
            (Some((a, _)), None) | (None, Some((a, _))) => a,
            (None, None) => nearest[p.y * w + p.x].unwrap() as f64,
        };
        out.set(p.x, p.y, v.round().clamp(0.0, 255.0) as u8);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bar(w: usize, h: usize) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| (2..w - 2).contains(&x) && (3..h - 3).contains(&y))
    }

    #[test]
    fn empty_gap_is_noop() {
        let img = GrayImage::from_fn(20, 10, |x, y| (x * 7 + y) as u8);
        let out = baseline_gap_fill(&img, &bar(20, 10), &BinaryMask::empty(20, 10)).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn constant_bar_fills_exactly() {
        let obj = bar(30, 11);
        let gap = BinaryMask::from_fn(30, 11, |x, y| obj.get(x, y) && (14..17).contains(&x));
        let img = GrayImage::from_fn(30, 11, |x, y| if gap.get(x, y) { 255 } else if obj.get(x, y) { 80 } else { 255 });
        let out = baseline_gap_fill(&img, &obj.difference(&gap), &gap).unwrap();
        for p in gap.positions() {
            assert_eq!(out.get(p.x, p.y), 80);
        }
        for y in 0..11 {
            for x in 0..30 {
                if !gap.get(x, y) {
                    assert_eq!(out.get(x, y), img.get(x, y));
                }
            }
        }
    }

    #[test]
    fn ramp_fill_is_monotone() {
        let obj = bar(44, 11);
        let ramp = |x: usize| (40.0 + 80.0 * (x as f64 - 2.0) / 39.0).round() as u8;
        let gap = BinaryMask::from_fn(44, 11, |x, y| obj.get(x, y) && (19..25).contains(&x));
        let img = GrayImage::from_fn(44, 11, |x, y| if obj.get(x, y) && !gap.get(x, y) { ramp(x) } else { 255 });
        let out = baseline_gap_fill(&img, &obj.difference(&gap), &gap).unwrap();
        for y in 3..8 {
            let row: Vec<u8> = (18..26).map(|x| out.get(x, y)).collect();
            assert!(row.windows(2).all(|p| p[0] <= p[1]), "{row:?}");
            assert!(row[1] >= ramp(18) && row[6] <= ramp(25));
        }
    }

    #[test]
    fn isolated_gap_is_unfillable() {
        let obj = BinaryMask::from_fn(20, 20, |x, y| x < 5 && y < 5);
        let gap = BinaryMask::from_fn(20, 20, |x, y| x > 12 && y > 12);
        let img = GrayImage::filled(20, 20, 90);
        assert!(matches!(baseline_gap_fill(&img, &obj, &gap), Err(Error::UnfillableGap)));
    }
}
