//! Binary and grayscale morphology.
//!
//! With kernel offsets `d = k - origin`, binary dilation is
//! `out(p) = OR in(p - d)` and binary erosion is `out(p) = AND in(p + d)`
//! (Minkowski sum and difference), with out-of-bounds pixels as background.
//!
//! Grayscale operators take the max/min over the window `{p + d}` for both
//! dilation and erosion, so the gradient is the intensity range inside one
//! window. Edges are replicated.

use serde::{Deserialize, Serialize};

use super::raster::{BinaryMask, GrayImage, Kernel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MorphOp {
    Dilate,
    Erode,
}

pub fn morphology(mask: &BinaryMask, kernel: &Kernel, op: MorphOp) -> BinaryMask {
    let offsets = kernel.offsets();
    BinaryMask::from_fn(mask.width(), mask.height(), |x, y| {
        let (x, y) = (x as isize, y as isize);
        match op {
            MorphOp::Dilate => offsets.iter().any(|&(dx, dy)| mask.get_or_bg(x - dx, y - dy)),
            MorphOp::Erode => offsets.iter().all(|&(dx, dy)| mask.get_or_bg(x + dx, y + dy)),
        }
    })
}

pub fn dilate(mask: &BinaryMask, kernel: &Kernel) -> BinaryMask {
    morphology(mask, kernel, MorphOp::Dilate)
}

pub fn erode(mask: &BinaryMask, kernel: &Kernel) -> BinaryMask {
    morphology(mask, kernel, MorphOp::Erode)
}

/// Erosion followed by dilation.
pub fn open(mask: &BinaryMask, kernel: &Kernel) -> BinaryMask {
    dilate(&erode(mask, kernel), kernel)
}

/// Dilation followed by erosion.
pub fn close(mask: &BinaryMask, kernel: &Kernel) -> BinaryMask {
    erode(&dilate(mask, kernel), kernel)
}

pub fn gray_dilate(img: &GrayImage, kernel: &Kernel) -> GrayImage {
    let offsets = kernel.offsets();
    GrayImage::from_fn(img.width(), img.height(), |x, y| {
        offsets
            .iter()
            .map(|&(dx, dy)| img.get_clamped(x as isize + dx, y as isize + dy))
            .max()
            .unwrap_or(0)
    })
}

pub fn gray_erode(img: &GrayImage, kernel: &Kernel) -> GrayImage {
    let offsets = kernel.offsets();
    GrayImage::from_fn(img.width(), img.height(), |x, y| {
        offsets
            .iter()
            .map(|&(dx, dy)| img.get_clamped(x as isize + dx, y as isize + dy))
            .min()
            .unwrap_or(255)
    })
}

/// Grayscale dilation minus grayscale erosion.
pub fn morphological_gradient(img: &GrayImage, kernel: &Kernel) -> GrayImage {
    let offsets = kernel.offsets();
    GrayImage::from_fn(img.width(), img.height(), |x, y| {
        let (lo, hi) = offsets.iter().fold((u8::MAX, u8::MIN), |(lo, hi), &(dx, dy)| {
            let v = img.get_clamped(x as isize + dx, y as isize + dy);
            (lo.min(v), hi.max(v))
        });
        hi - lo
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgcore::raster::Pos;
    use proptest::prelude::*;

    fn k2x2_at_origin() -> Kernel {
        Kernel::rect_with_origin(2, 2, Pos::new(0, 0)).unwrap()
    }

    #[test]
    fn dilating_nothing_gives_nothing() {
        let m = BinaryMask::empty(5, 5);
        assert!(dilate(&m, &Kernel::cross3()).is_empty());
        assert!(dilate(&m, &k2x2_at_origin()).is_empty());
    }

    #[test]
    fn single_pixel_dilates_to_block() {
        let mut m = BinaryMask::empty(5, 5);
        m.set(1, 1, true);
        let d = dilate(&m, &k2x2_at_origin());
        let expect: Vec<Pos> = vec![Pos::new(1, 1), Pos::new(2, 1), Pos::new(1, 2), Pos::new(2, 2)];
        assert_eq!(d.positions().collect::<Vec<_>>(), expect);
    }

    #[test]
    fn block_erodes_to_fitting_footprints() {
        let m = BinaryMask::from_fn(6, 6, |x, y| (1..4).contains(&x) && (1..4).contains(&y));
        let e = erode(&m, &k2x2_at_origin());
        let expect: Vec<Pos> = vec![Pos::new(1, 1), Pos::new(2, 1), Pos::new(1, 2), Pos::new(2, 2)];
        assert_eq!(e.positions().collect::<Vec<_>>(), expect);
    }

    #[test]
    fn gradient_of_flat_image_is_zero() {
        let img = GrayImage::filled(7, 7, 133);
        let g = morphological_gradient(&img, &Kernel::rect(2, 2).unwrap());
        assert!(g.as_raw().iter().all(|&v| v == 0));
    }

    #[test]
    fn gradient_rings_a_square() {
        // white 4x4 square at (4..8, 4..8) on black; the window of p is
        // {p, left, up, up-left}, so it straddles the edge on [4,8]^2 \ [5,7]^2
        let img = GrayImage::from_fn(12, 12, |x, y| {
            if (4..8).contains(&x) && (4..8).contains(&y) { 255 } else { 0 }
        });
        let g = morphological_gradient(&img, &Kernel::rect(2, 2).unwrap());
        for y in 0..12 {
            for x in 0..12 {
                let near = (4..=8).contains(&x) && (4..=8).contains(&y);
                let deep = (5..=7).contains(&x) && (5..=7).contains(&y);
                let expect = if near && !deep { 255 } else { 0 };
                assert_eq!(g.get(x, y), expect, "pixel ({x},{y})");
            }
        }
    }

    #[test]
    fn gradient_of_dot_is_local() {
        let mut img = GrayImage::filled(9, 9, 0);
        img.set(4, 4, 200);
        let g = morphological_gradient(&img, &Kernel::rect(2, 2).unwrap());
        let nz: Vec<Pos> = g.mask_where(|v| v > 0).positions().collect();
        let expect: Vec<Pos> = vec![Pos::new(4, 4), Pos::new(5, 4), Pos::new(4, 5), Pos::new(5, 5)];
        assert_eq!(nz, expect);
        assert!(g.as_raw().iter().all(|&v| v == 0 || v == 200));
    }

    fn arb_mask() -> impl Strategy<Value = BinaryMask> {
        (1usize..10, 1usize..10).prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<bool>(), w * h)
                .prop_map(move |d| BinaryMask::new(w, h, d).unwrap())
        })
    }

    fn arb_kernel() -> impl Strategy<Value = Kernel> {
        (1usize..4, 1usize..4).prop_flat_map(|(w, h)| {
            (0..w, 0..h, proptest::collection::vec(any::<bool>(), w * h)).prop_map(
                move |(ox, oy, mut d)| {
                    d[oy * w + ox] = true;
                    Kernel::new(w, h, Pos::new(ox, oy), d).unwrap()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn erosion_inside_input_inside_dilation(m in arb_mask(), k in arb_kernel()) {
            prop_assert!(erode(&m, &k).is_subset_of(&m));
            prop_assert!(m.is_subset_of(&dilate(&m, &k)));
        }

        #[test]
        fn gradient_vanishes_only_on_flat(v in any::<u8>(), w in 1usize..8, h in 1usize..8, k in arb_kernel()) {
            let g = morphological_gradient(&GrayImage::filled(w, h, v), &k);
            prop_assert!(g.as_raw().iter().all(|&x| x == 0));
        }
    }
}
