use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer pixel coordinate, `x` to the right and `y` down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pos {
    pub x: usize,
    pub y: usize,
}

impl Pos {
    pub const fn new(x: usize, y: usize) -> Self {
        Pos { x, y }
    }

    /// Chebyshev distance (8-neighbourhood steps).
    pub fn chebyshev(self, other: Pos) -> usize {
        self.x.abs_diff(other.x).max(self.y.abs_diff(other.y))
    }

    pub fn is_adjacent8(self, other: Pos) -> bool {
        self != other && self.chebyshev(other) == 1
    }
}

/// Offsets of the 8-neighbourhood in clockwise order starting east
/// (E, SE, S, SW, W, NW, N, NE) with `y` pointing down.
pub(crate) const RING8: [(isize, isize); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

pub(crate) const NEIGH4: [(isize, isize); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::invalid(format!(
            "image dimensions must be positive, got {width}x{height}"
        )));
    }
    if width.checked_mul(height) != Some(len) {
        return Err(Error::invalid(format!(
            "buffer of {len} pixels does not match {width}x{height}"
        )));
    }
    Ok(())
}

/// 8-bit single-channel raster, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(GrayImage {
            width,
            height,
            data,
        })
    }

    /// Image filled with `value`. Panics on zero dimensions.
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        GrayImage {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        GrayImage {
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

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.data[y * self.width + x] = value;
    }

    /// Pixel lookup with edge replication outside the raster.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.data[cy * self.width + cx]
    }

    pub fn min_max(&self) -> (u8, u8) {
        self.data
            .iter()
            .fold((u8::MAX, u8::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Foreground where `pred(value)` holds.
    pub fn mask_where(&self, pred: impl Fn(u8) -> bool) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| pred(v)).collect(),
        }
    }

    /// Copy of a `width`x`height` window starting at `origin`.
    pub fn crop(&self, origin: Pos, width: usize, height: usize) -> Result<GrayImage> {
        if origin.x + width > self.width || origin.y + height > self.height {
            return Err(Error::invalid("crop window exceeds image bounds"));
        }
        Ok(GrayImage::from_fn(width, height, |x, y| {
            self.get(origin.x + x, origin.y + y)
        }))
    }
}

impl fmt::Debug for GrayImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GrayImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

/// Boolean raster; `true` is foreground.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(BinaryMask {
            width,
            height,
            data,
        })
    }

    /// All-background mask. Panics on zero dimensions.
    pub fn empty(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "mask dimensions must be positive");
        BinaryMask {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut mask = BinaryMask::empty(width, height);
        for y in 0..height {
            for x in 0..width {
                mask.data[y * width + x] = f(x, y);
            }
        }
        mask
    }

    /// Mask of the listed positions; positions outside the raster are rejected.
    pub fn from_positions(width: usize, height: usize, positions: &[Pos]) -> Result<Self> {
        let mut mask = BinaryMask::empty(width, height);
        for p in positions {
            if p.x >= width || p.y >= height {
                return Err(Error::invalid(format!("position ({}, {}) out of bounds", p.x, p.y)));
            }
            mask.set(p.x, p.y, true);
        }
        Ok(mask)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn as_raw(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.data[y * self.width + x] = value;
    }

    /// Lookup treating everything outside the raster as background.
    #[inline]
    pub fn get_or_bg(&self, x: isize, y: isize) -> bool {
        if x < 0 || y < 0 || x >= self.width as isize || y >= self.height as isize {
            false
        } else {
            self.data[y as usize * self.width + x as usize]
        }
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&v| v)
    }

    pub fn same_dims(&self, other: &BinaryMask) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Foreground positions in raster order.
    pub fn positions(&self) -> impl Iterator<Item = Pos> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(move |(i, _)| Pos::new(i % self.width, i / self.width))
    }

    fn zip_with(&self, other: &BinaryMask, f: impl Fn(bool, bool) -> bool) -> BinaryMask {
        assert!(self.same_dims(other), "mask dimensions differ");
        BinaryMask {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn union(&self, other: &BinaryMask) -> BinaryMask {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &BinaryMask) -> BinaryMask {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &BinaryMask) -> BinaryMask {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|v| !v).collect(),
        }
    }

    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.same_dims(other) && self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }

    /// Inclusive bounding box `(min, max)` of the foreground.
    pub fn bounding_box(&self) -> Option<(Pos, Pos)> {
        let mut it = self.positions();
        let first = it.next()?;
        let (mut lo, mut hi) = (first, first);
        for p in it {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        Some((lo, hi))
    }

    /// Render as 0/255 grayscale.
    pub fn to_gray(&self, fg: u8, bg: u8) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| if v { fg } else { bg }).collect(),
        }
    }
}

impl fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BinaryMask")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("foreground", &self.count())
            .finish()
    }
}

/// Structuring element with an anchor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Kernel {
    width: usize,
    height: usize,
    origin: Pos,
    data: Vec<bool>,
}

impl Kernel {
    pub fn new(width: usize, height: usize, origin: Pos, data: Vec<bool>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        if origin.x >= width || origin.y >= height {
            return Err(Error::invalid("kernel origin lies outside the kernel"));
        }
        if !data.iter().any(|&v| v) {
            return Err(Error::invalid("kernel has no active element"));
        }
        Ok(Kernel {
            width,
            height,
            origin,
            data,
        })
    }

    /// Solid rectangle anchored at its centre (`(w/2, h/2)`, so a 2x2
    /// kernel is anchored at its lower-right cell).
    pub fn rect(width: usize, height: usize) -> Result<Self> {
        Kernel::rect_with_origin(width, height, Pos::new(width / 2, height / 2))
    }

    pub fn rect_with_origin(width: usize, height: usize, origin: Pos) -> Result<Self> {
        Kernel::new(
            width,
            height,
            origin,
            vec![true; width.saturating_mul(height)],
        )
    }

    /// 3x3 cross (4-neighbourhood plus centre).
    pub fn cross3() -> Self {
        let data = vec![false, true, false, true, true, true, false, true, false];
        Kernel::new(3, 3, Pos::new(1, 1), data).expect("static kernel")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn origin(&self) -> Pos {
        self.origin
    }

    /// Active cells relative to the origin.
    pub fn offsets(&self) -> Vec<(isize, isize)> {
        let mut out = Vec::new();
        for y in 0..self.height {
            for x in 0..self.width {
                if self.data[y * self.width + x] {
                    out.push((
                        x as isize - self.origin.x as isize,
                        y as isize - self.origin.y as isize,
                    ));
                }
            }
        }
        out
    }
}
