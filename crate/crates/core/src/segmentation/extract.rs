use serde::{Deserialize, Serialize};

use super::contours::{label_components, trace_regions, Connectivity, Contour};
use crate::config::PipelineConfig;
use crate::error::Result;
use crate::geometry::{self, Point2, RotatedRect};
use crate::imgcore::{
    median_blur, morphological_gradient, otsu_threshold_with, BinaryMask, GrayImage, Pos, NEIGH4,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CropKind {
    Single,
    SuspectMulti,
    #[default]
    Unknown,
}

/// One extracted object: intensities on a white background plus its mask.
#[derive(Debug, Clone, PartialEq)]
pub struct CropRecord {
    pub id: String,
    pub image: GrayImage,
    pub mask: BinaryMask,
    /// Crop origin in metaphase coordinates.
    pub offset: Pos,
    /// Minimum-area rectangle in metaphase coordinates (pixel-edge units).
    pub bbox: RotatedRect<f64>,
    pub kind: CropKind,
}

/// Serialisable sidecar for a crop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CropMeta {
    pub id: String,
    pub offset: Pos,
    pub width: usize,
    pub height: usize,
    pub area: usize,
    pub bbox: RotatedRect<f64>,
    pub kind: CropKind,
}

impl CropRecord {
    pub fn meta(&self) -> CropMeta {
        CropMeta {
            id: self.id.clone(),
            offset: self.offset,
            width: self.image.width(),
            height: self.image.height(),
            area: self.mask.count(),
            bbox: self.bbox,
            kind: self.kind,
        }
    }

    /// Crop from an image and mask; pixels outside the mask are whitened.
    pub fn from_parts(id: impl Into<String>, image: &GrayImage, mask: BinaryMask, offset: Pos) -> Self {
        let image = GrayImage::from_fn(image.width(), image.height(), |x, y| {
            if mask.get(x, y) { image.get(x, y) } else { 255 }
        });
        let bbox = mask_rect(&mask, offset).unwrap_or(RotatedRect {
            center: Point2::new(offset.x as f64, offset.y as f64),
            width: 1.0,
            height: 1.0,
            angle: 0.0,
        });
        CropRecord {
            id: id.into(),
            image,
            mask,
            offset,
            bbox,
            kind: CropKind::Unknown,
        }
    }
}

fn pixel_corners(points: impl IntoIterator<Item = Pos>) -> Vec<Point2<f64>> {
    points
        .into_iter()
        .flat_map(|p| {
            let (x, y) = (p.x as f64, p.y as f64);
            [
                Point2::new(x, y),
                Point2::new(x + 1.0, y),
                Point2::new(x, y + 1.0),
                Point2::new(x + 1.0, y + 1.0),
            ]
        })
        .collect()
}

/// Minimum-area rectangle covering the contour's pixels.
///
/// Pixel `(x, y)` is the unit square `[x, x+1] x [y, y+1]`, so a filled
/// `w`x`h` block gives a `w`x`h` rectangle and collinear pixels a
/// `span`x`1` one.
pub fn min_area_rect(contour: &Contour) -> RotatedRect<f64> {
    geometry::min_area_rect(&pixel_corners(contour.points.iter().copied()))
        .expect("contours are never empty")
}

/// Minimum-area rectangle of a mask's boundary pixels, shifted by `offset`.
pub fn mask_rect(mask: &BinaryMask, offset: Pos) -> Option<RotatedRect<f64>> {
    let boundary = mask.positions().filter(|p| {
        NEIGH4
            .iter()
            .any(|&(dx, dy)| !mask.get_or_bg(p.x as isize + dx, p.y as isize + dy))
    });
    let shifted = boundary.map(|p| Pos::new(p.x + offset.x, p.y + offset.y));
    geometry::min_area_rect(&pixel_corners(shifted))
}

/// Objects of a metaphase image.
///
/// median blur, Otsu binarisation, morphological gradient of the binary image,
/// contours of the gradient ring, area filter, then one crop per surviving
/// contour holding every foreground component inside it. Crops are numbered
/// `crop_000`, `crop_001`, ... in contour order.
pub fn extract_objects(metaphase: &GrayImage, config: &PipelineConfig) -> Result<Vec<CropRecord>> {
    config.validate()?;
    let blurred = median_blur(metaphase, config.median_window)?;
    let foreground = otsu_threshold_with(&blurred, config.polarity)?.mask;
    let ring = morphological_gradient(&foreground.to_gray(255, 0), &config.gradient_kernel()?)
        .mask_where(|v| v > 0);

    let components = label_components(&foreground, Connectivity::Eight);
    let mut claimed = vec![false; components.count() + 1];
    claimed[0] = true;
    let (w, h) = (metaphase.width(), metaphase.height());
    let mut extent = vec![(Pos::new(usize::MAX, usize::MAX), Pos::new(0, 0)); components.count() + 1];
    for (i, &l) in components.as_raw().iter().enumerate() {
        let (lo, hi) = &mut extent[l as usize];
        let (x, y) = (i % w, i / w);
        lo.x = lo.x.min(x);
        lo.y = lo.y.min(y);
        hi.x = hi.x.max(x);
        hi.y = hi.y.max(y);
    }

    let mut crops = Vec::new();
    for region in trace_regions(&ring) {
        if region.contour.area < config.min_area {
            continue;
        }
        let mut members = Vec::new();
        for p in region.filled_positions() {
            let l = components.label(p.x, p.y) as usize;
            if !claimed[l] {
                claimed[l] = true;
                members.push(l as u32);
            }
        }
        if members.is_empty() {
            continue;
        }
        let (mut lo, mut hi) = extent[members[0] as usize];
        for &l in &members[1..] {
            let (a, b) = extent[l as usize];
            lo = Pos::new(lo.x.min(a.x), lo.y.min(a.y));
            hi = Pos::new(hi.x.max(b.x), hi.y.max(b.y));
        }
        let m = config.crop_margin;
        let origin = Pos::new(lo.x.saturating_sub(m), lo.y.saturating_sub(m));
        let end = Pos::new((hi.x + m).min(w - 1), (hi.y + m).min(h - 1));
        let (cw, ch) = (end.x - origin.x + 1, end.y - origin.y + 1);
        let mask = BinaryMask::from_fn(cw, ch, |x, y| {
            let l = components.label(origin.x + x, origin.y + y);
            l != 0 && members.contains(&l)
        });
        let window = metaphase.crop(origin, cw, ch)?;
        let id = format!("crop_{:03}", crops.len());
        crops.push(CropRecord::from_parts(id, &window, mask, origin));
    }
    Ok(crops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn ellipse(img: &mut GrayImage, cx: f64, cy: f64, a: f64, b: f64, v: u8) {
        for y in 0..img.height() {
            for x in 0..img.width() {
                let (dx, dy) = ((x as f64 - cx) / a, (y as f64 - cy) / b);
                if dx * dx + dy * dy <= 1.0 {
                    img.set(x, y, v);
                }
            }
        }
    }

    #[test]
    fn filled_block_rect() {
        let mask = BinaryMask::from_fn(20, 10, |x, y| (2..12).contains(&x) && (3..7).contains(&y));
        let c = &super::super::find_contours(&mask)[0];
        let r = min_area_rect(c);
        assert!((r.area() - 40.0).abs() < 1e-9);
        assert!(r.angle.abs() < 1e-9);
        assert!((r.width - 10.0).abs() < 1e-9);
    }

    #[test]
    fn collinear_pixels_rect() {
        let c = Contour { points: vec![Pos::new(0, 0), Pos::new(1, 0), Pos::new(2, 0)], area: 3 };
        let r = min_area_rect(&c);
        assert!((r.width - 3.0).abs() < 1e-9 && (r.height - 1.0).abs() < 1e-9);
    }

    #[test]
    fn blank_image_is_degenerate() {
        let img = GrayImage::filled(40, 40, 255);
        let err = extract_objects(&img, &PipelineConfig::default()).unwrap_err();
        assert!(matches!(err, Error::DegenerateHistogram));
    }

    #[test]
    fn separate_and_merged_blobs() {
        let mut img = GrayImage::filled(120, 80, 255);
        ellipse(&mut img, 25.0, 40.0, 15.0, 8.0, 100);
        ellipse(&mut img, 80.0, 30.0, 20.0, 6.0, 110);
        ellipse(&mut img, 85.0, 38.0, 6.0, 20.0, 110);
        let crops = extract_objects(&img, &PipelineConfig::default()).unwrap();
        assert_eq!(crops.len(), 2);
        for c in &crops {
            assert_eq!(c.kind, CropKind::Unknown);
            let dark = c.mask.positions().filter(|p| c.image.get(p.x, p.y) < 200).count();
            assert!(dark as f64 >= 0.98 * c.mask.count() as f64);
            assert!(c.image.as_raw().iter().filter(|&&v| v == 255).count() > 0);
        }
    }

    #[test]
    fn tiny_specks_are_filtered() {
        let mut img = GrayImage::filled(60, 60, 255);
        ellipse(&mut img, 20.0, 20.0, 10.0, 6.0, 90);
        ellipse(&mut img, 45.0, 45.0, 2.0, 2.0, 90);
        let crops = extract_objects(&img, &PipelineConfig::default()).unwrap();
        assert_eq!(crops.len(), 1);
        let keep_all = PipelineConfig { min_area: 0, ..Default::default() };
        assert_eq!(extract_objects(&img, &keep_all).unwrap().len(), 2);
    }
}
