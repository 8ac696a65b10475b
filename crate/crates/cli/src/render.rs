use std::io::Cursor;

use image::{ImageFormat, Rgb, RgbImage};
use karyoseg::classify::AssignmentSource;
use karyoseg::imgcore::encode_png;
use karyoseg::overlap::CropAnalysis;
use karyoseg::GrayImage;

use crate::error::{ServiceError, ServiceResult};
use crate::store::{Karyogram, Session};

const PAD: usize = 6;

fn png_rgb(img: &RgbImage) -> ServiceResult<Vec<u8>> {
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| ServiceError::from(karyoseg::Error::Encode(e.to_string())))?;
    Ok(out.into_inner())
}

pub fn skeleton_overlay(gray: &GrayImage, analysis: &CropAnalysis) -> ServiceResult<Vec<u8>> {
    let (w, h) = (gray.width(), gray.height());
    let mut img = RgbImage::from_fn(w as u32, h as u32, |x, y| {
        let v = gray.get(x as usize, y as usize);
        Rgb([v, v, v])
    });
    for p in analysis.skeleton.mask.positions() {
        img.put_pixel(p.x as u32, p.y as u32, Rgb([220, 30, 30]));
    }
    for b in &analysis.branch_points {
        let (cx, cy) = (b.position.x as i64, b.position.y as i64);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (x, y) = (cx + dx, cy + dy);
                if x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h {
                    img.put_pixel(x as u32, y as u32, Rgb([20, 200, 40]));
                }
            }
        }
    }
    png_rgb(&img)
}

/// One row per class, cells sized to the largest item; redistributed items
/// get a black frame.
pub fn karyogram_png(session: &Session, k: &Karyogram) -> ServiceResult<Vec<u8>> {
    let items = session.items();
    let mut rows: Vec<Vec<(GrayImage, bool)>> = Vec::with_capacity(k.rows.len());
    let (mut cw, mut ch) = (1, 1);
    for row in &k.rows {
        let mut cells = Vec::new();
        for it in &row.items {
            let item = items
                .iter()
                .find(|i| i.id == it.id)
                .ok_or_else(|| ServiceError::conflict(format!("assignment names unknown item `{}`", it.id)))?;
            let img = session.item_image(item)?;
            cw = cw.max(img.width());
            ch = ch.max(img.height());
            cells.push((img, it.provenance == AssignmentSource::Redistributed));
        }
        rows.push(cells);
    }
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0).max(2);
    let (cell_w, cell_h) = (cw + 2 * PAD, ch + 2 * PAD);
    let mut canvas = GrayImage::filled(cols * cell_w, rows.len().max(1) * cell_h, 255);
    for (r, cells) in rows.iter().enumerate() {
        for (c, (img, flagged)) in cells.iter().enumerate() {
            let (x0, y0) = (c * cell_w, r * cell_h);
            let (ox, oy) = (x0 + (cell_w - img.width()) / 2, y0 + (cell_h - img.height()) / 2);
            for y in 0..img.height() {
                for x in 0..img.width() {
                    canvas.set(ox + x, oy + y, img.get(x, y));
                }
            }
            if *flagged {
                for x in x0 + 1..x0 + cell_w - 1 {
                    canvas.set(x, y0 + 1, 0);
                    canvas.set(x, y0 + cell_h - 2, 0);
                }
                for y in y0 + 1..y0 + cell_h - 1 {
                    canvas.set(x0 + 1, y, 0);
                    canvas.set(x0 + cell_w - 2, y, 0);
                }
            }
        }
    }
    Ok(encode_png(&canvas)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use karyoseg::overlap::analyze_mask;
    use karyoseg::BinaryMask;

    #[test]
    fn overlay_marks_skeleton_and_branches() {
        let mask = BinaryMask::from_fn(41, 41, |x, y| (18..=22).contains(&x) || (18..=22).contains(&y));
        let analysis = analyze_mask(&mask, 3.0, 1.5).unwrap();
        assert!(!analysis.branch_points.is_empty());
        let gray = mask.to_gray(60, 255);
        let png = skeleton_overlay(&gray, &analysis).unwrap();
        let img = image::load_from_memory(&png).unwrap().to_rgb8();
        assert_eq!(img.dimensions(), (41, 41));
        let b = analysis.branch_points[0].position;
        assert_eq!(img.get_pixel(b.x as u32, b.y as u32).0, [20, 200, 40]);
        let red = img.pixels().filter(|p| p.0 == [220, 30, 30]).count();
        assert!(red > 0 && red < analysis.skeleton.mask.count());
        assert_eq!(img.get_pixel(0, 0).0, [255, 255, 255]);
    }
}
