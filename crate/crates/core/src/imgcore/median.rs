use super::raster::GrayImage;
use crate::error::{Error, Result};

/// Median filter over a `window`x`window` neighbourhood with edge replication.
///
/// `window` must be odd, at least 3, and no larger than the smaller image side.
pub fn median_blur(img: &GrayImage, window: usize) -> Result<GrayImage> {
    if window < 3 || window.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "median window must be odd and >= 3, got {window}"
        )));
    }
    if window > img.width().min(img.height()) {
        return Err(Error::invalid(format!(
            "median window {window} exceeds image size {}x{}",
            img.width(),
            img.height()
        )));
    }
    let r = (window / 2) as isize;
    let mid = window * window / 2;
    let mut buf = Vec::with_capacity(window * window);
    Ok(GrayImage::from_fn(img.width(), img.height(), |x, y| {
        buf.clear();
        for dy in -r..=r {
            for dx in -r..=r {
                buf.push(img.get_clamped(x as isize + dx, y as isize + dy));
            }
        }
        *buf.select_nth_unstable(mid).1
    }))
}
