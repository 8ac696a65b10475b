//! PNG/TIFF decode and PNG encode.
//!
//! Colour inputs are reduced to luminance with the Rec. 709 weights
//! `0.2126 R + 0.7152 G + 0.0722 B`; alpha is dropped.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageFormat};

use super::raster::{BinaryMask, GrayImage};
use crate::error::{Error, Result};

fn from_dynamic(img: DynamicImage) -> Result<GrayImage> {
    let luma = img.to_luma8();
    let (w, h) = luma.dimensions();
    GrayImage::new(w as usize, h as usize, luma.into_raw())
}

pub fn decode_image(bytes: &[u8]) -> Result<GrayImage> {
    let img = image::load_from_memory(bytes).map_err(|e| Error::Decode(e.to_string()))?;
    from_dynamic(img)
}

pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let bytes = std::fs::read(path)?;
    decode_image(&bytes)
}

pub fn encode_png(img: &GrayImage) -> Result<Vec<u8>> {
    let buf = image::GrayImage::from_raw(img.width() as u32, img.height() as u32, img.as_raw().to_vec())
        .ok_or_else(|| Error::Encode("buffer size mismatch".into()))?;
    let mut out = Cursor::new(Vec::new());
    DynamicImage::ImageLuma8(buf)
        .write_to(&mut out, ImageFormat::Png)
        .map_err(|e| Error::Encode(e.to_string()))?;
    Ok(out.into_inner())
}

/// Grayscale replicated into three channels, for exports that expect RGB.
pub fn encode_png_rgb(img: &GrayImage) -> Result<Vec<u8>> {
    let rgb: Vec<u8> = img.as_raw().iter().flat_map(|&v| [v, v, v]).collect();
    let buf = image::RgbImage::from_raw(img.width() as u32, img.height() as u32, rgb)
        .ok_or_else(|| Error::Encode("buffer size mismatch".into()))?;
    let mut out = Cursor::new(Vec::new());
    DynamicImage::ImageRgb8(buf)
        .write_to(&mut out, ImageFormat::Png)
        .map_err(|e| Error::Encode(e.to_string()))?;
    Ok(out.into_inner())
}

pub fn save_png(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode_png(img)?)?;
    Ok(())
}

pub fn save_mask_png(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    save_png(&mask.to_gray(255, 0), path)
}

/// Mask from a 0/255 PNG; any nonzero pixel is foreground.
pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    Ok(load_image(path)?.mask_where(|v| v > 0))
}
