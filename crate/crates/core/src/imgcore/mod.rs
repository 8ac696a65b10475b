//! Raster types and low-level operators.

mod canny;
mod distance;
mod io;
mod median;
mod morphology;
mod otsu;
mod raster;

pub use canny::{canny_edges, gradient, Gradient};
pub use distance::distance_transform;
pub use io::{decode_image, encode_png, encode_png_rgb, load_image, load_mask, save_mask_png, save_png};
pub use median::median_blur;
pub use morphology::{
    close, dilate, erode, gray_dilate, gray_erode, morphological_gradient, morphology, open, MorphOp,
};
pub use otsu::{histogram, otsu_level, otsu_threshold, otsu_threshold_with, Polarity, Threshold};
pub use raster::{BinaryMask, GrayImage, Kernel, Pos};
pub(crate) use raster::{NEIGH4, RING8};
