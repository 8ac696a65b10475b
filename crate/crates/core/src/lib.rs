//! Metaphase-to-karyogram chromosome image pipeline.
//!
//! Raster operators in [`imgcore`], object extraction in [`segmentation`],
//! branch-point analysis in [`overlap`], seeded separation in [`watershed`],
//! class assignment in [`classify`] and a ground-truth generator in [`synth`].

pub mod classify;
pub mod config;
pub mod error;
pub mod geometry;
pub mod imgcore;
pub mod overlap;
pub mod segmentation;
pub mod synth;
pub mod watershed;

pub use config::{CannyConfig, PipelineConfig};
pub use error::{Error, Result};
pub use imgcore::{BinaryMask, GrayImage, Kernel, Pos};
pub use segmentation::{CropKind, CropRecord, Contour};

pub type Point2 = geometry::Point2<f64>;
pub type RotatedRect = geometry::RotatedRect<f64>;
pub type ScoreMatrix = classify::ScoreMatrix<f64>;
