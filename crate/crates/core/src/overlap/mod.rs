//! Overlap and cluster detection by skeleton branching.

mod skeleton;

pub use skeleton::{crossing_number, detect_intersections, prune_spurs, skeletonize, BranchPoint, Skeleton};

use crate::error::{Error, Result};
use crate::config::PipelineConfig;
use crate::imgcore::{close, distance_transform, open, BinaryMask, Kernel};
use crate::segmentation::{CropKind, CropRecord};

/// One open then one close with the 3x3 cross.
pub fn denoise(mask: &BinaryMask) -> BinaryMask {
    let k = Kernel::cross3();
    close(&open(mask, &k), &k)
}

#[derive(Debug, Clone)]
pub struct CropAnalysis {
    pub skeleton: Skeleton,
    pub branch_points: Vec<BranchPoint>,
}

impl CropAnalysis {
    pub fn kind(&self) -> CropKind {
        if self.branch_points.is_empty() {
            CropKind::Single
        } else {
            CropKind::SuspectMulti
        }
    }
}

/// Denoise, thin, prune spurs shorter than `spur_ratio` times the local
/// half-width, then detect branch points.
pub fn analyze_mask(mask: &BinaryMask, merge_radius: f64, spur_ratio: f64) -> Result<CropAnalysis> {
    if mask.is_empty() {
        return Err(Error::invalid("crop mask is empty"));
    }
    if !(merge_radius >= 0.0) || !(spur_ratio >= 0.0) {
        return Err(Error::invalid("merge_radius and spur_ratio must be >= 0"));
    }
    let clean = denoise(mask);
    let skeleton = prune_spurs(&skeletonize(&clean), &distance_transform(&clean), spur_ratio);
    let branch_points = detect_intersections(&skeleton, merge_radius);
    Ok(CropAnalysis {
        skeleton,
        branch_points,
    })
}

/// Sets `crop.kind` to suspect-multi iff its denoised skeleton branches.
pub fn classify_crop(crop: &mut CropRecord, config: &PipelineConfig) -> Result<CropKind> {
    let mut analysis = analyze_mask(&crop.mask, config.merge_radius, config.spur_ratio)?;
    analysis.skeleton.source_id = Some(crop.id.clone());
    crop.kind = analysis.kind();
    Ok(crop.kind)
}
