//! Object extraction from a metaphase image.

mod contours;
mod extract;

pub use contours::{filter_contours, find_contours, label_components, ComponentLabels, Connectivity, Contour};
pub use extract::{extract_objects, mask_rect, min_area_rect, CropKind, CropMeta, CropRecord};
