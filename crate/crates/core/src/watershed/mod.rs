//! Seeded watershed and chromosome reconstruction from overlaps.

mod flood;
mod gapfill;
mod seeds;
mod separate;

pub use flood::{flooding_surface, watershed, SegmentMap};
pub use gapfill::{baseline_gap_fill, BaselineGapFiller, GapFiller};
pub use seeds::{Method, Seed, SeedRole, SeedSet};
pub use separate::{
    attribute, attribution_accuracy, segment_crop, separate, separate_method1, separate_method2, Provenance, SeparatedChromosome,
    SeparatedMeta,
};
