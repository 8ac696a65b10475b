#![allow(dead_code)]

use std::path::Path;

use karyoseg::classify::{ScoreRow, ScoresFile};
use karyoseg::imgcore::{encode_png, load_mask};
use karyoseg::synth::{generate, GroundTruth, SynthSpec};
use karyoseg::watershed::{Method, SeedSet};
use karyoseg::{BinaryMask, CropKind, Pos};
use karyoseg_service::store::Item;
use karyoseg_service::Session;

pub fn synth(spec: &SynthSpec) -> (GroundTruth, Vec<u8>) {
    let gt = generate(spec).unwrap();
    let png = encode_png(&gt.metaphase).unwrap();
    (gt, png)
}

/// Item mask and its origin in metaphase coordinates.
pub fn item_mask(s: &Session, item: &Item) -> (BinaryMask, Pos) {
    let entry = s.info.crops.iter().find(|c| c.id == item.parent).unwrap();
    let sub = if item.separated { "separated" } else { "crops" };
    let mask = load_mask(s.dir().join(sub).join(format!("{}_mask.png", item.id))).unwrap();
    (mask, entry.offset)
}

/// Class of the truth object covering most of the item.
pub fn true_class(gt: &GroundTruth, s: &Session, item: &Item) -> u32 {
    let (mask, origin) = item_mask(s, item);
    gt.objects
        .iter()
        .max_by_key(|o| o.window_mask(origin, mask.width(), mask.height()).intersection(&mask).count())
        .unwrap()
        .class
}

/// Scores peaked on each item's true class; items listed in `swap` get
/// their peak on the next class instead, with the true class second.
pub fn constructed_scores(gt: &GroundTruth, s: &Session, classes: usize, swap: &[usize]) -> ScoresFile {
    let rows = s
        .items()
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let t = true_class(gt, s, item) as usize - 1;
            let mut scores: Vec<f64> = (0..classes).map(|k| 0.01 + 0.001 * ((i + k) % 7) as f64).collect();
            scores[t] = 0.8;
            if swap.contains(&i) {
                scores[(t + 1) % classes] = 0.85;
            }
            ScoreRow { id: item.id.clone(), scores }
        })
        .collect();
    ScoresFile { classes, rows }
}

pub fn suspect_crop(s: &Session) -> String {
    let suspects: Vec<_> = s.info.crops.iter().filter(|c| c.kind == CropKind::SuspectMulti).collect();
    assert_eq!(suspects.len(), 1, "expected exactly one suspect crop");
    suspects[0].id.clone()
}

pub fn crossing_seeds(gt: &GroundTruth, s: &Session, cid: &str, method: Method) -> SeedSet {
    let entry = s.info.crops.iter().find(|c| c.id == cid).unwrap();
    gt.overlap_seeds(&gt.crossings[0], entry.offset, method)
}

pub fn files_under(root: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}
