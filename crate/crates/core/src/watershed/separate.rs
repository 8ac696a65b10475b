use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::flood::{flood, flooding_surface, SegmentMap};
use super::gapfill::GapFiller;
use super::seeds::{Method, SeedRole, SeedSet};
use crate::error::{Error, Result};
use crate::imgcore::{BinaryMask, GrayImage, RING8};
use crate::segmentation::CropRecord;

/// Region labels merged into a separated chromosome.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Provenance {
    /// Every label whose region is part of the mask, own label first.
    pub regions: Vec<u32>,
    /// Intersection labels included as-is.
    pub shared: Vec<u32>,
    /// Intersection labels reconstructed by a gap filler.
    pub filled: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparatedChromosome {
    /// `{parent_crop}_{label}`.
    pub id: String,
    pub image: GrayImage,
    pub mask: BinaryMask,
    pub parent_crop: String,
    pub label: u32,
    pub provenance: Provenance,
    /// Pixels handed to the gap filler, if any.
    pub gap_mask: Option<BinaryMask>,
}

/// Serialisable sidecar for a separated chromosome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparatedMeta {
    pub id: String,
    pub parent_crop: String,
    pub label: u32,
    pub area: usize,
    pub provenance: Provenance,
    pub gap_pixels: usize,
}

impl SeparatedChromosome {
    pub fn meta(&self) -> SeparatedMeta {
        SeparatedMeta {
            id: self.id.clone(),
            parent_crop: self.parent_crop.clone(),
            label: self.label,
            area: self.mask.count(),
            provenance: self.provenance.clone(),
            gap_pixels: self.gap_mask.as_ref().map_or(0, |g| g.count()),
        }
    }
}

/// Watershed of a crop restricted to its mask (plus the seed pixels).
pub fn segment_crop(crop: &CropRecord, seeds: &SeedSet) -> Result<SegmentMap> {
    let (w, h) = (crop.image.width(), crop.image.height());
    let markers = seeds.positions(w, h)?;
    seeds.roles()?;
    if markers.iter().map(|&(_, l)| l).collect::<BTreeSet<_>>().len() < 2 {
        return Err(Error::invalid("watershed needs at least two distinct labels"));
    }
    flood(&flooding_surface(&crop.image)?, w, h, &markers, Some(&crop.mask))
}

/// Crop foreground labelled with chromosome and intersection regions. Line
/// pixels and other unlabelled foreground join the adjacent region whose
/// seed centroid is closest (ties: smaller label), layer by layer outward.
pub fn attribute(crop: &CropRecord, seeds: &SeedSet, map: &SegmentMap) -> Result<Vec<u32>> {
    let roles = seeds.roles()?;
    let (w, h) = (map.width(), map.height());
    let mut centroids: BTreeMap<u32, (f64, f64, f64)> = BTreeMap::new();
    for s in &seeds.seeds {
        let e = centroids.entry(s.label).or_insert((0.0, 0.0, 0.0));
        e.0 += s.x as f64;
        e.1 += s.y as f64;
        e.2 += 1.0;
    }
    let source = |l: u32| matches!(roles.get(&l), Some(SeedRole::Chromosome | SeedRole::Intersection));
    let mut labels: Vec<u32> = map.as_raw().iter().map(|&l| if source(l) { l } else { 0 }).collect();
    let open = |labels: &[u32], i: usize| {
        labels[i] == 0 && map.as_raw()[i] == 0 && crop.mask.get(i % w, i / w)
    };
    loop {
        let mut layer = Vec::new();
        for i in 0..w * h {
            if !open(&labels, i) {
                continue;
            }
            let (x, y) = (i % w, i / w);
            let mut best: Option<(f64, u32)> = None;
            for (dx, dy) in RING8 {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let l = labels[ny as usize * w + nx as usize];
                if l == 0 {
                    continue;
                }
                let (sx, sy, n) = centroids[&l];
                let d = (x as f64 - sx / n).hypot(y as f64 - sy / n);
                if best.is_none_or(|(bd, bl)| d < bd || (d == bd && l < bl)) {
                    best = Some((d, l));
                }
            }
            if let Some((_, l)) = best {
                layer.push((i, l));
            }
        }
        if layer.is_empty() {
            break;
        }
        for (i, l) in layer {
            labels[i] = l;
        }
    }
    Ok(labels)
}

fn adjacency(labels: &[u32], w: usize, h: usize) -> BTreeSet<(u32, u32)> {
    let mut adj = BTreeSet::new();
    for y in 0..h {
        for x in 0..w {
            let a = labels[y * w + x];
            if a == 0 {
                continue;
            }
            for (dx, dy) in RING8 {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let b = labels[ny as usize * w + nx as usize];
                if b != 0 && b != a {
                    adj.insert((a, b));
                }
            }
        }
    }
    adj
}

struct Regions {
    labels: Vec<u32>,
    width: usize,
    height: usize,
    chromosomes: Vec<u32>,
    intersections: Vec<u32>,
    adjacent: BTreeSet<(u32, u32)>,
}

impl Regions {
    fn mask(&self, wanted: &[u32]) -> BinaryMask {
        BinaryMask::from_fn(self.width, self.height, |x, y| wanted.contains(&self.labels[y * self.width + x]))
    }

    fn touching(&self, k: u32) -> Vec<u32> {
        self.intersections
            .iter()
            .copied()
            .filter(|&i| self.adjacent.contains(&(k, i)))
            .collect()
    }
}

fn regions(crop: &CropRecord, seeds: &SeedSet) -> Result<Regions> {
    seeds.validate_for_separation(crop.image.width(), crop.image.height())?;
    let map = segment_crop(crop, seeds)?;
    let labels = attribute(crop, seeds, &map)?;
    let (w, h) = (map.width(), map.height());
    let chromosomes: Vec<u32> = seeds.labels_with(SeedRole::Chromosome)?.into_iter().collect();
    let intersections: Vec<u32> = seeds.labels_with(SeedRole::Intersection)?.into_iter().collect();
    let adjacent = adjacency(&labels, w, h);
    for &i in &intersections {
        if !chromosomes.iter().any(|&k| adjacent.contains(&(i, k))) {
            return Err(Error::DanglingIntersection { label: i });
        }
    }
    Ok(Regions {
        labels,
        width: w,
        height: h,
        chromosomes,
        intersections,
        adjacent,
    })
}

fn whiten(image: &GrayImage, mask: &BinaryMask) -> GrayImage {
    GrayImage::from_fn(image.width(), image.height(), |x, y| if mask.get(x, y) { image.get(x, y) } else { 255 })
}

fn output(crop: &CropRecord, label: u32, image: &GrayImage, mask: BinaryMask, provenance: Provenance, gap_mask: Option<BinaryMask>) -> SeparatedChromosome {
    SeparatedChromosome {
        id: format!("{}_{}", crop.id, label),
        image: whiten(image, &mask),
        mask,
        parent_crop: crop.id.clone(),
        label,
        provenance,
        gap_mask,
    }
}

/// Every chromosome keeps its region plus each intersection region it touches.
pub fn separate_method2(crop: &CropRecord, seeds: &SeedSet) -> Result<Vec<SeparatedChromosome>> {
    let r = regions(crop, seeds)?;
    Ok(r.chromosomes
        .iter()
        .map(|&k| {
            let shared = r.touching(k);
            let mut all = vec![k];
            all.extend(&shared);
            let provenance = Provenance { regions: all.clone(), shared, filled: Vec::new() };
            output(crop, k, &crop.image, r.mask(&all), provenance, None)
        })
        .collect())
}

/// The chromosome above takes every intersection region; each one below gets
/// the intersection regions it touches reconstructed by `filler`.
pub fn separate_method1(crop: &CropRecord, seeds: &SeedSet, filler: &dyn GapFiller) -> Result<Vec<SeparatedChromosome>> {
    let r = regions(crop, seeds)?;
    let mut out = Vec::new();
    for &k in &r.chromosomes {
        if Some(k) == seeds.above_label {
            let mut all = vec![k];
            all.extend(&r.intersections);
            let provenance = Provenance { regions: all.clone(), shared: r.intersections.clone(), filled: Vec::new() };
            out.push(output(crop, k, &crop.image, r.mask(&all), provenance, None));
            continue;
        }
        let own = r.mask(&[k]);
        let gap_labels = r.touching(k);
        if gap_labels.is_empty() {
            let provenance = Provenance { regions: vec![k], ..Default::default() };
            out.push(output(crop, k, &crop.image, own, provenance, None));
            continue;
        }
        let gap = r.mask(&gap_labels);
        let filled = filler.fill(&crop.image, &own, &gap)?;
        let mut all = vec![k];
        all.extend(&gap_labels);
        let provenance = Provenance { regions: all, shared: Vec::new(), filled: gap_labels };
        out.push(output(crop, k, &filled, own.union(&gap), provenance, Some(gap)));
    }
    Ok(out)
}

/// Dispatches on `seeds.method`.
pub fn separate(crop: &CropRecord, seeds: &SeedSet, filler: &dyn GapFiller) -> Result<Vec<SeparatedChromosome>> {
    match seeds.method {
        Method::AboveTakesIntersection => separate_method1(crop, seeds, filler),
        Method::SharedIntersection => separate_method2(crop, seeds),
    }
}

/// Agreement between a separated mask and its truth over `domain`:
/// `1 - |(predicted xor truth) & domain| / |truth & domain|`.
pub fn attribution_accuracy(predicted: &BinaryMask, truth: &BinaryMask, domain: &BinaryMask) -> f64 {
    let wrong = predicted.difference(truth).intersection(domain).count()
        + truth.difference(predicted).intersection(domain).count();
    let total = truth.intersection(domain).count();
    if total == 0 {
        return if wrong == 0 { 1.0 } else { 0.0 };
    }
    1.0 - wrong as f64 / total as f64
}
