use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};

use super::seeds::SeedSet;
use crate::error::{Error, Result};
use crate::imgcore::{gradient, median_blur, BinaryMask, GrayImage, Pos, RING8};

/// Per-pixel labels; 0 is unassigned or watershed line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
}

impl SegmentMap {
    pub fn new(width: usize, height: usize, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::invalid("label buffer does not match dimensions"));
        }
        Ok(SegmentMap { width, height, labels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn label(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn as_raw(&self) -> &[u32] {
        &self.labels
    }

    pub fn region(&self, label: u32) -> BinaryMask {
        BinaryMask::from_fn(self.width, self.height, |x, y| self.label(x, y) == label)
    }

    /// Pixel count per nonzero label.
    pub fn counts(&self) -> BTreeMap<u32, usize> {
        let mut m = BTreeMap::new();
        for &l in self.labels.iter().filter(|&&l| l != 0) {
            *m.entry(l).or_insert(0) += 1;
        }
        m
    }

    /// Label raster as an 8-bit image; labels above 255 are rejected.
    pub fn to_image(&self) -> Result<GrayImage> {
        if self.labels.iter().any(|&l| l > 255) {
            return Err(Error::invalid("labels above 255 do not fit an 8-bit raster"));
        }
        GrayImage::new(self.width, self.height, self.labels.iter().map(|&l| l as u8).collect())
    }
}

/// Sobel magnitude of the 3x3 median of `gray`.
pub fn flooding_surface(gray: &GrayImage) -> Result<Vec<f64>> {
    let smooth = if gray.width() >= 3 && gray.height() >= 3 {
        median_blur(gray, 3)?
    } else {
        gray.clone()
    };
    let g = gradient(&smooth, 3)?;
    Ok((0..smooth.height())
        .flat_map(|y| (0..smooth.width()).map(move |x| (x, y)))
        .map(|(x, y)| g.magnitude(x, y))
        .collect())
}

/// Meyer flooding from `markers` over `surface`, restricted to `domain`
/// (marker pixels always belong to it). Pixels pop in ascending surface
/// order, first-in first-out within a level; the initial frontier is queued
/// in linear pixel order.
pub(crate) fn flood(
    surface: &[f64],
    width: usize,
    height: usize,
    markers: &[(Pos, u32)],
    domain: Option<&BinaryMask>,
) -> Result<SegmentMap> {
    const LINE: u32 = u32::MAX;
    let n = width * height;
    let mut labels = vec![0u32; n];
    let mut in_domain: Vec<bool> = match domain {
        Some(d) => d.as_raw().to_vec(),
        None => vec![true; n],
    };
    for &(p, l) in markers {
        let i = p.y * width + p.x;
        if labels[i] != 0 && labels[i] != l {
            return Err(Error::invalid(format!("seeds with labels {} and {l} share pixel ({}, {})", labels[i], p.x, p.y)));
        }
        labels[i] = l;
        in_domain[i] = true;
    }
    let key = |i: usize| surface[i].max(0.0).to_bits();
    let neighbours = |i: usize| {
        let (x, y) = ((i % width) as isize, (i / width) as isize);
        RING8.iter().filter_map(move |&(dx, dy)| {
            let (nx, ny) = (x + dx, y + dy);
            (nx >= 0 && ny >= 0 && (nx as usize) < width && (ny as usize) < height)
                .then(|| ny as usize * width + nx as usize)
        })
    };

    let mut queued = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    for i in 0..n {
        if labels[i] == 0 {
            continue;
        }
        for j in neighbours(i) {
            if in_domain[j] && labels[j] == 0 && !queued[j] {
                queued[j] = true;
                heap.push(Reverse((key(j), seq, j)));
                seq += 1;
            }
        }
    }
    while let Some(Reverse((_, _, i))) = heap.pop() {
        let mut found = None;
        let mut conflict = false;
        for j in neighbours(i) {
            let l = labels[j];
            if l == 0 || l == LINE {
                continue;
            }
            match found {
                None => found = Some(l),
                Some(f) if f != l => conflict = true,
                _ => {}
            }
        }
        if conflict {
            labels[i] = LINE;
            continue;
        }
        let Some(l) = found else { continue };
        labels[i] = l;
        for j in neighbours(i) {
            if in_domain[j] && labels[j] == 0 && !queued[j] {
                queued[j] = true;
                heap.push(Reverse((key(j), seq, j)));
                seq += 1;
            }
        }
    }
    for l in &mut labels {
        if *l == LINE {
            *l = 0;
        }
    }
    SegmentMap::new(width, height, labels)
}

/// Marker-controlled watershed of the whole image.
pub fn watershed(gray: &GrayImage, seeds: &SeedSet) -> Result<SegmentMap> {
    let markers = seeds.positions(gray.width(), gray.height())?;
    seeds.roles()?;
    let distinct: BTreeSet<u32> = markers.iter().map(|&(_, l)| l).collect();
    if distinct.len() < 2 {
        return Err(Error::invalid("watershed needs at least two distinct labels"));
    }
    flood(&flooding_surface(gray)?, gray.width(), gray.height(), &markers, None)
}

#[cfg(test)]
mod tests {
    use super::super::seeds::{Method, Seed, SeedRole};
    use super::*;
    use crate::segmentation::{label_components, Connectivity};
    use proptest::prelude::*;

    fn set(seeds: Vec<(i64, i64, u32, SeedRole)>) -> SeedSet {
        SeedSet {
            method: Method::SharedIntersection,
            above_label: None,
            seeds: seeds.into_iter().map(|(x, y, label, role)| Seed { x, y, label, role }).collect(),
        }
    }

    /// Reference flooding: repeatedly scan for the queued unlabelled pixel
    /// with the lowest (value, queue time).
    fn naive_flood(surface: &[f64], w: usize, h: usize, markers: &[(Pos, u32)]) -> Vec<u32> {
        const LINE: u32 = u32::MAX;
        let mut labels = vec![0u32; w * h];
        for &(p, l) in markers {
            labels[p.y * w + p.x] = l;
        }
        let nb = |i: usize| {
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            RING8
                .iter()
                .filter_map(|&(dx, dy)| {
                    let (nx, ny) = (x + dx, y + dy);
                    (nx >= 0 && ny >= 0 && nx < w as isize && ny < h as isize).then(|| ny as usize * w + nx as usize)
                })
                .collect::<Vec<_>>()
        };
        let mut stamp: Vec<Option<usize>> = vec![None; w * h];
        let mut clock = 0;
        for i in 0..w * h {
            if labels[i] != 0 {
                for j in nb(i) {
                    if labels[j] == 0 && stamp[j].is_none() {
                        stamp[j] = Some(clock);
                        clock += 1;
                    }
                }
            }
        }
        let mut done = vec![false; w * h];
        loop {
            let next = (0..w * h)
                .filter(|&i| stamp[i].is_some() && !done[i])
                .min_by(|&a, &b| surface[a].total_cmp(&surface[b]).then(stamp[a].cmp(&stamp[b])));
            let Some(i) = next else { break };
            done[i] = true;
            let ls: BTreeSet<u32> = nb(i).into_iter().map(|j| labels[j]).filter(|&l| l != 0 && l != LINE).collect();
            if ls.len() > 1 {
                labels[i] = LINE;
                continue;
            }
            labels[i] = *ls.iter().next().unwrap();
            for j in nb(i) {
                if labels[j] == 0 && stamp[j].is_none() {
                    stamp[j] = Some(clock);
                    clock += 1;
                }
            }
        }
        labels.into_iter().map(|l| if l == LINE { 0 } else { l }).collect()
    }

    fn disc(img: &mut GrayImage, cx: f64, cy: f64, r: f64, v: u8) {
        for y in 0..img.height() {
            for x in 0..img.width() {
                if (x as f64 - cx).hypot(y as f64 - cy) <= r {
                    img.set(x, y, v);
                }
            }
        }
    }

    #[test]
    fn blob_versus_background() {
        let mut img = GrayImage::filled(16, 16, 255);
        disc(&mut img, 7.5, 7.5, 4.5, 60);
        let seeds = set(vec![(7, 7, 1, SeedRole::Chromosome), (0, 0, 2, SeedRole::Background)]);
        let map = watershed(&img, &seeds).unwrap();
        let blob = img.mask_where(|v| v < 128);
        let region = map.region(1);
        for y in 0..16 {
            for x in 0..16 {
                let near_edge = (x as f64 - 7.5).hypot(y as f64 - 7.5) > 3.0
                    && (x as f64 - 7.5).hypot(y as f64 - 7.5) < 6.5;
                if !near_edge {
                    assert_eq!(region.get(x, y), blob.get(x, y), "({x},{y})");
                }
            }
        }
    }

    #[test]
    fn matches_naive_flooding() {
        let mut img = GrayImage::filled(16, 16, 255);
        disc(&mut img, 5.0, 8.0, 4.0, 70);
        disc(&mut img, 11.0, 8.0, 4.0, 90);
        let seeds = set(vec![
            (5, 8, 1, SeedRole::Chromosome),
            (11, 8, 2, SeedRole::Chromosome),
            (0, 0, 3, SeedRole::Background),
        ]);
        let map = watershed(&img, &seeds).unwrap();
        let surface = flooding_surface(&img).unwrap();
        let markers = seeds.positions(16, 16).unwrap();
        assert_eq!(map.as_raw(), naive_flood(&surface, 16, 16, &markers).as_slice());
    }

    #[test]
    fn touching_discs_split_at_ridge() {
        let mut img = GrayImage::filled(60, 40, 255);
        disc(&mut img, 20.0, 20.0, 10.5, 80);
        disc(&mut img, 40.0, 20.0, 10.5, 80);
        let seeds = set(vec![
            (20, 20, 1, SeedRole::Chromosome),
            (40, 20, 2, SeedRole::Chromosome),
            (2, 2, 3, SeedRole::Background),
        ]);
        let map = watershed(&img, &seeds).unwrap();
        for y in 17..=23 {
            let last1 = (0..60).filter(|&x| map.label(x, y) == 1).max().unwrap();
            let first2 = (0..60).filter(|&x| map.label(x, y) == 2).min().unwrap();
            assert!((last1 as f64 - 30.0).abs() <= 1.5, "row {y}: {last1}");
            assert!((first2 as f64 - 30.0).abs() <= 1.5, "row {y}: {first2}");
        }
    }

    #[test]
    fn bad_seeds() {
        let img = GrayImage::filled(8, 8, 100);
        let out = set(vec![(-1, 0, 1, SeedRole::Chromosome), (3, 3, 2, SeedRole::Chromosome)]);
        assert_eq!(watershed(&img, &out).unwrap_err().code(), "invalid-argument");
        let single = set(vec![(1, 1, 1, SeedRole::Chromosome), (3, 3, 1, SeedRole::Chromosome)]);
        assert_eq!(watershed(&img, &single).unwrap_err().code(), "invalid-argument");
        let clash = set(vec![(1, 1, 1, SeedRole::Chromosome), (1, 1, 2, SeedRole::Chromosome)]);
        assert!(watershed(&img, &clash).is_err());
    }

    fn arb_case() -> impl Strategy<Value = (GrayImage, Vec<(i64, i64, u32)>)> {
        (4usize..14, 4usize..14).prop_flat_map(|(w, h)| {
            let img = proptest::collection::vec(0u8..=255, w * h).prop_map(move |d| GrayImage::new(w, h, d).unwrap());
            let seeds = proptest::collection::vec((0..w as i64, 0..h as i64, 1u32..5), 2..6);
            (img, seeds)
        })
    }

    proptest! {
        #[test]
        fn regions_are_disjoint_connected_and_seeded((img, raw) in arb_case(), rot in 0usize..6) {
            let mut dedup: Vec<(i64, i64, u32)> = Vec::new();
            for s in raw {
                if !dedup.iter().any(|d| d.0 == s.0 && d.1 == s.1) {
                    dedup.push(s);
                }
            }
            let labels: BTreeSet<u32> = dedup.iter().map(|s| s.2).collect();
            prop_assume!(labels.len() >= 2);
            let seeds = set(dedup.iter().map(|&(x, y, l)| (x, y, l, SeedRole::Chromosome)).collect());
            let map = watershed(&img, &seeds).unwrap();
            for s in &seeds.seeds {
                prop_assert_eq!(map.label(s.x as usize, s.y as usize), s.label);
            }
            // single-seed labels give 8-connected regions
            for &l in &labels {
                if seeds.seeds.iter().filter(|s| s.label == l).count() == 1 {
                    prop_assert_eq!(label_components(&map.region(l), Connectivity::Eight).count(), 1);
                }
            }
            let mut permuted = seeds.clone();
            let k = rot % permuted.seeds.len();
            permuted.seeds.rotate_left(k);
            permuted.seeds.reverse();
            prop_assert_eq!(watershed(&img, &permuted).unwrap(), map.clone());
            let surface = flooding_surface(&img).unwrap();
            let markers = seeds.positions(img.width(), img.height()).unwrap();
            let naive = naive_flood(&surface, img.width(), img.height(), &markers);
            prop_assert_eq!(map.as_raw(), naive.as_slice());
        }
    }
}
