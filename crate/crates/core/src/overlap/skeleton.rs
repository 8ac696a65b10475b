//! Zhang-Suen thinning with topology-preserving deletion.
//!
//! Each sub-iteration marks candidates with the classic Zhang-Suen test on a
//! snapshot, then deletes them one by one in raster order, skipping any pixel
//! that is no longer simple or has become an end point. A final pass removes
//! remaining simple non-end pixels (staircase corners), leaving a skeleton in
//! which every pixel with two or more neighbours is a cut point.

use serde::{Deserialize, Serialize};

use crate::imgcore::{BinaryMask, Pos};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skeleton {
    pub mask: BinaryMask,
    pub source_id: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub position: Pos,
    pub crossing_number: u8,
}

/// Neighbours clockwise from north: N, NE, E, SE, S, SW, W, NW.
fn ring(mask: &BinaryMask, p: Pos) -> [bool; 8] {
    const OFFS: [(isize, isize); 8] = [(0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)];
    let (x, y) = (p.x as isize, p.y as isize);
    OFFS.map(|(dx, dy)| mask.get_or_bg(x + dx, y + dy))
}

fn transitions(nb: &[bool; 8]) -> u8 {
    (0..8).filter(|&i| !nb[i] && nb[(i + 1) % 8]).count() as u8
}

/// Yokoi 8-connectivity number; a border pixel is simple iff it equals 1.
fn connectivity_number(nb: &[bool; 8]) -> u8 {
    // re-index counter-clockwise from east: E, NE, N, NW, W, SW, S, SE
    let x = [nb[2], nb[1], nb[0], nb[7], nb[6], nb[5], nb[4], nb[3]];
    let c = |i: usize| !x[i % 8] as u8;
    [0, 2, 4, 6]
        .iter()
        .map(|&k| c(k) - c(k) * c(k + 1) * c(k + 2))
        .sum()
}

fn deletable(mask: &BinaryMask, p: Pos) -> bool {
    let nb = ring(mask, p);
    let n = nb.iter().filter(|&&v| v).count();
    n >= 2 && connectivity_number(&nb) == 1
}

fn zhang_suen_candidate(nb: &[bool; 8], first: bool) -> bool {
    let [p2, _, p4, _, p6, _, p8, _] = *nb;
    let b = nb.iter().filter(|&&v| v).count();
    if !(2..=6).contains(&b) || transitions(nb) != 1 {
        return false;
    }
    if first {
        !(p2 && p4 && p6) && !(p4 && p6 && p8)
    } else {
        !(p2 && p4 && p8) && !(p2 && p6 && p8)
    }
}

pub fn skeletonize(mask: &BinaryMask) -> Skeleton {
    let mut m = mask.clone();
    loop {
        let mut changed = false;
        for first in [true, false] {
            let marked: Vec<Pos> = m
                .positions()
                .filter(|&p| zhang_suen_candidate(&ring(&m, p), first))
                .collect();
            for p in marked {
                if deletable(&m, p) {
                    m.set(p.x, p.y, false);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    strip_simple(&mut m);
    Skeleton {
        mask: m,
        source_id: None,
    }
}

/// Removes simple non-end pixels until none remain.
fn strip_simple(m: &mut BinaryMask) {
    loop {
        let mut changed = false;
        let pixels: Vec<Pos> = m.positions().collect();
        for p in pixels {
            if deletable(m, p) {
                m.set(p.x, p.y, false);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

fn degree(mask: &BinaryMask, p: Pos) -> usize {
    ring(mask, p).iter().filter(|&&v| v).count()
}

/// Removes end branches no longer than `ratio` times the mask depth at the
/// junction they hang from. `depth` is indexed like the skeleton raster.
pub fn prune_spurs(skel: &Skeleton, depth: &[f64], ratio: f64) -> Skeleton {
    let mut m = skel.mask.clone();
    let w = m.width();
    loop {
        let mut changed = false;
        let ends: Vec<Pos> = m.positions().filter(|&p| degree(&m, p) == 1).collect();
        for e in ends {
            if !m.get(e.x, e.y) || degree(&m, e) != 1 {
                continue;
            }
            let mut path = vec![e];
            let mut prev = e;
            let mut cur = neighbours(&m, e)[0];
            let junction = loop {
                match degree(&m, cur) {
                    1 => break None,
                    2 => {
                        let next = neighbours(&m, cur).into_iter().find(|&q| q != prev).unwrap();
                        path.push(cur);
                        prev = cur;
                        cur = next;
                        if path.len() > m.count() {
                            break None;
                        }
                    }
                    _ => break Some(cur),
                }
            };
            if let Some(j) = junction {
                if path.len() as f64 <= ratio * depth[j.y * w + j.x] {
                    for p in path {
                        m.set(p.x, p.y, false);
                    }
                    if deletable(&m, j) {
                        m.set(j.x, j.y, false);
                    }
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
        strip_simple(&mut m);
    }
    Skeleton {
        mask: m,
        source_id: skel.source_id.clone(),
    }
}

fn neighbours(mask: &BinaryMask, p: Pos) -> Vec<Pos> {
    const OFFS: [(isize, isize); 8] = [(0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)];
    OFFS.iter()
        .map(|&(dx, dy)| (p.x as isize + dx, p.y as isize + dy))
        .filter(|&(x, y)| mask.get_or_bg(x, y))
        .map(|(x, y)| Pos::new(x as usize, y as usize))
        .collect()
}

/// Number of background-to-foreground transitions around `p`'s 8-neighbourhood.
pub fn crossing_number(skel: &Skeleton, p: Pos) -> u8 {
    transitions(&ring(&skel.mask, p))
}

/// Pixels with crossing number >= 3, single-linkage merged within
/// `merge_radius` (Euclidean). Each cluster reports the skeleton pixel nearest
/// its centroid and the largest crossing number among its members.
pub fn detect_intersections(skel: &Skeleton, merge_radius: f64) -> Vec<BranchPoint> {
    let hits: Vec<(Pos, u8)> = skel
        .mask
        .positions()
        .map(|p| (p, crossing_number(skel, p)))
        .filter(|&(_, cn)| cn >= 3)
        .collect();

    let mut parent: Vec<usize> = (0..hits.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let r2 = merge_radius * merge_radius;
    for i in 0..hits.len() {
        for j in i + 1..hits.len() {
            let dx = hits[i].0.x as f64 - hits[j].0.x as f64;
            let dy = hits[i].0.y as f64 - hits[j].0.y as f64;
            if dx * dx + dy * dy <= r2 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; hits.len()];
    for i in 0..hits.len() {
        let r = find(&mut parent, i);
        if root_slot[r] == usize::MAX {
            root_slot[r] = clusters.len();
            clusters.push(Vec::new());
        }
        clusters[root_slot[r]].push(i);
    }

    clusters
        .into_iter()
        .map(|members| {
            let n = members.len() as f64;
            let cx = members.iter().map(|&i| hits[i].0.x as f64).sum::<f64>() / n;
            let cy = members.iter().map(|&i| hits[i].0.y as f64).sum::<f64>() / n;
            let nearest = skel
                .mask
                .positions()
                .min_by(|a, b| {
                    let da = (a.x as f64 - cx).powi(2) + (a.y as f64 - cy).powi(2);
                    let db = (b.x as f64 - cx).powi(2) + (b.y as f64 - cy).powi(2);
                    da.total_cmp(&db)
                })
                .expect("clusters are nonempty");
            BranchPoint {
                position: nearest,
                crossing_number: members.iter().map(|&i| hits[i].1).max().unwrap_or(0),
            }
        })
        .collect()
}
