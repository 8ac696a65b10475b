use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::imgcore::{BinaryMask, Pos, NEIGH4, RING8};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    pub(crate) fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &NEIGH4,
            Connectivity::Eight => &RING8,
        }
    }
}

/// Connected-component labels; 0 is background, components are numbered from
/// 1 in raster order of their first pixel.
#[derive(Debug, Clone)]
pub struct ComponentLabels {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    first: Vec<Pos>,
}

impl ComponentLabels {
    pub fn count(&self) -> usize {
        self.first.len()
    }

    pub fn label(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn as_raw(&self) -> &[u32] {
        &self.labels
    }

    /// Topmost-leftmost pixel of component `label` (1-based).
    pub fn first_pixel(&self, label: u32) -> Pos {
        self.first[label as usize - 1]
    }

    pub fn component_mask(&self, label: u32) -> BinaryMask {
        BinaryMask::from_fn(self.width, self.height, |x, y| self.label(x, y) == label)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count()];
        for &l in &self.labels {
            if l > 0 {
                sizes[l as usize - 1] += 1;
            }
        }
        sizes
    }
}

pub fn label_components(mask: &BinaryMask, conn: Connectivity) -> ComponentLabels {
    let (w, h) = (mask.width(), mask.height());
    let mut labels = vec![0u32; w * h];
    let mut first = Vec::new();
    let mut queue = VecDeque::new();
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) || labels[y * w + x] != 0 {
                continue;
            }
            first.push(Pos::new(x, y));
            let id = first.len() as u32;
            labels[y * w + x] = id;
            queue.push_back((x, y));
            while let Some((cx, cy)) = queue.pop_front() {
                for &(dx, dy) in conn.offsets() {
                    let (nx, ny) = (cx as isize + dx, cy as isize + dy);
                    if mask.get_or_bg(nx, ny) {
                        let i = ny as usize * w + nx as usize;
                        if labels[i] == 0 {
                            labels[i] = id;
                            queue.push_back((nx as usize, ny as usize));
                        }
                    }
                }
            }
        }
    }
    ComponentLabels {
        width: w,
        height: h,
        labels,
        first,
    }
}

/// Outer boundary of one 8-connected component.
///
/// `points` run clockwise (on screen) from the component's topmost-leftmost
/// pixel; consecutive points, and the last and first, are 8-adjacent. A
/// one-pixel component has a single point. `area` counts the pixels enclosed
/// by the boundary, holes included.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contour {
    pub points: Vec<Pos>,
    pub area: usize,
}

/// Component traced together with its hole-filled footprint.
#[derive(Debug, Clone)]
pub(crate) struct TracedRegion {
    pub contour: Contour,
    /// Footprint in a local frame whose origin is `origin`.
    pub filled: BinaryMask,
    pub origin: Pos,
}

impl TracedRegion {
    pub fn filled_positions(&self) -> impl Iterator<Item = Pos> + '_ {
        self.filled
            .positions()
            .map(|p| Pos::new(p.x + self.origin.x, p.y + self.origin.y))
    }
}

/// Moore-neighbour boundary tracing with Jacob's stopping criterion.
fn trace_boundary(inside: impl Fn(isize, isize) -> bool, start: Pos) -> Vec<Pos> {
    let step = |p: Pos, d: usize| {
        let (dx, dy) = RING8[d];
        (p.x as isize + dx, p.y as isize + dy)
    };
    let dir_between = |from: Pos, to: (isize, isize)| {
        let delta = (to.0 - from.x as isize, to.1 - from.y as isize);
        RING8.iter().position(|&d| d == delta).expect("adjacent positions")
    };

    let mut points = vec![start];
    let mut current = start;
    // start is topmost-leftmost, so its west neighbour is background
    let mut back_dir = 4;
    let mut first_step: Option<Pos> = None;
    loop {
        let mut found = None;
        for k in 1..=8 {
            let d = (back_dir + k) % 8;
            let (qx, qy) = step(current, d);
            if inside(qx, qy) {
                found = Some((Pos::new(qx as usize, qy as usize), d));
                break;
            }
        }
        let Some((next, d)) = found else {
            return points;
        };
        if current == start {
            match first_step {
                None => first_step = Some(next),
                Some(f) if f == next => break,
                Some(_) => {}
            }
        }
        let back = step(current, (d + 7) % 8);
        back_dir = dir_between(next, back);
        points.push(next);
        current = next;
    }
    if points.len() > 1 && points.last() == Some(&start) {
        points.pop();
    }
    points
}

/// Component footprint with holes filled (background not 4-connected to the
/// outside of the bounding box).
fn fill_component(labels: &ComponentLabels, label: u32) -> (BinaryMask, Pos) {
    let (mut lo, mut hi) = (Pos::new(usize::MAX, usize::MAX), Pos::new(0, 0));
    let w = labels.width;
    for (i, &l) in labels.labels.iter().enumerate() {
        if l == label {
            let (x, y) = (i % w, i / w);
            lo.x = lo.x.min(x);
            lo.y = lo.y.min(y);
            hi.x = hi.x.max(x);
            hi.y = hi.y.max(y);
        }
    }
    // local grid padded by one so the outside is connected
    let (lw, lh) = (hi.x - lo.x + 3, hi.y - lo.y + 3);
    let member = |lx: usize, ly: usize| {
        lx >= 1
            && ly >= 1
            && lx - 1 <= hi.x - lo.x
            && ly - 1 <= hi.y - lo.y
            && labels.label(lo.x + lx - 1, lo.y + ly - 1) == label
    };
    let mut outside = vec![false; lw * lh];
    let mut queue = VecDeque::from([(0usize, 0usize)]);
    outside[0] = true;
    while let Some((x, y)) = queue.pop_front() {
        for (dx, dy) in NEIGH4 {
            let (nx, ny) = (x as isize + dx, y as isize + dy);
            if nx < 0 || ny < 0 || nx >= lw as isize || ny >= lh as isize {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            if !outside[ny * lw + nx] && !member(nx, ny) {
                outside[ny * lw + nx] = true;
                queue.push_back((nx, ny));
            }
        }
    }
    let filled = BinaryMask::from_fn(hi.x - lo.x + 1, hi.y - lo.y + 1, |x, y| {
        !outside[(y + 1) * lw + (x + 1)]
    });
    (filled, lo)
}

pub(crate) fn trace_regions(mask: &BinaryMask) -> Vec<TracedRegion> {
    let labels = label_components(mask, Connectivity::Eight);
    (1..=labels.count() as u32)
        .map(|label| {
            let (filled, origin) = fill_component(&labels, label);
            let points = trace_boundary(
                |x, y| {
                    x >= 0
                        && y >= 0
                        && (x as usize) < labels.width
                        && (y as usize) < labels.height
                        && labels.label(x as usize, y as usize) == label
                },
                labels.first_pixel(label),
            );
            TracedRegion {
                contour: Contour {
                    points,
                    area: filled.count(),
                },
                filled,
                origin,
            }
        })
        .collect()
}

/// One outer contour per 8-connected foreground component, ordered by each
/// component's topmost-leftmost pixel.
pub fn find_contours(mask: &BinaryMask) -> Vec<Contour> {
    trace_regions(mask).into_iter().map(|r| r.contour).collect()
}

/// Contours with `area >= min_area`, order preserved.
pub fn filter_contours(contours: Vec<Contour>, min_area: usize) -> Vec<Contour> {
    contours.into_iter().filter(|c| c.area >= min_area).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn square(size: usize, at: Pos, w: usize, h: usize) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| {
            (at.x..at.x + size).contains(&x) && (at.y..at.y + size).contains(&y)
        })
    }

    #[test]
    fn empty_mask_has_no_contours() {
        assert!(find_contours(&BinaryMask::empty(6, 6)).is_empty());
    }

    #[test]
    fn filled_square_boundary() {
        let cs = find_contours(&square(5, Pos::new(2, 3), 10, 10));
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].points.len(), 16);
        assert_eq!(cs[0].area, 25);
        assert_eq!(cs[0].points[0], Pos::new(2, 3));
        let mut uniq = cs[0].points.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), 16);
    }

    #[test]
    fn blobs_ordered_topmost_leftmost() {
        let a = square(3, Pos::new(6, 1), 12, 12);
        let b = square(3, Pos::new(1, 5), 12, 12);
        let cs = find_contours(&a.union(&b));
        assert_eq!(cs.len(), 2);
        assert_eq!(cs[0].points[0], Pos::new(6, 1));
        assert_eq!(cs[1].points[0], Pos::new(1, 5));
    }

    #[test]
    fn diagonal_neck_keeps_one_component() {
        let mut m = square(3, Pos::new(0, 0), 8, 8).union(&square(3, Pos::new(3, 3), 8, 8));
        m.set(0, 0, true);
        assert_eq!(find_contours(&m).len(), 1);
    }

    #[test]
    fn line_contour_walks_both_sides() {
        let m = BinaryMask::from_fn(7, 3, |x, y| y == 1 && (1..6).contains(&x));
        let c = &find_contours(&m)[0];
        assert_eq!(c.points.len(), 8);
        assert_eq!(c.area, 5);
    }

    #[test]
    fn ring_area_includes_hole() {
        let outer = square(5, Pos::new(1, 1), 8, 8);
        let m = outer.difference(&square(1, Pos::new(3, 3), 8, 8));
        let c = &find_contours(&m)[0];
        assert_eq!(c.area, 25);
        assert_eq!(c.points.len(), 16);
    }

    #[test]
    fn filter_semantics() {
        let mk = |area| Contour { points: vec![Pos::new(0, 0); 3], area };
        assert!(filter_contours(vec![], 5).is_empty());
        let kept = filter_contours(vec![mk(3), mk(50), mk(200)], 10);
        assert_eq!(kept.iter().map(|c| c.area).collect::<Vec<_>>(), vec![50, 200]);
        let all = vec![mk(0), mk(4)];
        assert_eq!(filter_contours(all.clone(), 0), all);
    }

    fn arb_mask() -> impl Strategy<Value = BinaryMask> {
        (2usize..14, 2usize..14).prop_flat_map(|(w, h)| {
            proptest::collection::vec(prop::bool::weighted(0.45), w * h)
                .prop_map(move |d| BinaryMask::new(w, h, d).unwrap())
        })
    }

    proptest! {
        #[test]
        fn contours_close_and_match_components(m in arb_mask()) {
            let labels = label_components(&m, Connectivity::Eight);
            let cs = find_contours(&m);
            prop_assert_eq!(cs.len(), labels.count());
            let sizes = labels.sizes();
            for (i, c) in cs.iter().enumerate() {
                prop_assert!(c.area >= sizes[i]);
                let label = i as u32 + 1;
                for p in &c.points {
                    prop_assert_eq!(labels.label(p.x, p.y), label);
                }
                for pair in c.points.windows(2) {
                    prop_assert!(pair[0].is_adjacent8(pair[1]));
                }
                if c.points.len() > 1 {
                    prop_assert!(c.points[0].is_adjacent8(*c.points.last().unwrap()));
                }
            }
        }
    }
}
