//! Synthetic metaphase generator with per-object ground truth.
//!
//! Chromosomes are banded capsules (two-segment spines with round caps) drawn
//! dark on white with anti-aliased edges. Groups of objects are placed by
//! rejection sampling so that distinct groups stay `gap` pixels apart.

mod shape;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::imgcore::{BinaryMask, GrayImage, Pos};
use crate::watershed::{Method, Seed, SeedRole, SeedSet};
use shape::{dir, BandProfile, Capsule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arrangement {
    Isolated,
    Touching,
    Overlapping,
    Cluster,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub class: u32,
    pub length: f64,
    pub width: f64,
    #[serde(default)]
    pub bend: f64,
    #[serde(default)]
    pub orientation: f64,
    #[serde(default)]
    pub band_seed: u64,
}

fn default_angle() -> f64 {
    60.0
}

/// Objects laid out together.
///
/// * `isolated`: every object placed on its own.
/// * `overlapping`: exactly two objects crossing at their spine midpoints,
///   the second rotated by `angle` from the first; `top` is drawn last.
/// * `touching`: the second object's end cap rests against the first's side.
/// * `cluster`: a chain in which each object touches the previous one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub arrangement: Arrangement,
    pub objects: Vec<ObjectSpec>,
    #[serde(default = "default_angle")]
    pub angle: f64,
    #[serde(default)]
    pub top: usize,
}

fn default_side() -> usize {
    960
}

fn default_gap() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    #[serde(default = "default_side")]
    pub width: usize,
    #[serde(default = "default_side")]
    pub height: usize,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "default_gap")]
    pub gap: usize,
    pub groups: Vec<GroupSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruthObject {
    pub class: u32,
    pub group: usize,
    pub arrangement: Arrangement,
    /// Mask origin in image coordinates.
    pub origin: Pos,
    pub mask: BinaryMask,
    /// Spine end, bend point and other end.
    pub spine: [Point2<f64>; 3],
    pub length: f64,
    pub width: f64,
}

impl TruthObject {
    /// Mask placed on a `width` x `height` canvas.
    pub fn full_mask(&self, width: usize, height: usize) -> BinaryMask {
        let mut m = BinaryMask::empty(width, height);
        for p in self.mask.positions() {
            let (x, y) = (p.x + self.origin.x, p.y + self.origin.y);
            if x < width && y < height {
                m.set(x, y, true);
            }
        }
        m
    }

    /// Mask in a `width` x `height` window whose top-left is `origin`.
    pub fn window_mask(&self, origin: Pos, width: usize, height: usize) -> BinaryMask {
        BinaryMask::from_fn(width, height, |x, y| {
            let (gx, gy) = (x + origin.x, y + origin.y);
            gx >= self.origin.x
                && gy >= self.origin.y
                && gx - self.origin.x < self.mask.width()
                && gy - self.origin.y < self.mask.height()
                && self.mask.get(gx - self.origin.x, gy - self.origin.y)
        })
    }

    pub fn pixels(&self) -> impl Iterator<Item = Pos> + '_ {
        self.mask
            .positions()
            .map(|p| Pos::new(p.x + self.origin.x, p.y + self.origin.y))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub position: Point2<f64>,
    pub objects: [usize; 2],
    pub top: usize,
}

#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub metaphase: GrayImage,
    pub objects: Vec<TruthObject>,
    pub crossings: Vec<Crossing>,
}

/// JSON-friendly summary of a [`GroundTruth`]; masks travel separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthManifest {
    pub width: usize,
    pub height: usize,
    pub objects: Vec<TruthObjectMeta>,
    pub crossings: Vec<Crossing>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthObjectMeta {
    pub index: usize,
    pub class: u32,
    pub group: usize,
    pub arrangement: Arrangement,
    pub origin: Pos,
    pub mask_width: usize,
    pub mask_height: usize,
    pub area: usize,
    pub spine: [Point2<f64>; 3],
    pub length: f64,
    pub width: f64,
}

impl GroundTruth {
    pub fn manifest(&self) -> TruthManifest {
        TruthManifest {
            width: self.metaphase.width(),
            height: self.metaphase.height(),
            objects: self
                .objects
                .iter()
                .enumerate()
                .map(|(index, o)| TruthObjectMeta {
                    index,
                    class: o.class,
                    group: o.group,
                    arrangement: o.arrangement,
                    origin: o.origin,
                    mask_width: o.mask.width(),
                    mask_height: o.mask.height(),
                    area: o.mask.count(),
                    spine: o.spine,
                    length: o.length,
                    width: o.width,
                })
                .collect(),
            crossings: self.crossings.clone(),
        }
    }

    pub fn full_mask(&self, index: usize) -> BinaryMask {
        self.objects[index].full_mask(self.metaphase.width(), self.metaphase.height())
    }

    /// Pixels shared by the two objects of a crossing.
    pub fn intersection(&self, crossing: &Crossing) -> Vec<Pos> {
        let [a, b] = crossing.objects;
        let other = self.full_mask(b);
        self.objects[a].pixels().filter(|p| other.get(p.x, p.y)).collect()
    }
}

fn polyline_point(spine: &[Point2<f64>; 3], s: f64) -> Point2<f64> {
    let l1 = spine[0].distance(spine[1]);
    let (u, v, t) = if s <= l1 { (spine[0], spine[1], s) } else { (spine[1], spine[2], s - l1) };
    let len = u.distance(v);
    if len == 0.0 { u } else { u.add(v.sub(u).scale((t / len).min(1.0))) }
}

fn polyline_distance(spine: &[Point2<f64>; 3], p: Point2<f64>) -> f64 {
    let seg = |u: Point2<f64>, v: Point2<f64>| {
        let d = v.sub(u);
        let len2 = d.dot(d);
        let t = if len2 == 0.0 { 0.0 } else { (p.sub(u).dot(d) / len2).clamp(0.0, 1.0) };
        p.distance(u.add(d.scale(t)))
    };
    seg(spine[0], spine[1]).min(seg(spine[1], spine[2]))
}

impl GroundTruth {
    /// Seeds an operator would place on a crossing, relative to `origin`.
    /// Three strokes run along each spine (centre and 60% of the half-width
    /// to either side), sampled every 2 px. Samples at least `CLEARANCE` px
    /// outside the other object seed the object (labels 1 and 2); samples
    /// at least 2 px inside it seed the intersection (label 3), as does the
    /// crossing itself. Method 1 marks the top object as above.
    pub fn overlap_seeds(&self, crossing: &Crossing, origin: Pos, method: Method) -> SeedSet {
        const CLEARANCE: f64 = 1.0;
        let mut seeds: Vec<Seed> = Vec::new();
        let mut put = |p: Point2<f64>, label: u32, role: SeedRole| {
            let (x, y) = (p.x.round() as i64 - origin.x as i64, p.y.round() as i64 - origin.y as i64);
            if !seeds.iter().any(|q| q.x == x && q.y == y) {
                seeds.push(Seed { x, y, label, role });
            }
        };
        put(crossing.position, 3, SeedRole::Intersection);
        for (k, &oi) in crossing.objects.iter().enumerate() {
            let o = &self.objects[oi];
            let other = &self.objects[crossing.objects[1 - k]];
            let mut s = 0.0;
            while s <= o.length {
                let p = polyline_point(&o.spine, s);
                let ahead = polyline_point(&o.spine, (s + 0.5).min(o.length));
                let behind = polyline_point(&o.spine, (s - 0.5).max(0.0));
                let t = ahead.sub(behind);
                let n = Point2::new(-t.y, t.x).scale(1.0 / t.norm().max(1e-12));
                s += 2.0;
                for lateral in [0.0, -0.6, 0.6] {
                    let q = p.add(n.scale(lateral * o.width / 2.0));
                    let d = polyline_distance(&other.spine, q);
                    if d > other.width / 2.0 + CLEARANCE {
                        put(q, k as u32 + 1, SeedRole::Chromosome);
                    } else if d <= other.width / 2.0 - 2.0 {
                        put(q, 3, SeedRole::Intersection);
                    }
                }
            }
        }
        let above = crossing.objects.iter().position(|&o| o == crossing.top).map(|k| k as u32 + 1);
        SeedSet {
            method,
            above_label: if method == Method::AboveTakesIntersection { above } else { None },
            seeds,
        }
    }
}

fn validate(spec: &SynthSpec) -> Result<()> {
    if spec.width == 0 || spec.height == 0 {
        return Err(Error::invalid("canvas must be nonempty"));
    }
    for (gi, g) in spec.groups.iter().enumerate() {
        let n = g.objects.len();
        let ok = match g.arrangement {
            Arrangement::Isolated => n >= 1,
            Arrangement::Overlapping | Arrangement::Touching => n == 2,
            Arrangement::Cluster => n >= 2,
        };
        if !ok {
            return Err(Error::invalid(format!("group {gi}: wrong object count {n} for {:?}", g.arrangement)));
        }
        if g.top >= n {
            return Err(Error::invalid(format!("group {gi}: top index {} out of range", g.top)));
        }
        for o in &g.objects {
            if !(o.length > 0.0 && o.width > 0.0 && o.length.is_finite() && o.width.is_finite()) {
                return Err(Error::invalid(format!("group {gi}: length and width must be > 0")));
            }
            if !(o.bend.is_finite() && o.orientation.is_finite()) {
                return Err(Error::invalid(format!("group {gi}: bend and orientation must be finite")));
            }
        }
    }
    Ok(())
}

fn capsule(o: &ObjectSpec, center: Point2<f64>, orientation: f64) -> Capsule {
    Capsule::new(center, o.length, o.width, o.bend, orientation, BandProfile::from_seed(o.band_seed))
}

/// Object rotated `angle` from `base`, its first cap touching `base` at arc fraction `t`.
fn touching(base: &Capsule, base_orientation: f64, o: &ObjectSpec, angle: f64, t: f64) -> Capsule {
    let contact = base.point_at(t);
    let normal = dir(base_orientation + 90.0);
    let orient = base_orientation + angle;
    let mut c = capsule(o, Point2::new(0.0, 0.0), orient);
    let start = contact.add(normal.scale(base.radius + c.radius - 1.0));
    c.translate(start.sub(c.a));
    c
}

/// Capsules of a group in local coordinates, in drawing order, plus crossings.
struct Layout {
    capsules: Vec<(usize, Capsule)>,
    crossings: Vec<(Point2<f64>, [usize; 2], usize)>,
}

fn layout_group(g: &GroupSpec) -> Layout {
    let origin = Point2::new(0.0, 0.0);
    let objs = &g.objects;
    match g.arrangement {
        Arrangement::Isolated => unreachable!("isolated objects are placed one by one"),
        Arrangement::Overlapping => {
            let o0 = objs[0].orientation;
            let c0 = capsule(&objs[0], origin, o0);
            let c1 = capsule(&objs[1], origin, o0 + g.angle);
            let mut ordered = vec![(0, c0), (1, c1)];
            ordered.sort_by_key(|(i, _)| *i == g.top);
            Layout {
                capsules: ordered,
                crossings: vec![(origin, [0, 1], g.top)],
            }
        }
        Arrangement::Touching | Arrangement::Cluster => {
            let mut out = Vec::new();
            let mut orient = objs[0].orientation;
            let mut prev = capsule(&objs[0], origin, orient);
            out.push((0, prev.clone()));
            for (i, o) in objs.iter().enumerate().skip(1) {
                let t = if i == 1 { 0.5 } else { 0.75 };
                let next = touching(&prev, orient, o, g.angle, t);
                orient += g.angle;
                out.push((i, next.clone()));
                prev = next;
            }
            Layout {
                capsules: out,
                crossings: Vec::new(),
            }
        }
    }
}

struct Placed {
    group: usize,
    arrangement: Arrangement,
    capsules: Vec<(usize, Capsule, u32)>,
    crossings: Vec<(Point2<f64>, [usize; 2], usize)>,
}

/// Renders the spec. Same spec, same bytes.
pub fn generate(spec: &SynthSpec) -> Result<GroundTruth> {
    validate(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let (w, h) = (spec.width, spec.height);

    // units to place: each isolated object alone, other groups whole
    let mut units: Vec<Placed> = Vec::new();
    for (gi, g) in spec.groups.iter().enumerate() {
        if g.arrangement == Arrangement::Isolated {
            for (oi, o) in g.objects.iter().enumerate() {
                units.push(Placed {
                    group: gi,
                    arrangement: g.arrangement,
                    capsules: vec![(oi, capsule(o, Point2::new(0.0, 0.0), o.orientation), o.class)],
                    crossings: Vec::new(),
                });
            }
        } else {
            let l = layout_group(g);
            units.push(Placed {
                group: gi,
                arrangement: g.arrangement,
                capsules: l.capsules.into_iter().map(|(i, c)| (i, c, g.objects[i].class)).collect(),
                crossings: l.crossings,
            });
        }
    }

    let gap = spec.gap as isize;
    let mut blocked = vec![false; w * h];
    for (ui, unit) in units.iter_mut().enumerate() {
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for (_, c, _) in &unit.capsules {
            let (a, b, cc, d) = c.bounds();
            x0 = x0.min(a);
            y0 = y0.min(b);
            x1 = x1.max(cc);
            y1 = y1.max(d);
        }
        let (fx, fy) = (x0.floor(), y0.floor());
        let (fw, fh) = ((x1 - fx).ceil() as usize + 1, (y1 - fy).ceil() as usize + 1);
        let mut local: Vec<Capsule> = unit.capsules.iter().map(|(_, c, _)| c.clone()).collect();
        for c in &mut local {
            c.translate(Point2::new(-fx, -fy));
        }
        let footprint: Vec<(usize, usize)> = (0..fh)
            .flat_map(|y| (0..fw).map(move |x| (x, y)))
            .filter(|&(x, y)| local.iter().any(|c| c.sample(x, y).0 > 0.0))
            .collect();
        let margin = spec.gap.max(2);
        if fw + 2 * margin > w || fh + 2 * margin > h {
            return Err(Error::LayoutFailure(format!("object group {ui} does not fit the canvas")));
        }
        let mut spot = None;
        for _ in 0..4000 {
            let ox = rng.random_range(margin..=w - margin - fw);
            let oy = rng.random_range(margin..=h - margin - fh);
            if footprint.iter().all(|&(x, y)| !blocked[(oy + y) * w + ox + x]) {
                spot = Some((ox, oy));
                break;
            }
        }
        let Some((ox, oy)) = spot else {
            return Err(Error::LayoutFailure(format!(
                "no free position for object group {ui} after 4000 attempts"
            )));
        };
        for &(x, y) in &footprint {
            let (cx, cy) = ((ox + x) as isize, (oy + y) as isize);
            for dy in -gap..=gap {
                for dx in -gap..=gap {
                    let (nx, ny) = (cx + dx, cy + dy);
                    if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h {
                        blocked[ny as usize * w + nx as usize] = true;
                    }
                }
            }
        }
        let shift = Point2::new(ox as f64 - fx, oy as f64 - fy);
        for (_, c, _) in &mut unit.capsules {
            c.translate(shift);
        }
        for cr in &mut unit.crossings {
            cr.0 = cr.0.add(shift);
        }
    }

    let mut canvas = vec![255.0f64; w * h];
    let mut objects: Vec<TruthObject> = Vec::new();
    let mut crossings = Vec::new();
    for unit in &units {
        let base = objects.len();
        let mut drawn: Vec<(usize, TruthObject)> = Vec::new();
        for (oi, c, class) in &unit.capsules {
            let (bx0, by0, bx1, by1) = c.bounds();
            let x0 = bx0.floor().max(0.0) as usize;
            let y0 = by0.floor().max(0.0) as usize;
            let x1 = (bx1.ceil() as usize).min(w - 1);
            let y1 = (by1.ceil() as usize).min(h - 1);
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let (alpha, v) = c.sample(x, y);
                    if alpha > 0.0 {
                        let px = &mut canvas[y * w + x];
                        *px = *px * (1.0 - alpha) + v * alpha;
                    }
                }
            }
            let mask = BinaryMask::from_fn(x1 - x0 + 1, y1 - y0 + 1, |x, y| c.contains(x + x0, y + y0));
            drawn.push((
                *oi,
                TruthObject {
                    class: *class,
                    group: unit.group,
                    arrangement: unit.arrangement,
                    origin: Pos::new(x0, y0),
                    mask,
                    spine: [c.a, c.mid, c.b],
                    length: c.length(),
                    width: c.radius * 2.0,
                },
            ));
        }
        drawn.sort_by_key(|(oi, _)| *oi);
        for &(pos, [a, b], top) in &unit.crossings {
            crossings.push(Crossing {
                position: pos,
                objects: [base + a, base + b],
                top: base + top,
            });
        }
        objects.extend(drawn.into_iter().map(|(_, o)| o));
    }

    let data = canvas.into_iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect();
    Ok(GroundTruth {
        metaphase: GrayImage::new(w, h, data)?,
        objects,
        crossings,
    })
}

/// Length and width of the class template: length falls linearly from 80 px
/// (class 1) to 40 px (class `classes`), width is 11 px.
pub fn class_template(class: u32, classes: u32) -> (f64, f64) {
    let span = (classes.max(2) - 1) as f64;
    let t = (class.saturating_sub(1)) as f64 / span;
    (80.0 - 40.0 * t, 11.0)
}

fn random_object(rng: &mut ChaCha8Rng, class: u32, classes: u32, max_bend: f64) -> ObjectSpec {
    let (length, width) = class_template(class, classes);
    let bend = if max_bend > 0.0 && rng.random_bool(0.4) {
        rng.random_range(0.0..max_bend)
    } else {
        0.0
    };
    ObjectSpec {
        class,
        length,
        width,
        bend,
        orientation: rng.random_range(-90.0..90.0),
        band_seed: class as u64 * 7919 + rng.random_range(0..3),
    }
}

impl SynthSpec {
    /// Two isolated objects per class on a 960 x 960 canvas.
    pub fn karyotype(seed: u64, classes: u32) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6b61_7279);
        let objects = (1..=classes)
            .flat_map(|c| [c, c])
            .map(|c| random_object(&mut rng, c, classes, 40.0))
            .collect();
        SynthSpec {
            width: 960,
            height: 960,
            rng_seed: seed,
            gap: 8,
            groups: vec![GroupSpec {
                arrangement: Arrangement::Isolated,
                objects,
                angle: default_angle(),
                top: 0,
            }],
        }
    }

    /// Karyotype whose first two objects (both class 1) cross at `angle`.
    pub fn karyotype_with_overlap(seed: u64, classes: u32, angle: f64) -> Self {
        let mut spec = Self::karyotype(seed, classes);
        let iso = &mut spec.groups[0].objects;
        let mut pair: Vec<ObjectSpec> = iso.drain(..2).collect();
        pair[0].bend = 0.0;
        pair[1].bend = 0.0;
        spec.groups.push(GroupSpec {
            arrangement: Arrangement::Overlapping,
            objects: pair,
            angle,
            top: 0,
        });
        spec
    }

    /// One crossing pair of straight chromosomes on a small canvas.
    pub fn crossing_pair(seed: u64, angle: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0c05);
        let mk = |rng: &mut ChaCha8Rng| {
            let class = rng.random_range(1..=6);
            let mut o = random_object(rng, class, 23, 0.0);
            o.length = rng.random_range(110.0..130.0);
            o
        };
        let objects = vec![mk(&mut rng), mk(&mut rng)];
        SynthSpec {
            width: 240,
            height: 240,
            rng_seed: seed,
            gap: 8,
            groups: vec![GroupSpec {
                arrangement: Arrangement::Overlapping,
                objects,
                angle,
                top: rng.random_range(0..2),
            }],
        }
    }

    /// One chromosome bent by `bend` degrees on a small canvas.
    pub fn singleton(seed: u64, bend: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5119);
        let class = rng.random_range(1..=23);
        let mut o = random_object(&mut rng, class, 23, 0.0);
        o.bend = bend;
        SynthSpec {
            width: 160,
            height: 160,
            rng_seed: seed,
            gap: 8,
            groups: vec![GroupSpec {
                arrangement: Arrangement::Isolated,
                objects: vec![o],
                angle: default_angle(),
                top: 0,
            }],
        }
    }

    pub fn object_count(&self) -> usize {
        self.groups.iter().map(|g| g.objects.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obj(class: u32, length: f64) -> ObjectSpec {
        ObjectSpec {
            class,
            length,
            width: 11.0,
            bend: 0.0,
            orientation: 10.0,
            band_seed: class as u64,
        }
    }

    #[test]
    fn karyotype_masks_are_disjoint() {
        let gt = generate(&SynthSpec::karyotype(3, 23)).unwrap();
        assert_eq!(gt.objects.len(), 46);
        assert!(gt.crossings.is_empty());
        let mut seen = vec![false; 960 * 960];
        for o in &gt.objects {
            for p in o.pixels() {
                assert!(!seen[p.y * 960 + p.x]);
                seen[p.y * 960 + p.x] = true;
            }
        }
    }

    #[test]
    fn overlap_pair_records_one_crossing() {
        let spec = SynthSpec {
            width: 200,
            height: 200,
            rng_seed: 1,
            gap: 8,
            groups: vec![GroupSpec {
                arrangement: Arrangement::Overlapping,
                objects: vec![obj(1, 70.0), obj(2, 60.0)],
                angle: 60.0,
                top: 1,
            }],
        };
        let gt = generate(&spec).unwrap();
        assert_eq!(gt.crossings.len(), 1);
        let c = &gt.crossings[0];
        assert_eq!(c.top, 1);
        let shared = gt.intersection(c);
        assert!(!shared.is_empty());
        let (cx, cy) = (c.position.x.round() as usize, c.position.y.round() as usize);
        assert!(shared.contains(&Pos::new(cx, cy)));
        let (a, b) = (gt.full_mask(0), gt.full_mask(1));
        assert_eq!(a.intersection(&b).count(), shared.len());
    }

    #[test]
    fn top_object_intensities_win_in_intersection() {
        let mut lower = obj(1, 70.0);
        lower.band_seed = 100;
        let mut upper = obj(2, 70.0);
        upper.band_seed = 200;
        let spec = SynthSpec {
            width: 200,
            height: 200,
            rng_seed: 5,
            gap: 8,
            groups: vec![GroupSpec {
                arrangement: Arrangement::Overlapping,
                objects: vec![lower, upper],
                angle: 90.0,
                top: 1,
            }],
        };
        let gt = generate(&spec).unwrap();
        let c = &gt.crossings[0];
        let (x, y) = (c.position.x.round() as usize, c.position.y.round() as usize);
        let top = BandProfile::from_seed(200).at(0.5).round() as u8;
        assert_eq!(gt.metaphase.get(x, y), top);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate(&SynthSpec::karyotype_with_overlap(11, 23, 50.0)).unwrap();
        let b = generate(&SynthSpec::karyotype_with_overlap(11, 23, 50.0)).unwrap();
        assert_eq!(a.metaphase, b.metaphase);
        assert_eq!(a.manifest(), b.manifest());
        let c = generate(&SynthSpec::karyotype_with_overlap(12, 23, 50.0)).unwrap();
        assert_ne!(a.metaphase, c.metaphase);
    }

    #[test]
    fn rendered_foreground_matches_masks() {
        let gt = generate(&SynthSpec::karyotype(4, 23)).unwrap();
        let (w, h) = (960, 960);
        let mut union = BinaryMask::empty(w, h);
        for o in &gt.objects {
            for p in o.pixels() {
                union.set(p.x, p.y, true);
            }
        }
        let near = crate::imgcore::dilate(&union, &crate::imgcore::Kernel::rect(3, 3).unwrap());
        let core = crate::imgcore::erode(&union, &crate::imgcore::Kernel::rect(3, 3).unwrap());
        for y in 0..h {
            for x in 0..w {
                let fg = gt.metaphase.get(x, y) < 250;
                if fg {
                    assert!(near.get(x, y), "stray foreground at ({x},{y})");
                }
                if core.get(x, y) {
                    assert!(fg, "missing foreground at ({x},{y})");
                }
            }
        }
    }

    #[test]
    fn touching_pair_forms_one_blob() {
        let spec = SynthSpec {
            width: 200,
            height: 200,
            rng_seed: 2,
            gap: 8,
            groups: vec![GroupSpec {
                arrangement: Arrangement::Touching,
                objects: vec![obj(1, 70.0), obj(2, 50.0)],
                angle: 90.0,
                top: 0,
            }],
        };
        let gt = generate(&spec).unwrap();
        assert!(gt.crossings.is_empty());
        let (a, b) = (gt.full_mask(0), gt.full_mask(1));
        let fg = a.union(&b);
        let labels = crate::segmentation::label_components(&fg, crate::segmentation::Connectivity::Eight);
        assert_eq!(labels.count(), 1);
        assert!(a.intersection(&b).count() < 15);
    }

    #[test]
    fn oversized_object_is_layout_failure() {
        let spec = SynthSpec {
            width: 50,
            height: 50,
            rng_seed: 0,
            gap: 8,
            groups: vec![GroupSpec {
                arrangement: Arrangement::Isolated,
                objects: vec![obj(1, 80.0)],
                angle: 60.0,
                top: 0,
            }],
        };
        assert_eq!(generate(&spec).unwrap_err().code(), "layout-failure");
    }

    #[test]
    fn spec_json_roundtrip_with_defaults() {
        let s: SynthSpec = serde_json::from_str(
            r#"{"rng_seed":4,"groups":[{"arrangement":"overlapping","objects":[{"class":1,"length":60,"width":10},{"class":2,"length":50,"width":10}]}]}"#,
        )
        .unwrap();
        assert_eq!((s.width, s.gap, s.groups[0].angle), (960, 8, 60.0));
        assert_eq!(s.object_count(), 2);
        assert!(generate(&SynthSpec { groups: vec![GroupSpec { objects: vec![], ..s.groups[0].clone() }], ..s.clone() }).is_err());
    }
}
