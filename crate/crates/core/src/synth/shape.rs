use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Point2;

type P = Point2<f64>;

/// Two-segment spine of a chromosome, bent by `bend` degrees at its midpoint.
#[derive(Debug, Clone)]
pub(crate) struct Capsule {
    pub a: P,
    pub mid: P,
    pub b: P,
    pub radius: f64,
    pub profile: BandProfile,
}

pub(crate) fn dir(deg: f64) -> P {
    let r = deg.to_radians();
    Point2::new(r.cos(), r.sin())
}

impl Capsule {
    /// Spine centred (by arc length) at `center`.
    pub fn new(center: P, length: f64, width: f64, bend: f64, orientation: f64, profile: BandProfile) -> Self {
        let half = length / 2.0;
        let a = center.sub(dir(orientation - bend / 2.0).scale(half));
        let b = center.add(dir(orientation + bend / 2.0).scale(half));
        Capsule {
            a,
            mid: center,
            b,
            radius: width / 2.0,
            profile,
        }
    }

    pub fn length(&self) -> f64 {
        self.a.distance(self.mid) + self.mid.distance(self.b)
    }

    /// Point at arc-length fraction `t` of the spine.
    pub fn point_at(&self, t: f64) -> P {
        let s = t * self.length();
        let l1 = self.a.distance(self.mid);
        if s <= l1 {
            self.a.add(self.mid.sub(self.a).scale(s / l1.max(1e-12)))
        } else {
            let l2 = self.mid.distance(self.b);
            self.mid.add(self.b.sub(self.mid).scale((s - l1) / l2.max(1e-12)))
        }
    }

    /// Distance to the spine and arc length of the nearest spine point.
    pub fn locate(&self, p: P) -> (f64, f64) {
        let seg = |u: P, v: P| {
            let d = v.sub(u);
            let len2 = d.dot(d);
            let t = if len2 == 0.0 { 0.0 } else { (p.sub(u).dot(d) / len2).clamp(0.0, 1.0) };
            (p.distance(u.add(d.scale(t))), t * len2.sqrt())
        };
        let (d1, s1) = seg(self.a, self.mid);
        let (d2, s2) = seg(self.mid, self.b);
        if d1 <= d2 {
            (d1, s1)
        } else {
            (d2, self.a.distance(self.mid) + s2)
        }
    }

    /// Pixel-centre coverage in [0, 1] and band intensity at pixel (x, y).
    pub fn sample(&self, x: usize, y: usize) -> (f64, f64) {
        let (d, s) = self.locate(Point2::new(x as f64, y as f64));
        let alpha = (self.radius + 0.5 - d).clamp(0.0, 1.0);
        (alpha, self.profile.at(s / self.length().max(1e-12)))
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.locate(Point2::new(x as f64, y as f64)).0 <= self.radius
    }

    /// Pixel bounding box `(x0, y0, x1, y1)` inclusive, clipped at 0.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        let r = self.radius + 1.0;
        let xs = [self.a.x, self.mid.x, self.b.x];
        let ys = [self.a.y, self.mid.y, self.b.y];
        let min = |v: [f64; 3]| v.iter().copied().fold(f64::MAX, f64::min);
        let max = |v: [f64; 3]| v.iter().copied().fold(f64::MIN, f64::max);
        (min(xs) - r, min(ys) - r, max(xs) + r, max(ys) + r)
    }

    pub fn translate(&mut self, d: P) {
        self.a = self.a.add(d);
        self.mid = self.mid.add(d);
        self.b = self.b.add(d);
    }
}

/// Piecewise-constant dark/light bands along the spine, fraction in [0, 1].
#[derive(Debug, Clone)]
pub(crate) struct BandProfile {
    edges: Vec<f64>,
    values: Vec<f64>,
}

impl BandProfile {
    pub fn from_seed(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(4..=8);
        let mut edges: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.08..0.92)).collect();
        edges.sort_by(f64::total_cmp);
        let values = (0..n)
            .map(|i| {
                if i % 2 == 0 {
                    rng.random_range(120.0..165.0)
                } else {
                    rng.random_range(50.0..95.0)
                }
            })
            .collect();
        BandProfile { edges, values }
    }

    pub fn at(&self, t: f64) -> f64 {
        let i = self.edges.iter().take_while(|&&e| e <= t).count();
        self.values[i]
    }
}
