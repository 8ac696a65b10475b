//! Planar geometry over any floating-point scalar.

use num_traits::Float;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Float> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Point2 { x, y }
    }

    pub fn sub(self, o: Self) -> Self {
        Point2::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(self, o: Self) -> Self {
        Point2::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, s: T) -> Self {
        Point2::new(self.x * s, self.y * s)
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 2-D cross product.
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Self) -> T {
        self.sub(o).norm()
    }
}

/// Rectangle of size `width` x `height` centred at `center`; the `width` side
/// runs along `angle` degrees (canonicalised to `[-45, 45)`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotatedRect<T> {
    pub center: Point2<T>,
    pub width: T,
    pub height: T,
    pub angle: T,
}

impl<T: Float> RotatedRect<T> {
    pub fn area(&self) -> T {
        self.width * self.height
    }

    fn axes(&self) -> (Point2<T>, Point2<T>) {
        let a = self.angle.to_radians();
        let u = Point2::new(a.cos(), a.sin());
        (u, Point2::new(-u.y, u.x))
    }

    pub fn corners(&self) -> [Point2<T>; 4] {
        let (u, n) = self.axes();
        let two = T::one() + T::one();
        let hu = u.scale(self.width / two);
        let hn = n.scale(self.height / two);
        let c = self.center;
        [
            c.sub(hu).sub(hn),
            c.add(hu).sub(hn),
            c.add(hu).add(hn),
            c.sub(hu).add(hn),
        ]
    }

    pub fn contains(&self, p: Point2<T>, eps: T) -> bool {
        let (u, n) = self.axes();
        let d = p.sub(self.center);
        let two = T::one() + T::one();
        d.dot(u).abs() <= self.width / two + eps && d.dot(n).abs() <= self.height / two + eps
    }

    /// Longer side length.
    pub fn length(&self) -> T {
        self.width.max(self.height)
    }
}

/// Convex hull by Andrew's monotone chain, counter-clockwise (in a y-up frame)
/// without collinear vertices.
pub fn convex_hull<T: Float>(points: &[Point2<T>]) -> Vec<Point2<T>> {
    let mut pts: Vec<Point2<T>> = points.iter().copied().filter(|p| p.x.is_finite() && p.y.is_finite()).collect();
    pts.sort_by(|a, b| {
        a.x.partial_cmp(&b.x)
            .unwrap()
            .then(a.y.partial_cmp(&b.y).unwrap())
    });
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: Point2<T>, a: Point2<T>, b: Point2<T>| a.sub(o).cross(b.sub(o));
    let mut hull: Vec<Point2<T>> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= T::zero() {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= T::zero() {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

fn canonical<T: Float>(center: Point2<T>, mut width: T, mut height: T, mut angle: T) -> RotatedRect<T> {
    let ninety = T::from(90.0).unwrap();
    let fortyfive = T::from(45.0).unwrap();
    while angle >= fortyfive {
        angle = angle - ninety;
        std::mem::swap(&mut width, &mut height);
    }
    while angle < -fortyfive {
        angle = angle + ninety;
        std::mem::swap(&mut width, &mut height);
    }
    RotatedRect {
        center,
        width,
        height,
        angle,
    }
}

/// Minimum-area enclosing rectangle by rotating calipers over the convex hull.
///
/// Collinear input yields a rectangle of the point span with its thickness
/// snapped to 1; a single distinct point yields a unit square. Returns `None`
/// for empty input.
pub fn min_area_rect<T: Float>(points: &[Point2<T>]) -> Option<RotatedRect<T>> {
    let hull = convex_hull(points);
    let one = T::one();
    let two = one + one;
    match hull.len() {
        0 => return None,
        1 => return Some(canonical(hull[0], one, one, T::zero())),
        2 => {
            let d = hull[1].sub(hull[0]);
            let len = d.norm().max(one);
            let angle = d.y.atan2(d.x).to_degrees();
            let center = hull[0].add(hull[1]).scale(one / two);
            return Some(canonical(center, len, one, angle));
        }
        _ => {}
    }

    let h = hull.len();
    let at = |i: usize| hull[i % h];
    let frame = |i: usize| {
        let e = at(i + 1).sub(at(i));
        let u = e.scale(one / e.norm());
        (u, Point2::new(-u.y, u.x))
    };

    let (u0, n0) = frame(0);
    let argbest = |f: &dyn Fn(Point2<T>) -> T| {
        (0..h).fold(0, |best, i| if f(hull[i]) > f(hull[best]) { i } else { best })
    };
    let mut k = argbest(&|p| p.dot(u0));
    let mut j = argbest(&|p| p.dot(n0));
    let mut m = argbest(&|p| -p.dot(u0));

    let mut best: Option<(T, RotatedRect<T>)> = None;
    for i in 0..h {
        let (u, n) = frame(i);
        let origin = at(i);
        let pu = |q: Point2<T>| q.sub(origin).dot(u);
        let pn = |q: Point2<T>| q.sub(origin).dot(n);
        for _ in 0..h {
            if pu(at(k + 1)) > pu(at(k)) { k = (k + 1) % h } else { break }
        }
        for _ in 0..h {
            if pn(at(j + 1)) > pn(at(j)) { j = (j + 1) % h } else { break }
        }
        for _ in 0..h {
            if pu(at(m + 1)) < pu(at(m)) { m = (m + 1) % h } else { break }
        }
        let (lo, hi, depth) = (pu(at(m)), pu(at(k)), pn(at(j)));
        let area = (hi - lo) * depth;
        if best.as_ref().is_none_or(|(a, _)| area < *a) {
            let center = origin
                .add(u.scale((lo + hi) / two))
                .add(n.scale(depth / two));
            let angle = u.y.atan2(u.x).to_degrees();
            best = Some((area, canonical(center, hi - lo, depth, angle)));
        }
    }
    best.map(|(_, r)| r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> Point2<f64> {
        Point2::new(x, y)
    }

    fn box_area(points: &[Point2<f64>], a: f64) -> f64 {
        let (u, n) = (p(a.cos(), a.sin()), p(-a.sin(), a.cos()));
        let (mut ul, mut uh, mut nl, mut nh) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for q in points {
            ul = ul.min(q.dot(u));
            uh = uh.max(q.dot(u));
            nl = nl.min(q.dot(n));
            nh = nh.max(q.dot(n));
        }
        (uh - ul) * (nh - nl)
    }

    /// Exhaustive 0.1 degree sweep of bounding-box orientations.
    fn sweep_min_area(points: &[Point2<f64>]) -> f64 {
        (0..1800)
            .map(|s| box_area(points, (s as f64 * 0.1).to_radians()))
            .fold(f64::MAX, f64::min)
    }

    /// Every direction through two input points; the optimum is among them.
    fn pairwise_min_area(points: &[Point2<f64>]) -> f64 {
        let mut best = f64::MAX;
        for a in points {
            for b in points {
                if a != b {
                    best = best.min(box_area(points, (b.y - a.y).atan2(b.x - a.x)));
                }
            }
        }
        best
    }

    #[test]
    fn hull_of_square_with_interior_points() {
        let pts = [p(0., 0.), p(2., 0.), p(2., 2.), p(0., 2.), p(1., 1.), p(1., 0.)];
        let hull = convex_hull(&pts);
        assert_eq!(hull.len(), 4);
        assert!(!hull.contains(&p(1., 1.)));
        assert!(!hull.contains(&p(1., 0.)));
    }

    #[test]
    fn axis_aligned_rectangle_is_its_own_rect() {
        let pts = [p(0., 0.), p(10., 0.), p(10., 4.), p(0., 4.)];
        let r = min_area_rect(&pts).unwrap();
        assert_relative_eq!(r.area(), 40.0, epsilon = 1e-9);
        assert_relative_eq!(r.angle, 0.0, epsilon = 1e-9);
        assert_relative_eq!(r.width, 10.0, epsilon = 1e-9);
        assert_relative_eq!(r.height, 4.0, epsilon = 1e-9);
        assert_relative_eq!(r.center.x, 5.0, epsilon = 1e-9);
        assert_relative_eq!(r.center.y, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn diamond_gives_45_degree_rect() {
        let s = 5.0 * 2f64.sqrt();
        let pts = [p(0., -s), p(s, 0.), p(0., s), p(-s, 0.)];
        let r = min_area_rect(&pts).unwrap();
        assert_relative_eq!(r.angle.abs(), 45.0, epsilon = 1e-9);
        let oracle = sweep_min_area(&pts);
        assert!((r.area() - oracle).abs() / oracle < 0.01);
        assert_relative_eq!(r.area(), 100.0, epsilon = 1e-9);
    }

    #[test]
    fn collinear_points_snap_thickness() {
        let r = min_area_rect(&[p(1., 1.), p(3., 1.), p(7., 1.)]).unwrap();
        assert_relative_eq!(r.width, 6.0);
        assert_relative_eq!(r.height, 1.0);
        assert_relative_eq!(r.center.x, 4.0);
    }

    #[test]
    fn works_for_f32() {
        let pts = [
            Point2::new(0f32, 0.),
            Point2::new(3., 0.),
            Point2::new(3., 1.),
            Point2::new(0., 1.),
        ];
        assert!((min_area_rect(&pts).unwrap().area() - 3.0).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn matches_angle_sweep_and_encloses(raw in proptest::collection::vec((-50i32..50, -50i32..50), 3..40)) {
            let pts: Vec<Point2<f64>> = raw.iter().map(|&(x, y)| p(x as f64, y as f64)).collect();
            let hull = convex_hull(&pts);
            prop_assume!(hull.len() >= 3);
            let r = min_area_rect(&pts).unwrap();
            for q in &pts {
                prop_assert!(r.contains(*q, 1e-6));
            }
            prop_assert!(r.area() <= sweep_min_area(&pts) + 1e-6);
            prop_assert!((r.area() - pairwise_min_area(&pts)).abs() < 1e-6);
            prop_assert!(r.angle >= -45.0 && r.angle < 45.0);
        }
    }
}
