//! Planar primitives: points, 2x2 matrices, convex polygons.
//!
//! Orientation tests go through the `robust` adaptive predicates so hull
//! construction never flips on near-collinear input.

use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2 { x: a[0], y: a[1] }
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector at angle `theta`.
    pub fn polar(theta: f64) -> Self {
        Vec2::new(theta.cos(), theta.sin())
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Counter-clockwise rotation by a right angle.
    pub fn rot90(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    fn coord(self) -> robust::Coord<f64> {
        robust::Coord { x: self.x, y: self.y }
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

/// Row-major 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    pub fn identity() -> Self {
        Mat2::new(1.0, 0.0, 0.0, 1.0)
    }

    /// Outer product `a b^T`.
    pub fn outer(a: Vec2, b: Vec2) -> Self {
        Mat2::new(a.x * b.x, a.x * b.y, a.y * b.x, a.y * b.y)
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2::new(self.a11 * v.x + self.a12 * v.y, self.a21 * v.x + self.a22 * v.y)
    }

    /// Bilinear form `a^T H b`.
    pub fn form(&self, a: Vec2, b: Vec2) -> f64 {
        a.dot(self.apply(b))
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn max_abs(&self) -> f64 {
        self.a11.abs().max(self.a12.abs()).max(self.a21.abs()).max(self.a22.abs())
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a11 + o.a11, self.a12 + o.a12, self.a21 + o.a21, self.a22 + o.a22)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a11 - o.a11, self.a12 - o.a12, self.a21 - o.a21, self.a22 - o.a22)
    }
}

/// Exact sign of the orientation of (a, b, c): positive if counter-clockwise.
pub fn orient2d(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    robust::orient2d(a.coord(), b.coord(), c.coord())
}

/// Compensated (Neumaier) summation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in it {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Signed shoelace area (positive for counter-clockwise order).
pub fn signed_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    // Shift to the first vertex to limit cancellation.
    let o = poly[0];
    let terms = (1..n - 1).map(|i| (poly[i] - o).cross(poly[i + 1] - o));
    0.5 * neumaier_sum(terms)
}

pub fn area(poly: &[Vec2]) -> f64 {
    signed_area(poly).abs()
}

pub fn centroid(poly: &[Vec2]) -> Vec2 {
    let n = poly.len();
    if n == 0 {
        return Vec2::ZERO;
    }
    if n < 3 {
        return poly.iter().fold(Vec2::ZERO, |s, &p| s + p) / n as f64;
    }
    let o = poly[0];
    let mut acc = Vec2::ZERO;
    let mut a2 = 0.0;
    for i in 1..n - 1 {
        let c = (poly[i] - o).cross(poly[i + 1] - o);
        acc += (poly[i] - o + poly[i + 1] - o) * c;
        a2 += c;
    }
    if a2.abs() < f64::MIN_POSITIVE {
        return poly.iter().fold(Vec2::ZERO, |s, &p| s + p) / n as f64;
    }
    o + acc / (3.0 * a2)
}

/// Keep the part of a convex polygon where `<n, x> <= c` (Sutherland-Hodgman, one plane).
pub fn clip_halfplane(poly: &[Vec2], n: Vec2, c: f64) -> Vec<Vec2> {
    let len = poly.len();
    if len == 0 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(len + 1);
    for i in 0..len {
        let p = poly[i];
        let q = poly[(i + 1) % len];
        let dp = n.dot(p) - c;
        let dq = n.dot(q) - c;
        if dp <= 0.0 {
            out.push(p);
        }
        if (dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0) {
            let t = dp / (dp - dq);
            out.push(p + (q - p) * t);
        }
    }
    dedupe_ring(&mut out, 0.0);
    out
}

/// Remove consecutive duplicates (within `tol`) from a closed ring.
pub fn dedupe_ring(ring: &mut Vec<Vec2>, tol: f64) {
    if ring.is_empty() {
        return;
    }
    let mut out: Vec<Vec2> = Vec::with_capacity(ring.len());
    for &p in ring.iter() {
        if out.last().map_or(true, |&l| (l - p).norm() > tol) {
            out.push(p);
        }
    }
    while out.len() > 1 && (out[0] - *out.last().unwrap()).norm() <= tol {
        out.pop();
    }
    *ring = out;
}

/// Convex hull in counter-clockwise order, collinear points dropped (monotone chain).
pub fn convex_hull(points: &[Vec2]) -> Vec<Vec2> {
    let mut pts: Vec<Vec2> = points.iter().copied().filter(|p| p.is_finite()).collect();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Vec2> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && orient2d(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Vec2> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && orient2d(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Outward normal of edge `a -> b` of a counter-clockwise polygon (not normalized).
pub fn edge_normal(a: Vec2, b: Vec2) -> Vec2 {
    let d = b - a;
    Vec2::new(d.y, -d.x)
}

/// Point-in-convex-polygon test with absolute slack `tol` measured as a distance.
pub fn contains_convex(poly: &[Vec2], x: Vec2, tol: f64) -> bool {
    let n = poly.len();
    if n == 0 {
        return false;
    }
    if n == 1 {
        return (poly[0] - x).norm() <= tol;
    }
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let d = b - a;
        let len = d.norm();
        if len == 0.0 {
            continue;
        }
        if d.cross(x - a) < -tol * len {
            return false;
        }
        if n == 2 {
            break;
        }
    }
    if n == 2 {
        // Segment: also bound along the segment direction.
        let d = poly[1] - poly[0];
        let t = (x - poly[0]).dot(d) / d.norm2();
        let len = d.norm();
        let off = (x - poly[0]).cross(d).abs() / len;
        return off <= tol && t >= -tol / len && t <= 1.0 + tol / len;
    }
    true
}

/// Intersection of two convex polygons (both counter-clockwise).
pub fn convex_intersection(p: &[Vec2], q: &[Vec2]) -> Vec<Vec2> {
    let mut out = p.to_vec();
    let n = q.len();
    for i in 0..n {
        if out.is_empty() {
            break;
        }
        let a = q[i];
        let b = q[(i + 1) % n];
        let nrm = edge_normal(a, b);
        out = clip_halfplane(&out, nrm, nrm.dot(a));
    }
    out
}

/// Axis-aligned bounding box as (min, max).
pub fn bbox(points: &[Vec2]) -> (Vec2, Vec2) {
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Vec2> {
        vec![Vec2::new(-1.0, -1.0), Vec2::new(1.0, -1.0), Vec2::new(1.0, 1.0), Vec2::new(-1.0, 1.0)]
    }

    #[test]
    fn shoelace_square() {
        assert_eq!(signed_area(&square()), 4.0);
        let mut cw = square();
        cw.reverse();
        assert_eq!(signed_area(&cw), -4.0);
    }

    #[test]
    fn clip_square_in_half() {
        let half = clip_halfplane(&square(), Vec2::new(1.0, 0.0), 0.0);
        assert!((area(&half) - 2.0).abs() < 1e-15);
        let none = clip_halfplane(&square(), Vec2::new(1.0, 0.0), -2.0);
        assert!(none.is_empty() || area(&none) == 0.0);
    }

    #[test]
    fn hull_drops_interior_and_collinear() {
        let mut pts = square();
        pts.push(Vec2::new(0.0, 0.0));
        pts.push(Vec2::new(0.0, -1.0));
        pts.push(Vec2::new(1.0, 1.0));
        let h = convex_hull(&pts);
        assert_eq!(h.len(), 4);
        assert!(signed_area(&h) > 0.0);
    }

    #[test]
    fn containment_and_intersection() {
        let sq = square();
        assert!(contains_convex(&sq, Vec2::new(0.5, 0.5), 0.0));
        assert!(contains_convex(&sq, Vec2::new(1.0, 0.0), 0.0));
        assert!(!contains_convex(&sq, Vec2::new(1.1, 0.0), 1e-3));
        let shifted: Vec<Vec2> = sq.iter().map(|&p| p + Vec2::new(1.0, 1.0)).collect();
        let i = convex_intersection(&sq, &shifted);
        assert!((area(&i) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(neumaier_sum(xs), 2.0);
    }

    #[test]
    fn centroid_of_square() {
        let c = centroid(&square());
        assert!(c.norm() < 1e-15);
    }
}
