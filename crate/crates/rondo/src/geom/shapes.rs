//! 2D primitives: vectors, polylines with arc-length queries, simple polygons.

use std::ops::{Add, Mul, Neg, Sub};

/// A 2D point or vector in metres, map frame unless stated otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn from_heading(heading: f64) -> Self {
        Vec2::new(heading.cos(), heading.sin())
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product; positive when `o` is to the left of `self`.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        if n < 1e-12 {
            Vec2::ZERO
        } else {
            self * (1.0 / n)
        }
    }

    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Perpendicular pointing to the left of this vector.
    pub fn perp_left(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Normalize an angle to (-pi, pi].
pub fn normalize_angle(a: f64) -> f64 {
    let mut a = a % std::f64::consts::TAU;
    if a <= -std::f64::consts::PI {
        a += std::f64::consts::TAU;
    } else if a > std::f64::consts::PI {
        a -= std::f64::consts::TAU;
    }
    a
}

/// A polyline with precomputed cumulative arc lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    points: Vec<Vec2>,
    cum_len: Vec<f64>,
}

impl Polyline {
    pub fn new(points: Vec<Vec2>) -> Self {
        assert!(points.len() >= 2, "polyline needs at least 2 points");
        let mut cum_len = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        cum_len.push(0.0);
        for w in points.windows(2) {
            acc += w[0].dist(w[1]);
            cum_len.push(acc);
        }
        Polyline { points, cum_len }
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn length(&self) -> f64 {
        *self.cum_len.last().unwrap()
    }

    pub fn first(&self) -> Vec2 {
        self.points[0]
    }

    pub fn last(&self) -> Vec2 {
        *self.points.last().unwrap()
    }

    /// Position at arc length `s`, clamped to the ends.
    pub fn point_at(&self, s: f64) -> Vec2 {
        let (i, t) = self.locate(s);
        self.points[i] + (self.points[i + 1] - self.points[i]) * t
    }

    /// Unit tangent at arc length `s` (direction of the containing segment).
    pub fn tangent_at(&self, s: f64) -> Vec2 {
        let (i, _) = self.locate(s);
        (self.points[i + 1] - self.points[i]).normalized()
    }

    pub fn heading_at(&self, s: f64) -> f64 {
        self.tangent_at(s).angle()
    }

    /// Signed curvature at arc length `s`, estimated from adjacent tangents.
    pub fn curvature_at(&self, s: f64) -> f64 {
        let h = 0.5;
        let s0 = (s - h).max(0.0);
        let s1 = (s + h).min(self.length());
        if s1 - s0 < 1e-9 {
            return 0.0;
        }
        let t0 = self.tangent_at(s0);
        let t1 = self.tangent_at(s1);
        normalize_angle(t1.angle() - t0.angle()) / (s1 - s0)
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let s = s.clamp(0.0, self.length());
        // binary search for the containing segment
        let i = match self
            .cum_len
            .binary_search_by(|v| v.partial_cmp(&s).unwrap())
        {
            Ok(i) => i.min(self.points.len() - 2),
            Err(i) => i - 1,
        };
        let seg = self.cum_len[i + 1] - self.cum_len[i];
        let t = if seg < 1e-12 {
            0.0
        } else {
            (s - self.cum_len[i]) / seg
        };
        (i, t)
    }

    /// Project a point onto the polyline.
    ///
    /// Returns `(s, d)`: arc length of the closest point and the signed lateral
    /// offset, positive to the left of the travel direction. Clamps beyond the
    /// ends.
    pub fn project(&self, p: Vec2) -> (f64, f64) {
        let mut best = (0.0, f64::INFINITY, 0.0); // (s, dist_sq, signed d)
        for i in 0..self.points.len() - 1 {
            let a = self.points[i];
            let b = self.points[i + 1];
            let ab = b - a;
            let len_sq = ab.norm_sq();
            if len_sq < 1e-18 {
                continue;
            }
            let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
            let q = a + ab * t;
            let dist_sq = (p - q).norm_sq();
            if dist_sq < best.1 {
                let s = self.cum_len[i] + ab.norm() * t;
                let side = ab.normalized().cross(p - q);
                let d = dist_sq.sqrt() * if side >= 0.0 { 1.0 } else { -1.0 };
                best = (s, dist_sq, d);
            }
        }
        (best.0, best.2)
    }

    /// Resample so consecutive points are at most `max_spacing` apart.
    pub fn resampled(&self, max_spacing: f64) -> Polyline {
        let n = (self.length() / max_spacing).ceil().max(1.0) as usize;
        let step = self.length() / n as f64;
        let pts = (0..=n).map(|i| self.point_at(i as f64 * step)).collect();
        Polyline::new(pts)
    }

    /// Sub-polyline between arc lengths `s0 <= s1`.
    pub fn slice(&self, s0: f64, s1: f64) -> Polyline {
        let s0 = s0.clamp(0.0, self.length());
        let s1 = s1.clamp(0.0, self.length());
        assert!(s1 >= s0);
        let mut pts = vec![self.point_at(s0)];
        for (i, &c) in self.cum_len.iter().enumerate() {
            if c > s0 + 1e-9 && c < s1 - 1e-9 {
                pts.push(self.points[i]);
            }
        }
        pts.push(self.point_at(s1));
        if pts.len() < 2 {
            pts.push(self.point_at(s1));
        }
        Polyline::new(pts)
    }

    /// Polyline with every point offset laterally; positive to the left.
    pub fn offset(&self, d: f64) -> Polyline {
        let pts = (0..self.points.len())
            .map(|i| {
                let s = self.cum_len[i];
                let t = self.tangent_at(s.min(self.length() - 1e-9).max(0.0));
                self.points[i] + t.perp_left() * d
            })
            .collect();
        Polyline::new(pts)
    }

    pub fn reversed(&self) -> Polyline {
        let mut pts = self.points.clone();
        pts.reverse();
        Polyline::new(pts)
    }
}

/// A simple (non-self-intersecting) polygon. Vertices in order, implicitly closed.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Vec2>,
}

impl Polygon {
    pub fn new(vertices: Vec<Vec2>) -> Self {
        assert!(vertices.len() >= 3, "polygon needs at least 3 vertices");
        Polygon { vertices }
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    /// Even-odd containment test. Points exactly on an edge may land on either side.
    pub fn contains(&self, p: Vec2) -> bool {
        let mut inside = false;
        let n = self.vertices.len();
        let mut j = n - 1;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[j];
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    /// Euclidean distance from `p` to the polygon boundary.
    pub fn boundary_distance(&self, p: Vec2) -> f64 {
        let n = self.vertices.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            best = best.min(segment_distance(p, a, b));
        }
        best
    }

    pub fn bbox(&self) -> (Vec2, Vec2) {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
        }
        (lo, hi)
    }
}

pub fn segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq < 1e-18 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn project_on_straight_line() {
        let pl = Polyline::new(vec![Vec2::ZERO, Vec2::new(10.0, 0.0)]);
        let (s, d) = pl.project(Vec2::new(5.0, 1.0));
        assert!((s - 5.0).abs() < 1e-12);
        assert!((d - 1.0).abs() < 1e-12, "left offset is positive, got {d}");
        let (s, d) = pl.project(Vec2::new(0.0, 0.0));
        assert_eq!((s, d), (0.0, 0.0));
    }

    #[test]
    fn project_clamps_beyond_ends() {
        let pl = Polyline::new(vec![Vec2::ZERO, Vec2::new(10.0, 0.0)]);
        let (s, _) = pl.project(Vec2::new(12.0, 0.5));
        assert!((s - 10.0).abs() < 1e-12);
    }

    #[test]
    fn polygon_contains_square() {
        let sq = Polygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(4.0, 0.0),
            Vec2::new(4.0, 4.0),
            Vec2::new(0.0, 4.0),
        ]);
        assert!(sq.contains(Vec2::new(2.0, 2.0)));
        assert!(!sq.contains(Vec2::new(5.0, 2.0)));
        assert!((sq.boundary_distance(Vec2::new(2.0, 2.0)) - 2.0).abs() < 1e-12);
        assert!((sq.boundary_distance(Vec2::new(6.0, 2.0)) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn angle_normalization() {
        assert!((normalize_angle(3.0 * std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
        assert!(normalize_angle(-std::f64::consts::PI) > 0.0);
    }

    #[test]
    fn slice_preserves_geometry() {
        let pl = Polyline::new(vec![
            Vec2::ZERO,
            Vec2::new(5.0, 0.0),
            Vec2::new(10.0, 0.0),
        ]);
        let sub = pl.slice(2.0, 8.0);
        assert!((sub.length() - 6.0).abs() < 1e-9);
        assert!(sub.first().dist(Vec2::new(2.0, 0.0)) < 1e-9);
        assert!(sub.last().dist(Vec2::new(8.0, 0.0)) < 1e-9);
    }
}
