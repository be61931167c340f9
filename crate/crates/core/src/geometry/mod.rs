//! Planar geometry on the ground plane: hulls, half-planes and convex polygon clipping.

pub mod predicates;

use nalgebra::Vector2;

use crate::Real;

/// `normal · p >= offset` keeps the inside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane<T: Real> {
    pub normal: Vector2<T>,
    pub offset: T,
}

impl<T: Real> HalfPlane<T> {
    pub fn new(normal: Vector2<T>, offset: T) -> Self {
        Self { normal, offset }
    }

    /// Signed distance into the half-plane (negative outside) for unit normals.
    pub fn signed_distance(&self, p: &Vector2<T>) -> T {
        self.normal.dot(p) - self.offset
    }

    pub fn contains(&self, p: &Vector2<T>, slack: T) -> bool {
        self.signed_distance(p) >= -slack
    }

    pub fn flipped(&self) -> Self {
        Self::new(-self.normal, -self.offset)
    }

    /// The same half-plane with its boundary moved `distance` further inside.
    pub fn shifted(&self, distance: T) -> Self {
        Self::new(self.normal, self.offset + distance)
    }
}

#[inline]
pub fn cross<T: Real>(a: &Vector2<T>, b: &Vector2<T>) -> T {
    a.x * b.y - a.y * b.x
}

/// Convex hull by the monotone chain, counter-clockwise, collinear points dropped.
///
/// Fewer than three distinct points yield the distinct points themselves (a point or a
/// segment).
pub fn convex_hull<T: Real>(points: &[Vector2<T>]) -> Vec<Vector2<T>> {
    let mut pts: Vec<Vector2<T>> = points.to_vec();
    pts.sort_by(|a, b| {
        a.x.partial_cmp(&b.x)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.y.partial_cmp(&b.y).unwrap_or(std::cmp::Ordering::Equal))
    });
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: &Vector2<T>, a: &Vector2<T>, b: &Vector2<T>| cross(&(a - o), &(b - o));
    let mut lower: Vec<Vector2<T>> = Vec::with_capacity(pts.len());
    for p in &pts {
        while lower.len() >= 2 && turn(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= T::zero() {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<Vector2<T>> = Vec::with_capacity(pts.len());
    for p in pts.iter().rev() {
        while upper.len() >= 2 && turn(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= T::zero() {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        // All points collinear: keep the two extremes.
        let first = pts[0];
        let last = pts[pts.len() - 1];
        return vec![first, last];
    }
    lower
}

pub fn polygon_area<T: Real>(poly: &[Vector2<T>]) -> T {
    if poly.len() < 3 {
        return T::zero();
    }
    let mut acc = T::zero();
    for i in 0..poly.len() {
        let j = (i + 1) % poly.len();
        acc += cross(&poly[i], &poly[j]);
    }
    acc * T::of(0.5)
}

pub fn centroid<T: Real>(points: &[Vector2<T>]) -> Vector2<T> {
    if points.is_empty() {
        return Vector2::zeros();
    }
    let sum = points.iter().fold(Vector2::zeros(), |acc, p| acc + p);
    sum / T::of_usize(points.len())
}

pub fn point_segment_distance<T: Real>(p: &Vector2<T>, a: &Vector2<T>, b: &Vector2<T>) -> T {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 <= T::zero() {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(T::zero(), T::one());
    (p - (a + ab * t)).norm()
}

/// Containment in a convex counter-clockwise polygon (closed, with tolerance `eps`).
/// Degenerate polygons (a point or a segment) contain points within `eps` of them.
pub fn polygon_contains<T: Real>(poly: &[Vector2<T>], p: &Vector2<T>, eps: T) -> bool {
    match poly.len() {
        0 => false,
        1 => (p - poly[0]).norm() <= eps,
        2 => point_segment_distance(p, &poly[0], &poly[1]) <= eps,
        n => (0..n).all(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            let e = b - a;
            let len = e.norm();
            len <= T::zero() || cross(&e, &(p - a)) >= -eps * len
        }),
    }
}

pub fn point_polygon_distance<T: Real>(poly: &[Vector2<T>], p: &Vector2<T>) -> T {
    if poly.is_empty() {
        return T::max_value().unwrap_or_else(|| T::of(f64::MAX));
    }
    if polygon_contains(poly, p, T::zero()) {
        return T::zero();
    }
    edges(poly)
        .map(|(a, b)| point_segment_distance(p, &a, &b))
        .fold(T::max_value().unwrap_or_else(|| T::of(f64::MAX)), |m, d| m.min(d))
}

/// Edges of a polygon; a single point yields one zero-length edge, a segment one edge.
pub fn edges<T: Real>(poly: &[Vector2<T>]) -> impl Iterator<Item = (Vector2<T>, Vector2<T>)> + '_ {
    let n = poly.len();
    let count = match n {
        0 => 0,
        1 | 2 => 1,
        _ => n,
    };
    (0..count).map(move |i| (poly[i], poly[(i + 1) % n]))
}

fn segments_cross<T: Real>(p1: &Vector2<T>, p2: &Vector2<T>, q1: &Vector2<T>, q2: &Vector2<T>) -> bool {
    let a = [p1.x.as_f64(), p1.y.as_f64()];
    let b = [p2.x.as_f64(), p2.y.as_f64()];
    let c = [q1.x.as_f64(), q1.y.as_f64()];
    let d = [q2.x.as_f64(), q2.y.as_f64()];
    predicates::segments_intersect_robust(&a, &b, &c, &d)
}

/// Minimum distance between two convex polygons; zero when they intersect.
pub fn polygon_distance<T: Real>(a: &[Vector2<T>], b: &[Vector2<T>]) -> T {
    if a.is_empty() || b.is_empty() {
        return T::max_value().unwrap_or_else(|| T::of(f64::MAX));
    }
    if a.iter().any(|p| polygon_contains(b, p, T::zero())) || b.iter().any(|p| polygon_contains(a, p, T::zero())) {
        return T::zero();
    }
    for (p1, p2) in edges(a) {
        for (q1, q2) in edges(b) {
            if segments_cross(&p1, &p2, &q1, &q2) {
                return T::zero();
            }
        }
    }
    let mut best = T::max_value().unwrap_or_else(|| T::of(f64::MAX));
    for p in a {
        for (q1, q2) in edges(b) {
            best = best.min(point_segment_distance(p, &q1, &q2));
        }
    }
    for q in b {
        for (p1, p2) in edges(a) {
            best = best.min(point_segment_distance(q, &p1, &p2));
        }
    }
    best
}

/// Every vertex of `inner` lies in `outer`.
pub fn polygon_within<T: Real>(inner: &[Vector2<T>], outer: &[Vector2<T>], eps: T) -> bool {
    !inner.is_empty() && inner.iter().all(|p| polygon_contains(outer, p, eps))
}

/// Clips a convex polygon to a half-plane (Sutherland-Hodgman, single plane).
pub fn clip_polygon<T: Real>(poly: &[Vector2<T>], plane: &HalfPlane<T>) -> Vec<Vector2<T>> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let cur = poly[i];
        let next = poly[(i + 1) % n];
        let dc = plane.signed_distance(&cur);
        let dn = plane.signed_distance(&next);
        if dc >= T::zero() {
            out.push(cur);
        }
        if (dc >= T::zero()) != (dn >= T::zero()) {
            let t = dc / (dc - dn);
            out.push(cur + (next - cur) * t);
        }
    }
    out.dedup_by(|a, b| (*a - *b).norm() <= T::default_epsilon());
    if out.len() > 1 && (out[0] - out[out.len() - 1]).norm() <= T::default_epsilon() {
        out.pop();
    }
    out
}

pub fn rectangle<T: Real>(min: Vector2<T>, max: Vector2<T>) -> Vec<Vector2<T>> {
    vec![
        min,
        Vector2::new(max.x, min.y),
        max,
        Vector2::new(min.x, max.y),
    ]
}
