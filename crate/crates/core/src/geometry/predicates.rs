//! Orientation and segment-intersection predicates.
//!
//! The generic versions work over any ordered ring, so they can be evaluated with
//! `BigRational` for exact answers. The `f64` versions use a forward error bound and
//! fall back to exact rational arithmetic when the floating-point sign is uncertain,
//! which makes them agree with the exact predicate on every input.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Zero};

/// Sign of the cross product `(b - a) x (c - a)`: `Greater` means `c` lies left of `a -> b`.
pub fn orient2d<N: Num + PartialOrd + Clone>(a: &[N; 2], b: &[N; 2], c: &[N; 2]) -> Ordering {
    let abx = b[0].clone() - a[0].clone();
    let aby = b[1].clone() - a[1].clone();
    let acx = c[0].clone() - a[0].clone();
    let acy = c[1].clone() - a[1].clone();
    let det = abx * acy - aby * acx;
    det.partial_cmp(&N::zero()).unwrap_or(Ordering::Equal)
}

fn on_segment<N: Num + PartialOrd + Clone>(a: &[N; 2], b: &[N; 2], p: &[N; 2]) -> bool {
    let within = |lo: &N, hi: &N, v: &N| {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        lo <= v && v <= hi
    };
    within(&a[0], &b[0], &p[0]) && within(&a[1], &b[1], &p[1])
}

/// Closed-segment intersection test (touching endpoints and collinear overlap count).
pub fn segments_intersect<N: Num + PartialOrd + Clone>(
    p1: &[N; 2],
    p2: &[N; 2],
    q1: &[N; 2],
    q2: &[N; 2],
) -> bool {
    segments_intersect_with(p1, p2, q1, q2, orient2d)
}

fn segments_intersect_with<N, F>(p1: &[N; 2], p2: &[N; 2], q1: &[N; 2], q2: &[N; 2], orient: F) -> bool
where
    N: Num + PartialOrd + Clone,
    F: Fn(&[N; 2], &[N; 2], &[N; 2]) -> Ordering,
{
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    let opposite = |x: Ordering, y: Ordering| {
        (x == Ordering::Greater && y == Ordering::Less) || (x == Ordering::Less && y == Ordering::Greater)
    };
    if opposite(d1, d2) && opposite(d3, d4) {
        return true;
    }
    (d1 == Ordering::Equal && on_segment(q1, q2, p1))
        || (d2 == Ordering::Equal && on_segment(q1, q2, p2))
        || (d3 == Ordering::Equal && on_segment(p1, p2, q1))
        || (d4 == Ordering::Equal && on_segment(p1, p2, q2))
}

/// Converts a finite `f64` to an exact rational.
pub fn to_rational(v: f64) -> BigRational {
    BigRational::from_float(v).unwrap_or_else(|| BigRational::from_integer(BigInt::zero()))
}

fn orient2d_exact_f64(a: &[f64; 2], b: &[f64; 2], c: &[f64; 2]) -> Ordering {
    let r = |p: &[f64; 2]| [to_rational(p[0]), to_rational(p[1])];
    orient2d(&r(a), &r(b), &r(c))
}

/// Orientation of three `f64` points, exact for all finite inputs.
pub fn orient2d_robust(a: &[f64; 2], b: &[f64; 2], c: &[f64; 2]) -> Ordering {
    let abx = b[0] - a[0];
    let aby = b[1] - a[1];
    let acx = c[0] - a[0];
    let acy = c[1] - a[1];
    let l = abx * acy;
    let r = aby * acx;
    let det = l - r;
    // Bound on the rounding error of the subtractions and products above.
    let bound = 8.0 * f64::EPSILON * (l.abs() + r.abs())
        + 4.0 * f64::EPSILON * (abx.abs() + aby.abs()) * (acx.abs() + acy.abs());
    if det > bound {
        Ordering::Greater
    } else if det < -bound {
        Ordering::Less
    } else {
        orient2d_exact_f64(a, b, c)
    }
}

/// Closed-segment intersection on `f64` coordinates, agreeing with the exact predicate.
pub fn segments_intersect_robust(p1: &[f64; 2], p2: &[f64; 2], q1: &[f64; 2], q2: &[f64; 2]) -> bool {
    segments_intersect_with(p1, p2, q1, q2, orient2d_robust)
}
