//! Soft-margin linear classifier on planar points, trained by batch subgradient descent
//! on the regularized hinge loss.

use nalgebra::{Vector2, Vector3};

use crate::geometry::HalfPlane;
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmConfig {
    pub lambda: f64,
    pub iterations: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-2,
            iterations: 2000,
        }
    }
}

/// Trains a separating line between `positive` and `negative` and returns the half-plane
/// (unit normal) that keeps the positive side.
///
/// Points are centered and scaled to unit RMS radius before training; the bias is
/// regularized together with the weights (augmented feature). Returns `None` if all points
/// coincide or either class is empty.
pub fn train_linear_svm<T: Real>(
    positive: &[Vector2<T>],
    negative: &[Vector2<T>],
    cfg: &SvmConfig,
) -> Option<HalfPlane<T>> {
    if positive.is_empty() || negative.is_empty() {
        return None;
    }
    let m = positive.len() + negative.len();
    let mean = positive.iter().chain(negative).fold(Vector2::zeros(), |a, p| a + p) / T::of_usize(m);
    let rms = (positive
        .iter()
        .chain(negative)
        .fold(T::zero(), |a, p| a + (p - mean).norm_squared())
        / T::of_usize(m))
    .sqrt();
    if rms <= T::zero() {
        return None;
    }
    let samples: Vec<(Vector3<T>, T)> = positive
        .iter()
        .map(|p| (p, T::one()))
        .chain(negative.iter().map(|p| (p, -T::one())))
        .map(|(p, y)| {
            let q = (p - mean) / rms;
            (Vector3::new(q.x, q.y, T::one()), y)
        })
        .collect();

    let lambda = T::of(cfg.lambda);
    let inv_m = T::one() / T::of_usize(m);
    let mut w = Vector3::<T>::zeros();
    for t in 1..=cfg.iterations {
        let eta = T::one() / (lambda * T::of_usize(t));
        let mut g = w * lambda;
        for (x, y) in &samples {
            if *y * w.dot(x) < T::one() {
                g -= x * (*y * inv_m);
            }
        }
        w -= g * eta;
    }

    let wn = Vector2::new(w.x, w.y);
    let norm = wn.norm();
    let (normal, offset) = if norm > T::of(1e-12) {
        let n = wn / norm;
        (n, n.dot(&mean) - w.z * rms / norm)
    } else {
        // No direction learned: bisect the class centroids.
        let cp = positive.iter().fold(Vector2::zeros(), |a, p| a + p) / T::of_usize(positive.len());
        let cn = negative.iter().fold(Vector2::zeros(), |a, p| a + p) / T::of_usize(negative.len());
        let d = cp - cn;
        if d.norm() <= T::zero() {
            return None;
        }
        let n = d / d.norm();
        (n, n.dot(&((cp + cn) * T::of(0.5))))
    };
    Some(HalfPlane::new(normal, offset))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_separable_clusters_split_at_zero() {
        let pos: Vec<Vector2<f64>> = (0..10).map(|i| Vector2::new(1.5 + 0.1 * i as f64, (i as f64 - 4.5) * 0.3)).collect();
        let neg: Vec<Vector2<f64>> = pos.iter().map(|p| Vector2::new(-p.x, p.y)).collect();
        let hp = train_linear_svm(&pos, &neg, &SvmConfig::default()).unwrap();
        assert!(hp.offset.abs() < 0.1, "offset {}", hp.offset);
        assert!(hp.normal.x > 5f64.to_radians().cos());
        assert!(pos.iter().all(|p| hp.signed_distance(p) > 0.0));
        assert!(neg.iter().all(|p| hp.signed_distance(p) < 0.0));
    }

    #[test]
    fn coincident_points_are_degenerate() {
        let p = vec![Vector2::new(1.0f64, 1.0); 3];
        assert!(train_linear_svm(&p, &p, &SvmConfig::default()).is_none());
    }
}
