//! Gaussian-splat scenes: primitives, PLY interchange and a forward-only CPU rasterizer.

mod ply;
mod raster;

use nalgebra::{UnitQuaternion, Vector3};

use crate::error::{Error, Result};
use crate::sfm::Camera;
use crate::Real;

pub use ply::{load_ply, read_ply, save_ply, write_ply, SH_C0};
pub use raster::{rasterize, rasterize_with, ContributionMode, RasterConfig, RenderResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian3D<T: Real> {
    pub mean: Vector3<T>,
    /// Standard deviations along the local axes (not log-encoded).
    pub scale: Vector3<T>,
    pub rotation: UnitQuaternion<T>,
    pub opacity: T,
    /// Base (view-independent) color in `[0, 1]`.
    pub color: Vector3<T>,
}

impl<T: Real> Gaussian3D<T> {
    pub fn isotropic(mean: Vector3<T>, sigma: T, opacity: T, color: Vector3<T>) -> Self {
        Self {
            mean,
            scale: Vector3::repeat(sigma),
            rotation: UnitQuaternion::identity(),
            opacity,
            color,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.scale.iter().any(|&s| s <= T::zero()) {
            return Err(Error::Consistency("Gaussian scale must be positive".into()));
        }
        if !(self.opacity > T::zero() && self.opacity < T::one()) {
            return Err(Error::Consistency("Gaussian opacity must lie in (0, 1)".into()));
        }
        if (self.rotation.quaternion().norm() - T::one()).abs() > T::of(1e-6) {
            return Err(Error::Consistency("Gaussian rotation must be a unit quaternion".into()));
        }
        Ok(())
    }

    pub fn mean_f64(&self) -> Vector3<f64> {
        Vector3::new(self.mean.x.as_f64(), self.mean.y.as_f64(), self.mean.z.as_f64())
    }
}

/// Ordered Gaussians; the index of a Gaussian is its ID in visibility masks.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianScene<T: Real> {
    pub gaussians: Vec<Gaussian3D<T>>,
}

impl<T: Real> Default for GaussianScene<T> {
    fn default() -> Self {
        Self { gaussians: Vec::new() }
    }
}

impl<T: Real> GaussianScene<T> {
    pub fn new(gaussians: Vec<Gaussian3D<T>>) -> Self {
        Self { gaussians }
    }

    pub fn len(&self) -> usize {
        self.gaussians.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaussians.is_empty()
    }
}

/// Same camera turned 180° about `up` (a yaw flip about its own center).
pub fn backside_camera(cam: &Camera, up: &Vector3<f64>) -> Camera {
    let flip = UnitQuaternion::from_axis_angle(&nalgebra::Unit::new_normalize(*up), std::f64::consts::PI);
    Camera {
        rotation: flip * cam.rotation,
        ..cam.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cam_looking(f: Vector3<f64>) -> Camera {
        Camera::looking(0, Vector3::new(1.0, 2.0, 1.5), f, Vector3::z(), 100.0, [64, 64])
    }

    #[test]
    fn backside_looks_the_other_way() {
        let c = cam_looking(Vector3::x());
        let b = backside_camera(&c, &Vector3::z());
        assert!((b.forward() + Vector3::x()).norm() < 1e-12);
        assert_eq!(b.position, c.position);
        assert_eq!(b.focal, c.focal);
    }

    #[test]
    fn backside_is_an_involution() {
        let c = cam_looking(Vector3::new(0.3, -0.8, 0.2));
        let bb = backside_camera(&backside_camera(&c, &Vector3::z()), &Vector3::z());
        assert!(bb.rotation.angle_to(&c.rotation) < 1e-9);
    }

    #[test]
    fn backside_forward_reflection_identity() {
        let up = Vector3::new(0.0, 0.6, 0.8);
        let c = cam_looking(Vector3::new(0.5, 0.1, -0.4));
        let f = c.forward();
        let f2 = backside_camera(&c, &up).forward();
        assert!((f.dot(&f2) - (2.0 * f.dot(&up).powi(2) - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_bad_primitives() {
        let g = Gaussian3D::isotropic(Vector3::zeros(), 0.1f64, 0.5, Vector3::repeat(0.5));
        assert!(g.validate().is_ok());
        let mut bad = g.clone();
        bad.opacity = 1.0;
        assert!(bad.validate().is_err());
        let mut bad = g;
        bad.scale.x = 0.0;
        assert!(bad.validate().is_err());
    }
}
