//! Per-region training-camera sets (base, extended, border) and clipping of primitives to
//! their region for seamless merging.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::Vector2;
use rayon::prelude::*;

use crate::division::SceneDivision;
use crate::error::{Error, Result};
use crate::geometry::{cross, edges, polygon_contains};
use crate::sfm::{Camera, CameraId, PointId, SceneModel};
use crate::splat::GaussianScene;
use crate::Real;

pub const DEFAULT_TAU_EXT: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct RegionCameraSets {
    pub region_id: usize,
    pub base: BTreeSet<CameraId>,
    pub extended: BTreeSet<CameraId>,
    pub border: BTreeSet<CameraId>,
    pub tau_ext: f64,
}

/// Region of every sparse point (prism location of its ground projection).
pub fn point_regions(model: &SceneModel, division: &SceneDivision) -> BTreeMap<PointId, usize> {
    model
        .points()
        .points
        .iter()
        .map(|(id, p)| (*id, division.locate_region(&p.position)))
        .collect()
}

fn ratio_from(cam: &Camera, region: usize, located: &BTreeMap<PointId, usize>) -> f64 {
    let inside = cam.observed_points.iter().filter(|p| located.get(p) == Some(&region)).count();
    inside as f64 / cam.observed_points.len().max(1) as f64
}

/// Fraction of the camera's observed sparse points that lie inside `region`.
pub fn region_visibility_ratio(model: &SceneModel, division: &SceneDivision, region: usize, cam: CameraId) -> Result<f64> {
    let r = division.region(region)?;
    if r.camera_ids.contains(&cam) {
        return Err(Error::Precondition(format!("camera {cam} belongs to region {region}")));
    }
    let cam = model.camera(cam)?;
    let located: BTreeMap<PointId, usize> = cam
        .observed_points
        .iter()
        .map(|pid| (*pid, division.locate_region(&model.points().points[pid].position)))
        .collect();
    Ok(ratio_from(cam, region, &located))
}

fn ray_hits_segment(origin: &Vector2<f64>, dir: &Vector2<f64>, a: &Vector2<f64>, b: &Vector2<f64>) -> bool {
    let e = b - a;
    let denom = cross(dir, &e);
    let ao = a - origin;
    if denom.abs() < 1e-15 {
        // Parallel: hit only if collinear and some endpoint lies ahead.
        return cross(&ao, dir).abs() < 1e-12 && (ao.dot(dir) >= 0.0 || (b - origin).dot(dir) >= 0.0);
    }
    let t = cross(&ao, &e) / denom;
    let s = cross(&ao, dir) / denom;
    t >= 0.0 && (0.0..=1.0).contains(&s)
}

/// Does the horizontal view wedge of `cam` (field of view widened by `margin_deg`) reach
/// the polygon?
pub fn camera_faces_polygon(
    division: &SceneDivision,
    cam: &Camera,
    polygon: &[Vector2<f64>],
    margin_deg: f64,
) -> bool {
    if polygon.is_empty() {
        return false;
    }
    let c = division.project(&cam.position);
    let fwd = cam.forward();
    let f = Vector2::new(division.ground_basis[0].dot(&fwd), division.ground_basis[1].dot(&fwd));
    if f.norm() < 1e-9 {
        return false;
    }
    let f = f.normalize();
    let half = 0.5 * (cam.horizontal_fov() + margin_deg.to_radians());
    if half >= std::f64::consts::PI || polygon_contains(polygon, &c, 1e-12) {
        return true;
    }
    let cos_half = half.cos();
    if polygon.iter().any(|v| {
        let d = v - c;
        let n = d.norm();
        n == 0.0 || d.dot(&f) / n >= cos_half
    }) {
        return true;
    }
    let rot = |a: f64| Vector2::new(f.x * a.cos() - f.y * a.sin(), f.x * a.sin() + f.y * a.cos());
    [rot(half), rot(-half)]
        .iter()
        .any(|d| edges(polygon).any(|(a, b)| ray_hits_segment(&c, d, &a, &b)))
}

fn select_with(
    model: &SceneModel,
    division: &SceneDivision,
    region: usize,
    tau_ext: f64,
    fov_margin_deg: f64,
    located: &BTreeMap<PointId, usize>,
) -> Result<RegionCameraSets> {
    let r = division.region(region)?;
    let base: BTreeSet<CameraId> = r.camera_ids.iter().copied().collect();
    let mut extended = BTreeSet::new();
    let mut border = BTreeSet::new();
    for cam in model.cameras() {
        if base.contains(&cam.id) {
            continue;
        }
        if ratio_from(cam, region, located) >= tau_ext {
            extended.insert(cam.id);
        } else if camera_faces_polygon(division, cam, &r.hull, fov_margin_deg) {
            border.insert(cam.id);
        }
    }
    Ok(RegionCameraSets {
        region_id: region,
        base,
        extended,
        border,
        tau_ext,
    })
}

pub fn select_camera_sets(
    model: &SceneModel,
    division: &SceneDivision,
    region: usize,
    tau_ext: f64,
    fov_margin_deg: f64,
) -> Result<RegionCameraSets> {
    let located = point_regions(model, division);
    select_with(model, division, region, tau_ext, fov_margin_deg, &located)
}

/// Camera sets for every region, locating each sparse point once.
pub fn select_all_camera_sets(
    model: &SceneModel,
    division: &SceneDivision,
    tau_ext: f64,
    fov_margin_deg: f64,
) -> Result<Vec<RegionCameraSets>> {
    let located = point_regions(model, division);
    (0..division.regions.len())
        .into_par_iter()
        .map(|r| select_with(model, division, r, tau_ext, fov_margin_deg, &located))
        .collect()
}

/// `Σ |extended| / |cameras|` over all regions.
pub fn extended_ratio(sets: &[RegionCameraSets], camera_count: usize) -> f64 {
    sets.iter().map(|s| s.extended.len()).sum::<usize>() as f64 / camera_count.max(1) as f64
}

/// Indices of the Gaussians whose means locate to `region`, in scene order.
pub fn region_primitive_indices<T: Real>(scene: &GaussianScene<T>, division: &SceneDivision, region: usize) -> Vec<usize> {
    scene
        .gaussians
        .iter()
        .enumerate()
        .filter(|(_, g)| division.locate_region(&g.mean_f64()) == region)
        .map(|(i, _)| i)
        .collect()
}

/// Sub-scene of the Gaussians whose means lie in `region`, order preserved.
pub fn clip_primitives_to_region<T: Real>(scene: &GaussianScene<T>, division: &SceneDivision, region: usize) -> GaussianScene<T> {
    GaussianScene {
        gaussians: region_primitive_indices(scene, division, region)
            .into_iter()
            .map(|i| scene.gaussians[i].clone())
            .collect(),
    }
}
