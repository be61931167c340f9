use std::collections::BTreeMap;

use nalgebra::{Vector2, Vector3};
use occlupart::division::{Boundary, Region, SceneDivision};
use occlupart::geometry::{convex_hull, polygon_area, HalfPlane};
use occlupart::splat::{rasterize, rasterize_with, Gaussian3D, GaussianScene, RasterConfig};
use occlupart::synth::{generate_scene_with, two_room_plan, SynthConfig};
use occlupart::visibility::{
    camera_visibility, compute_all_masks, compute_region_mask, compute_subregion_masks, render_culled, subdivide_region,
    subdivision_within_region, MaskConfig,
};
use occlupart::{divide, Camera, Error, MaskSet, PipelineConfig, SceneModel, SubRegionTag, VisibilityMask};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cam_at(id: u32, x: f64, y: f64, forward: Vector3<f64>) -> Camera {
    Camera::looking(id, Vector3::new(x, y, 1.5), forward, Vector3::z(), 32.0, [64, 64])
}

/// Regions separated by vertical lines `x = cuts[i]`, laid out left to right inside the
/// domain `[lo, hi]`; `cams[r]` holds the ground positions of region `r`'s cameras.
fn strip_division(cuts: &[f64], lo: [f64; 2], hi: [f64; 2], cams: &[Vec<(f64, f64)>]) -> (SceneModel, SceneDivision) {
    let mut cameras = Vec::new();
    let mut assignment = BTreeMap::new();
    let mut regions = Vec::new();
    for (r, list) in cams.iter().enumerate() {
        let mut ids = Vec::new();
        for &(x, y) in list {
            let id = cameras.len() as u32;
            cameras.push(cam_at(id, x, y, Vector3::x()));
            assignment.insert(id, r);
            ids.push(id);
        }
        let mut boundary = Vec::new();
        if r > 0 {
            boundary.push(Boundary {
                neighbor: r - 1,
                plane: HalfPlane::new(Vector2::new(1.0, 0.0), cuts[r - 1]),
            });
        }
        if r < cuts.len() {
            boundary.push(Boundary {
                neighbor: r + 1,
                plane: HalfPlane::new(Vector2::new(-1.0, 0.0), -cuts[r]),
            });
        }
        let pts: Vec<Vector2<f64>> = list.iter().map(|&(x, y)| Vector2::new(x, y)).collect();
        regions.push(Region {
            id: r,
            camera_ids: ids,
            boundary,
            hull: convex_hull(&pts),
            centroid: pts.iter().sum::<Vector2<f64>>() / pts.len().max(1) as f64,
        });
    }
    let model = SceneModel::new(cameras.clone(), BTreeMap::new(), Some(Vector3::z())).unwrap();
    let diameter = (Vector2::from(hi) - Vector2::from(lo)).norm();
    let division = SceneDivision {
        regions,
        up_axis: Vector3::z(),
        ground_basis: [Vector3::x(), Vector3::y()],
        assignment,
        domain: [Vector2::from(lo), Vector2::from(hi)],
        scene_diameter: diameter,
        cameras,
        camera_sets: Vec::new(),
    };
    (model, division)
}

fn square_fixture() -> (SceneModel, SceneDivision) {
    strip_division(
        &[0.0],
        [-10.0, 0.0],
        [10.0, 10.0],
        &[vec![(-5.0, 5.0), (-6.0, 4.0)], vec![(0.0, 0.0), (10.0, 10.0), (10.0, 0.0), (0.0, 10.0), (5.0, 5.0)]],
    )
}

fn x_extent(poly: &[Vector2<f64>]) -> (f64, f64) {
    poly.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.x), b.max(p.x)))
}

#[test]
fn square_region_border_strip_is_a_tenth_of_the_diagonal() {
    let (model, div) = square_fixture();
    let sub = subdivide_region(&div, &model, 1).unwrap();
    let d_max = 10.0 * 2f64.sqrt();
    assert!((sub.d_max - d_max).abs() < 1e-12);
    assert_eq!(sub.border_strips.len(), 1);
    let (neighbor, strip) = &sub.border_strips[0];
    assert_eq!(*neighbor, 0);
    let (x0, x1) = x_extent(strip);
    assert!(x0.abs() < 1e-12);
    assert!((x1 - 0.1 * d_max).abs() < 1e-9 && (x1 - 1.414).abs() < 1e-3);
    let (i0, i1) = x_extent(&sub.interior_polygon);
    assert!((i0 - x1).abs() < 1e-9 && (i1 - 10.0).abs() < 1e-12);
    // Interior and strip tile the region cell.
    let total = polygon_area(&sub.interior_polygon) + polygon_area(strip);
    assert!((total - polygon_area(&sub.polygon)).abs() < 1e-9);
    assert!(subdivision_within_region(&sub, 1e-9));
}

#[test]
fn isolated_region_cannot_be_subdivided() {
    let (model, div) = strip_division(&[], [0.0, 0.0], [10.0, 10.0], &[vec![(1.0, 1.0), (5.0, 5.0)]]);
    assert!(matches!(subdivide_region(&div, &model, 0), Err(Error::Precondition(_))));
}

#[test]
fn narrow_region_between_two_boundaries_collapses() {
    // Region 1 is 1 wide but its cameras span 20 along y, so each side shrinks by 2.
    let (model, div) = strip_division(
        &[0.0, 1.0],
        [-5.0, 0.0],
        [6.0, 20.0],
        &[vec![(-3.0, 5.0)], vec![(0.5, 0.0), (0.5, 20.0)], vec![(4.0, 5.0)]],
    );
    assert!(matches!(subdivide_region(&div, &model, 1), Err(Error::InteriorCollapsed(1))));
    let scene = GaussianScene::<f64>::new(vec![Gaussian3D::isotropic(Vector3::new(3.0, 5.0, 1.5), 0.2, 0.5, Vector3::repeat(0.5))]);
    let cfg = MaskConfig {
        render_size: (32, 32),
        ..MaskConfig::default()
    };
    // The collapsed region keeps only its whole mask.
    let set = compute_all_masks(&scene, &model, &div, &cfg).unwrap();
    assert!(set.get(1, SubRegionTag::Whole).is_some());
    assert!(set.masks.iter().all(|m| m.region_id != 1 || m.sub_region == SubRegionTag::Whole));
}

fn scattered_scene(rng: &mut ChaCha8Rng, n: usize) -> GaussianScene<f64> {
    GaussianScene::new(
        (0..n)
            .map(|_| {
                Gaussian3D::isotropic(
                    Vector3::new(rng.random_range(-12.0..22.0), rng.random_range(-5.0..15.0), rng.random_range(0.0..3.0)),
                    rng.random_range(0.1..0.8),
                    rng.random_range(0.02..0.95),
                    Vector3::new(rng.random(), rng.random(), rng.random()),
                )
            })
            .collect(),
    )
}

#[test]
fn all_interior_cameras_give_interior_equal_to_whole() {
    let (model, div) = strip_division(
        &[0.0],
        [-10.0, 0.0],
        [10.0, 10.0],
        &[vec![(-5.0, 5.0), (-6.0, 4.0)], vec![(5.0, 2.0), (6.0, 8.0), (8.0, 5.0)]],
    );
    let sub = subdivide_region(&div, &model, 1).unwrap();
    for c in &div.regions[1].camera_ids {
        let p = div.project(&model.camera(*c).unwrap().position);
        assert_eq!(sub.attribute(&p, 1e-9), SubRegionTag::Interior);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let scene = scattered_scene(&mut rng, 80);
    let cfg = MaskConfig {
        render_size: (48, 48),
        ..MaskConfig::default()
    };
    let whole = compute_region_mask(&scene, &model, &div, 1, &cfg).unwrap();
    let subs = compute_subregion_masks(&scene, &model, &div, 1, &cfg).unwrap();
    assert_eq!(subs.len(), 2);
    for m in &subs {
        assert_eq!(m.bits, whole.bits, "{:?}", m.sub_region);
    }
}

#[test]
fn sub_region_masks_union_to_the_whole_mask() {
    let (model, div) = square_fixture();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let scene = scattered_scene(&mut rng, 120);
    let cfg = MaskConfig {
        render_size: (48, 48),
        ..MaskConfig::default()
    };
    let whole = compute_region_mask(&scene, &model, &div, 1, &cfg).unwrap();
    let subs = compute_subregion_masks(&scene, &model, &div, 1, &cfg).unwrap();
    let mut union = vec![false; scene.len()];
    for m in &subs {
        assert!(m.is_subset_of(&whole));
        for (u, b) in union.iter_mut().zip(&m.bits) {
            *u |= *b;
        }
    }
    assert_eq!(union, whole.bits);
    let set = compute_all_masks(&scene, &model, &div, &cfg).unwrap();
    assert_eq!(set.get(1, SubRegionTag::Whole).unwrap().bits, whole.bits);
    for m in &subs {
        assert_eq!(set.get(1, m.sub_region).unwrap(), m);
    }
}

#[test]
fn region_without_cameras_is_degenerate() {
    let (model, div) = strip_division(&[0.0], [-10.0, 0.0], [10.0, 10.0], &[vec![(-5.0, 5.0)], vec![]]);
    let scene = GaussianScene::<f64>::new(vec![Gaussian3D::isotropic(Vector3::new(3.0, 5.0, 1.5), 0.2, 0.5, Vector3::repeat(0.5))]);
    assert!(matches!(
        compute_region_mask(&scene, &model, &div, 1, &MaskConfig::default()),
        Err(Error::DegenerateRegion(1))
    ));
}

#[test]
fn half_weight_gaussian_sets_its_bit() {
    // One Gaussian on a pixel centre: α·T = 0.5 there.
    let cam = Camera::looking(0, Vector3::zeros(), Vector3::x(), Vector3::z(), 20.0, [33, 33]);
    let scene = GaussianScene::<f64>::new(vec![Gaussian3D::isotropic(Vector3::new(4.0, 0.0, 0.0), 0.3, 0.5, Vector3::repeat(1.0))]);
    let cfg = MaskConfig {
        render_size: (33, 33),
        ..MaskConfig::default()
    };
    assert_eq!(rasterize(&scene, &cam, 33, 33).max_weight[0], 0.5);
    assert_eq!(camera_visibility(&scene, &cam, &Vector3::z(), &cfg), vec![true]);
    let strict = MaskConfig { threshold: 0.5, ..cfg };
    assert_eq!(camera_visibility(&scene, &cam, &Vector3::z(), &strict), vec![false]);
}

#[test]
fn gaussian_behind_an_opaque_wall_is_cleared() {
    let cam = Camera::looking(0, Vector3::zeros(), Vector3::x(), Vector3::z(), 32.0, [64, 64]);
    let target = Gaussian3D::isotropic(Vector3::new(6.0, 0.2, -0.3), 0.15, 0.9, Vector3::new(1.0, 0.0, 0.0));
    let mut gaussians = vec![target];
    // A sheet of opaque splats at x = 3 covering the whole field of view.
    for iy in -30..=30 {
        for iz in -30..=30 {
            gaussians.push(Gaussian3D::isotropic(
                Vector3::new(3.0, 0.2 * iy as f64, 0.2 * iz as f64),
                0.15,
                0.99,
                Vector3::repeat(0.4),
            ));
        }
    }
    let cfg = MaskConfig {
        render_size: (64, 64),
        ..MaskConfig::default()
    };
    let walled = GaussianScene::<f64>::new(gaussians);
    let bits = camera_visibility(&walled, &cam, &Vector3::z(), &cfg);
    assert!(!bits[0]);
    let r = rasterize(&walled, &cam, 64, 64);
    assert!(r.max_weight[0] < 0.01, "{}", r.max_weight[0]);
    let open = GaussianScene::<f64>::new(vec![walled.gaussians[0].clone()]);
    assert!(camera_visibility(&open, &cam, &Vector3::z(), &cfg)[0]);
}

#[test]
fn zero_threshold_keeps_every_contributing_gaussian() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut scene = scattered_scene(&mut rng, 60);
    // A faint splat alone in front of the camera.
    scene.gaussians.push(Gaussian3D::isotropic(Vector3::new(-4.0, 5.0, 1.5), 0.3, 0.005, Vector3::repeat(1.0)));
    let cam = cam_at(0, -8.0, 5.0, Vector3::x());
    let zero = MaskConfig {
        threshold: 0.0,
        render_size: (48, 48),
        ..MaskConfig::default()
    };
    let bits = camera_visibility(&scene, &cam, &Vector3::z(), &zero);
    let front = rasterize_with(&scene, &cam, 48, 48, None, &zero.raster);
    let back = rasterize_with(&scene, &occlupart::backside_camera(&cam, &Vector3::z()), 48, 48, None, &zero.raster);
    for i in 0..scene.len() {
        assert_eq!(bits[i], front.max_weight[i] > 0.0 || back.max_weight[i] > 0.0);
    }
    let last = scene.len() - 1;
    assert!(bits[last]);
    let default = MaskConfig {
        render_size: (48, 48),
        ..MaskConfig::default()
    };
    assert!(!camera_visibility(&scene, &cam, &Vector3::z(), &default)[last]);
}

#[test]
fn all_ones_mask_renders_identically() {
    let (model, div) = square_fixture();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let scene = scattered_scene(&mut rng, 100);
    let n = scene.len();
    let masks = MaskSet {
        n_gaussians: n,
        masks: (0..2)
            .map(|r| VisibilityMask {
                region_id: r,
                sub_region: SubRegionTag::Whole,
                polygon: div.region_polygon(r).unwrap(),
                bits: vec![true; n],
            })
            .collect(),
    };
    let cam = model.camera(4).unwrap();
    let culled = render_culled(&scene, &div, &masks, cam, (40, 40), &RasterConfig::default());
    let full = rasterize(&scene, cam, 40, 40);
    assert_eq!(culled.result.image, full.image);
    assert_eq!(culled.culled, 0);
    assert_eq!(culled.region, 1);
    assert_eq!(culled.sub_region, Some(SubRegionTag::Whole));
}

#[test]
fn missing_or_mismatched_masks_fall_back() {
    let (model, div) = square_fixture();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let scene = scattered_scene(&mut rng, 50);
    let cam = model.camera(3).unwrap();
    let full = rasterize(&scene, cam, 32, 32);
    let empty = MaskSet {
        n_gaussians: scene.len(),
        masks: Vec::new(),
    };
    let r = render_culled(&scene, &div, &empty, cam, (32, 32), &RasterConfig::default());
    assert_eq!(r.sub_region, None);
    assert_eq!(r.result.image, full.image);
    let wrong = MaskSet {
        n_gaussians: 3,
        masks: vec![VisibilityMask {
            region_id: 1,
            sub_region: SubRegionTag::Whole,
            polygon: div.region_polygon(1).unwrap(),
            bits: vec![false; 3],
        }],
    };
    assert_eq!(render_culled(&scene, &div, &wrong, cam, (32, 32), &RasterConfig::default()).sub_region, None);
    // With real masks, a camera in the strip picks the border mask.
    let cfg = MaskConfig {
        render_size: (32, 32),
        ..MaskConfig::default()
    };
    let set = compute_all_masks(&scene, &model, &div, &cfg).unwrap();
    let in_strip = cam_at(99, 0.5, 5.0, Vector3::x());
    let r = render_culled(&scene, &div, &set, &in_strip, (32, 32), &RasterConfig::default());
    assert_eq!((r.region, r.sub_region), (1, Some(SubRegionTag::Border(0))));
    let mask = set.get(1, SubRegionTag::Border(0)).unwrap();
    assert_eq!(r.culled, scene.len() - mask.count());
}

#[test]
fn mask_sets_round_trip_on_disk() {
    let scene = generate_scene_with(&two_room_plan(1), &SynthConfig { cams_per_room: 12, ..SynthConfig::two_room(1) }).unwrap();
    let cfg = PipelineConfig {
        initial_k: 2,
        ..PipelineConfig::default()
    };
    let div = divide(&scene.model, &cfg).unwrap().division;
    let mask_cfg = MaskConfig {
        render_size: (40, 40),
        ..MaskConfig::default()
    };
    let set = compute_all_masks(&scene.gaussians, &scene.model, &div, &mask_cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("masks.bin");
    set.save(&path).unwrap();
    assert_eq!(MaskSet::load(&path).unwrap(), set);
    // Sub-region union identity on the doorway fixture.
    for r in 0..div.regions.len() {
        let whole = set.get(r, SubRegionTag::Whole).unwrap();
        let mut union = vec![false; set.n_gaussians];
        for m in set.masks.iter().filter(|m| m.region_id == r && m.sub_region != SubRegionTag::Whole) {
            for (u, b) in union.iter_mut().zip(&m.bits) {
                *u |= *b;
            }
        }
        assert_eq!(&union, &whole.bits);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn lowering_the_threshold_never_clears_bits(seed in 0u64..10_000, t1 in 0.0f64..0.2, dt in 0.0f64..0.3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scene = scattered_scene(&mut rng, 60);
        let cam = cam_at(0, rng.random_range(-8.0..8.0), rng.random_range(0.0..10.0), Vector3::new(1.0, rng.random_range(-1.0..1.0), 0.0));
        let low = MaskConfig { threshold: t1, render_size: (32, 32), ..MaskConfig::default() };
        let high = MaskConfig { threshold: t1 + dt, ..low.clone() };
        let a = camera_visibility(&scene, &cam, &Vector3::z(), &low);
        let b = camera_visibility(&scene, &cam, &Vector3::z(), &high);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(*x || !*y);
        }
    }
}
