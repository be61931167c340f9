//! Occlusion-aware scene division: cluster-count refinement, per-region boundary lines and
//! point-to-region location on the ground plane.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{Vector2, Vector3};

use crate::camera_selection::RegionCameraSets;
use crate::classifier::{train_linear_svm, SvmConfig};
use crate::error::{Error, Result};
use crate::geometry::{self, convex_hull, polygon_distance, polygon_within, HalfPlane};
use crate::sfm::{Camera, CameraId, SceneModel};
use crate::view_graph::{graph_filter, similarity_matrix, spectral_cluster, ClusterAssignment, ViewGraph};
use crate::Real;

pub const DIVISION_SCHEMA: &str = "occlupart-division/1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinementConfig {
    pub initial_k: usize,
    /// Allowed relative deviation of a cluster's camera count from the mean count.
    pub sigma_c: f64,
    pub min_cluster_floor: usize,
    pub max_recursion: usize,
    pub seed: u64,
    /// Graph-filter order used when a cluster is split.
    pub filter_order: usize,
}

impl Default for RefinementConfig {
    fn default() -> Self {
        Self {
            initial_k: 10,
            sigma_c: 0.5,
            min_cluster_floor: 3,
            max_recursion: 8,
            seed: 0,
            filter_order: crate::view_graph::DEFAULT_FILTER_ORDER,
        }
    }
}

impl RefinementConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_c > 0.0 && self.sigma_c < 1.0) {
            return Err(Error::Precondition(format!("sigma_c = {} must lie in (0, 1)", self.sigma_c)));
        }
        if self.initial_k == 0 || self.min_cluster_floor == 0 || self.max_recursion == 0 || self.filter_order == 0 {
            return Err(Error::Precondition("refinement counts must be positive".into()));
        }
        Ok(())
    }

    /// Inclusive camera-count range `[lower, upper]` for `k` clusters over `n` cameras.
    pub fn count_range(&self, n: usize, k: usize) -> (f64, f64) {
        let mean = n as f64 / k as f64;
        let lower = (mean - self.sigma_c * mean).max(self.min_cluster_floor as f64);
        (lower, mean + self.sigma_c * mean)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub assignment: ClusterAssignment,
    /// Set when the pass budget ran out before every cluster count was in range.
    pub warning: bool,
    pub passes: usize,
}

struct PassState {
    oversize: Vec<usize>,
    dissolve: Vec<usize>,
}

fn hulls_of<T: Real>(labels: &[usize], k: usize, ground: &[Vector2<T>]) -> Vec<Vec<Vector2<T>>> {
    let mut pts = vec![Vec::new(); k];
    for (i, &l) in labels.iter().enumerate() {
        pts[l].push(ground[i]);
    }
    pts.iter().map(|p| convex_hull(p)).collect()
}

fn inspect<T: Real>(labels: &[usize], k: usize, ground: &[Vector2<T>], cfg: &RefinementConfig, eps: T) -> PassState {
    let mut counts = vec![0usize; k];
    for &l in labels {
        counts[l] += 1;
    }
    let (lower, upper) = cfg.count_range(labels.len(), k);
    let hulls = hulls_of(labels, k, ground);
    let oversize: Vec<usize> = (0..k).filter(|&c| counts[c] as f64 > upper).collect();
    let dissolve = (0..k)
        .filter(|&c| !oversize.contains(&c))
        .filter(|&c| {
            (counts[c] as f64) < lower
                || (0..k).any(|d| {
                    d != c
                        && (counts[c] < counts[d] || (counts[c] == counts[d] && c > d))
                        && polygon_within(&hulls[c], &hulls[d], eps)
                })
        })
        .collect();
    PassState { oversize, dissolve }
}

fn centroid_of<T: Real>(labels: &[usize], cluster: usize, ground: &[Vector2<T>]) -> Option<Vector2<T>> {
    let pts: Vec<Vector2<T>> = labels
        .iter()
        .zip(ground)
        .filter(|(&l, _)| l == cluster)
        .map(|(_, p)| *p)
        .collect();
    (!pts.is_empty()).then(|| geometry::centroid(&pts))
}

/// Cluster (from `targets`) with the largest summed edge weight to node `i`; ties go to the
/// smaller cluster ID, and a node with no weight to any target joins the nearest target
/// centroid.
fn best_target<T: Real>(
    graph: &ViewGraph<T>,
    labels: &[usize],
    i: usize,
    targets: &BTreeSet<usize>,
    ground: &[Vector2<T>],
) -> usize {
    let mut weight: BTreeMap<usize, T> = targets.iter().map(|&t| (t, T::zero())).collect();
    for j in 0..graph.len() {
        if let Some(w) = weight.get_mut(&labels[j]) {
            *w += graph.adjacency[(i, j)];
        }
    }
    let mut best: Option<(usize, T)> = None;
    for (&t, &w) in &weight {
        if best.is_none_or(|(_, bw)| w > bw) {
            best = Some((t, w));
        }
    }
    match best {
        Some((t, w)) if w > T::zero() => t,
        _ => {
            let mut nearest = *targets.iter().next().expect("at least one target cluster");
            let mut nd = T::max_value().unwrap_or_else(|| T::of(f64::MAX));
            for &t in targets {
                if let Some(c) = centroid_of(labels, t, ground) {
                    let d = (c - ground[i]).norm();
                    if d < nd {
                        nd = d;
                        nearest = t;
                    }
                }
            }
            nearest
        }
    }
}

fn median_split<T: Real>(members: &[usize], ground: &[Vector2<T>]) -> Vec<bool> {
    let pts: Vec<Vector2<T>> = members.iter().map(|&i| ground[i]).collect();
    let c = geometry::centroid(&pts);
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for p in &pts {
        let d = p - c;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    let angle = T::of(0.5) * (sxy * T::of(2.0)).atan2(sxx - syy);
    let axis = Vector2::new(angle.cos(), angle.sin());
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| {
        axis.dot(&pts[a])
            .partial_cmp(&axis.dot(&pts[b]))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut side = vec![false; pts.len()];
    for &o in &order[pts.len() / 2..] {
        side[o] = true;
    }
    side
}

/// Splits `cluster` in two on its induced subgraph. Nodes isolated inside the cluster are
/// first moved to neighbouring clusters.
fn split_cluster<T: Real>(
    graph: &ViewGraph<T>,
    labels: &mut [usize],
    cluster: usize,
    new_label: usize,
    ground: &[Vector2<T>],
    cfg: &RefinementConfig,
    seed: u64,
) {
    loop {
        let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == cluster).collect();
        if members.len() < 2 {
            return;
        }
        let sub = graph.induced(&members);
        let isolated: Vec<usize> = sub
            .degrees()
            .iter()
            .enumerate()
            .filter(|(_, &d)| d <= T::zero())
            .map(|(local, _)| members[local])
            .collect();
        if !isolated.is_empty() {
            let others: BTreeSet<usize> = labels.iter().copied().filter(|&l| l != cluster).collect();
            if others.is_empty() {
                return;
            }
            for i in isolated {
                labels[i] = best_target(graph, labels, i, &others, ground);
            }
            continue;
        }
        let halves = graph_filter(&sub, cfg.filter_order)
            .map(|f| similarity_matrix(&f))
            .and_then(|w| spectral_cluster(&w, 2, seed))
            .map(|a| a.labels.iter().map(|&l| l == 1).collect::<Vec<bool>>());
        let side = match halves {
            Ok(side) => side,
            Err(e) => {
                log::warn!("spectral split failed ({e}); splitting along the principal axis");
                median_split(&members, ground)
            }
        };
        for (local, &i) in members.iter().enumerate() {
            if side[local] {
                labels[i] = new_label;
            }
        }
        return;
    }
}

/// Relabels to `0..k` preserving the relative order of existing labels.
fn compact(labels: &mut [usize]) -> usize {
    let used: BTreeSet<usize> = labels.iter().copied().collect();
    let map: BTreeMap<usize, usize> = used.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    for l in labels.iter_mut() {
        *l = map[l];
    }
    map.len()
}

/// Splits over-full clusters and dissolves under-full or hull-covered ones until every
/// camera count lies within `mean · (1 ± sigma_c)` or the pass budget is spent.
///
/// `ground` holds each node's ground-plane position (indexed like the graph).
pub fn refine_clusters<T: Real>(
    graph: &ViewGraph<T>,
    ground: &[Vector2<T>],
    initial: &ClusterAssignment,
    cfg: &RefinementConfig,
) -> Result<Refinement> {
    cfg.validate()?;
    let n = graph.len();
    if initial.labels.len() != n || ground.len() != n {
        return Err(Error::Precondition("assignment, graph and positions disagree in size".into()));
    }
    let extent = {
        let hull = convex_hull(ground);
        let mut d = T::zero();
        for a in &hull {
            for b in &hull {
                d = d.max((a - b).norm());
            }
        }
        d
    };
    let eps = extent * T::of(1e-9);

    let mut labels = initial.labels.clone();
    let mut k = compact(&mut labels);
    let mut best: Option<(usize, Vec<usize>, usize)> = None;
    for pass in 0..cfg.max_recursion {
        let state = inspect(&labels, k, ground, cfg, eps);
        let violations = state.oversize.len() + state.dissolve.len();
        if best.as_ref().is_none_or(|(v, _, _)| violations < *v) {
            best = Some((violations, labels.clone(), k));
        }
        if violations == 0 {
            return Ok(Refinement {
                assignment: ClusterAssignment { labels, k },
                warning: false,
                passes: pass,
            });
        }

        let mut next_label = k;
        for &c in &state.oversize {
            let seed = cfg.seed.wrapping_add((pass as u64) << 20).wrapping_add(c as u64);
            split_cluster(graph, &mut labels, c, next_label, ground, cfg, seed);
            next_label += 1;
        }

        let present: BTreeSet<usize> = labels.iter().copied().collect();
        let doomed: BTreeSet<usize> = state.dissolve.iter().copied().filter(|c| present.contains(c)).collect();
        let mut survivors: BTreeSet<usize> = present.difference(&doomed).copied().collect();
        let mut doomed = doomed;
        if survivors.is_empty() {
            // Keep the largest cluster so the partition stays non-empty.
            let counts = |c: usize| labels.iter().filter(|&&l| l == c).count();
            let keep = *doomed.iter().max_by_key(|&&c| (counts(c), std::cmp::Reverse(c))).unwrap();
            doomed.remove(&keep);
            survivors.insert(keep);
        }
        if !doomed.is_empty() {
            let snapshot = labels.clone();
            for i in 0..n {
                if doomed.contains(&snapshot[i]) {
                    labels[i] = best_target(graph, &snapshot, i, &survivors, ground);
                }
            }
        }
        k = compact(&mut labels);
    }

    let state = inspect(&labels, k, ground, cfg, eps);
    let violations = state.oversize.len() + state.dissolve.len();
    if violations == 0 {
        return Ok(Refinement {
            assignment: ClusterAssignment { labels, k },
            warning: false,
            passes: cfg.max_recursion,
        });
    }
    let (best_v, best_labels, best_k) = best.expect("at least one pass");
    let (labels, k) = if violations <= best_v { (labels, k) } else { (best_labels, best_k) };
    log::warn!("cluster refinement did not converge within {} passes", cfg.max_recursion);
    Ok(Refinement {
        assignment: ClusterAssignment { labels, k },
        warning: true,
        passes: cfg.max_recursion,
    })
}

// ---------------------------------------------------------------------------
// Boundaries

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryConfig {
    pub svm: SvmConfig,
    /// Hulls closer than this fraction of the scene diameter count as adjacent.
    pub proximity: f64,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        Self {
            svm: SvmConfig::default(),
            proximity: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundary {
    pub neighbor: usize,
    /// Keeps this region.
    pub plane: HalfPlane<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub id: usize,
    pub camera_ids: Vec<CameraId>,
    pub boundary: Vec<Boundary>,
    pub hull: Vec<Vector2<f64>>,
    pub centroid: Vector2<f64>,
}

impl Region {
    /// Worst boundary violation at `p` (positive outside); `0` for a region without boundaries.
    pub fn violation(&self, p: &Vector2<f64>) -> f64 {
        self.boundary
            .iter()
            .map(|b| -b.plane.signed_distance(p))
            .fold(f64::NEG_INFINITY, f64::max)
            .max(if self.boundary.is_empty() { 0.0 } else { f64::NEG_INFINITY })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneDivision {
    pub regions: Vec<Region>,
    pub up_axis: Vector3<f64>,
    pub ground_basis: [Vector3<f64>; 2],
    pub assignment: BTreeMap<CameraId, usize>,
    /// Ground-plane rectangle that bounds every region polygon.
    pub domain: [Vector2<f64>; 2],
    pub scene_diameter: f64,
    /// Poses of every divided camera, in model order.
    pub cameras: Vec<Camera>,
    /// Training-camera sets per region, when selected.
    pub camera_sets: Vec<RegionCameraSets>,
}

impl SceneDivision {
    pub fn project(&self, p: &Vector3<f64>) -> Vector2<f64> {
        Vector2::new(self.ground_basis[0].dot(p), self.ground_basis[1].dot(p))
    }

    pub fn region(&self, id: usize) -> Result<&Region> {
        self.regions.get(id).ok_or(Error::Key(id as u64))
    }

    pub fn camera(&self, id: CameraId) -> Result<&Camera> {
        self.cameras.iter().find(|c| c.id == id).ok_or(Error::Key(id as u64))
    }

    pub fn boundary_slack(&self) -> f64 {
        1e-6 * self.scene_diameter
    }

    /// The region's cell: the domain rectangle clipped by all of its half-planes.
    pub fn region_polygon(&self, id: usize) -> Result<Vec<Vector2<f64>>> {
        let region = self.region(id)?;
        let mut poly = geometry::rectangle(self.domain[0], self.domain[1]);
        for b in &region.boundary {
            poly = geometry::clip_polygon(&poly, &b.plane);
        }
        Ok(poly)
    }

    pub fn locate_region(&self, point: &Vector3<f64>) -> usize {
        self.locate_region_2d(&self.project(point))
    }

    /// Region whose half-planes all hold at `p`; otherwise (none or several) the region with
    /// the smallest worst violation, then the nearest centroid.
    pub fn locate_region_2d(&self, p: &Vector2<f64>) -> usize {
        let scores: Vec<f64> = self.regions.iter().map(|r| r.violation(p)).collect();
        let satisfied: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] <= 0.0).collect();
        if satisfied.len() == 1 {
            return satisfied[0];
        }
        let pool: Vec<usize> = if satisfied.is_empty() {
            (0..scores.len()).collect()
        } else {
            satisfied
        };
        let mut best = pool[0];
        for &r in &pool[1..] {
            let (s, bs) = (scores[r], scores[best]);
            if s < bs
                || (s == bs && (self.regions[r].centroid - p).norm() < (self.regions[best].centroid - p).norm())
            {
                best = r;
            }
        }
        best
    }
}

/// Builds regions from a labelling (indexed like `model.cameras()`), training a boundary
/// line for every pair of regions that share co-visibility or whose hulls are close.
pub fn compute_boundaries(model: &SceneModel, labels: &ClusterAssignment, cfg: &BoundaryConfig) -> Result<SceneDivision> {
    let cams = model.cameras();
    if labels.labels.len() != cams.len() {
        return Err(Error::Precondition("labels do not match the camera count".into()));
    }
    let up = model.up_axis();
    let basis = model.ground_basis();
    let ground: Vec<Vector2<f64>> = cams
        .iter()
        .map(|c| Vector2::new(basis[0].dot(&c.position), basis[1].dot(&c.position)))
        .collect();
    let k = labels.k;

    let mut lo = Vector2::repeat(f64::INFINITY);
    let mut hi = Vector2::repeat(f64::NEG_INFINITY);
    for p in &ground {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let diameter = (hi - lo).norm();
    let margin = Vector2::repeat(0.1 * diameter.max(1e-9));

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &l) in labels.labels.iter().enumerate() {
        members[l].push(i);
    }
    let pts: Vec<Vec<Vector2<f64>>> = members.iter().map(|m| m.iter().map(|&i| ground[i]).collect()).collect();
    let hulls: Vec<Vec<Vector2<f64>>> = pts.iter().map(|p| convex_hull(p)).collect();

    // Pairs joined by at least one shared sparse point.
    let index: BTreeMap<CameraId, usize> = cams.iter().enumerate().map(|(i, c)| (c.id, i)).collect();
    let mut linked: BTreeSet<(usize, usize)> = BTreeSet::new();
    for p in model.points().points.values() {
        let clusters: BTreeSet<usize> = p.observing_cameras.iter().map(|c| labels.labels[index[c]]).collect();
        let v: Vec<usize> = clusters.into_iter().collect();
        for a in 0..v.len() {
            for b in a + 1..v.len() {
                linked.insert((v[a], v[b]));
            }
        }
    }

    let mut boundaries: Vec<Vec<Boundary>> = vec![Vec::new(); k];
    for a in 0..k {
        for b in a + 1..k {
            let adjacent =
                linked.contains(&(a, b)) || polygon_distance(&hulls[a], &hulls[b]) <= cfg.proximity * diameter;
            if !adjacent {
                continue;
            }
            let plane = train_linear_svm(&pts[a], &pts[b], &cfg.svm).ok_or(Error::DegenerateBoundary(a, b))?;
            boundaries[a].push(Boundary { neighbor: b, plane });
            boundaries[b].push(Boundary {
                neighbor: a,
                plane: plane.flipped(),
            });
        }
    }

    let regions = (0..k)
        .map(|r| Region {
            id: r,
            camera_ids: members[r].iter().map(|&i| cams[i].id).collect(),
            boundary: std::mem::take(&mut boundaries[r]),
            hull: hulls[r].clone(),
            centroid: geometry::centroid(&pts[r]),
        })
        .collect();
    Ok(SceneDivision {
        regions,
        up_axis: up,
        ground_basis: basis,
        assignment: cams.iter().zip(&labels.labels).map(|(c, &l)| (c.id, l)).collect(),
        domain: [lo - margin, hi + margin],
        scene_diameter: diameter,
        cameras: cams.to_vec(),
        camera_sets: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn line_model(xs: &[f64], links: &[(usize, usize)]) -> SceneModel {
        let mut cams: Vec<Camera> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                Camera::looking(
                    i as u32,
                    Vector3::new(x, 0.1 * (i % 3) as f64, 1.5),
                    Vector3::x(),
                    Vector3::z(),
                    100.0,
                    [64, 64],
                )
            })
            .collect();
        let mut pts = BTreeMap::new();
        for (pid, &(a, b)) in links.iter().enumerate() {
            pts.insert(pid as u64, Vector3::new(0.0, 5.0, 1.0));
            cams[a].observed_points.insert(pid as u64);
            cams[b].observed_points.insert(pid as u64);
        }
        SceneModel::new(cams, pts, Some(Vector3::z())).unwrap()
    }

    #[test]
    fn single_region_has_no_boundaries() {
        let model = line_model(&[0.0, 1.0, 2.0], &[(0, 1)]);
        let div = compute_boundaries(&model, &ClusterAssignment::from_labels(&[0, 0, 0]), &BoundaryConfig::default()).unwrap();
        assert_eq!(div.regions.len(), 1);
        assert!(div.regions[0].boundary.is_empty());
        assert_eq!(div.locate_region(&Vector3::new(100.0, 0.0, 0.0)), 0);
    }

    #[test]
    fn separable_pair_splits_at_origin() {
        let xs = [-3.0, -2.5, -2.0, -1.5, -1.2, 1.2, 1.5, 2.0, 2.5, 3.0];
        let model = line_model(&xs, &[(4, 5)]);
        let labels = ClusterAssignment::from_labels(&[0, 0, 0, 0, 0, 1, 1, 1, 1, 1]);
        let div = compute_boundaries(&model, &labels, &BoundaryConfig::default()).unwrap();
        let b = div.regions[0].boundary[0];
        assert_eq!(b.neighbor, 1);
        assert!(b.plane.offset.abs() < 0.1);
        assert!(b.plane.normal.x.abs() > 5f64.to_radians().cos());
        let back = div.regions[1].boundary[0].plane;
        assert!((back.normal + b.plane.normal).norm() < 1e-9 && (back.offset + b.plane.offset).abs() < 1e-9);
        for (i, &x) in xs.iter().enumerate() {
            assert_eq!(div.locate_region(&Vector3::new(x, 0.0, 0.0)), labels.labels[i]);
        }
    }

    #[test]
    fn coincident_cameras_give_degenerate_boundary() {
        let model = line_model(&[1.0, 1.0, 1.0, 1.0], &[(1, 2)]);
        let mut m = model.clone();
        let cams: Vec<Camera> = m
            .cameras()
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.position = Vector3::new(1.0, 0.0, 1.5);
                c
            })
            .collect();
        m = SceneModel::new(cams, BTreeMap::from([(0, Vector3::zeros())]), Some(Vector3::z())).unwrap();
        let _ = model;
        let err = compute_boundaries(&m, &ClusterAssignment::from_labels(&[0, 0, 1, 1]), &BoundaryConfig::default());
        assert!(matches!(err, Err(Error::DegenerateBoundary(0, 1))));
    }

    fn block_graph(sizes: &[usize], intra: f64, inter: f64) -> (ViewGraph<f64>, Vec<usize>) {
        let n: usize = sizes.iter().sum();
        let mut block = Vec::new();
        for (b, &s) in sizes.iter().enumerate() {
            block.extend(std::iter::repeat_n(b, s));
        }
        let adj = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                0.0
            } else if block[i] == block[j] {
                intra
            } else {
                inter
            }
        });
        let feat = DMatrix::from_fn(n, 6, |i, c| ((i * (c + 1)) as f64 * 0.37).sin());
        (ViewGraph::new((0..n as u32).collect(), adj, feat).unwrap(), block)
    }

    #[test]
    fn balanced_clusters_are_a_fixed_point() {
        let (g, block) = block_graph(&[10, 12, 9], 1.0, 0.01);
        let ground: Vec<Vector2<f64>> = block
            .iter()
            .enumerate()
            .map(|(i, &b)| Vector2::new(b as f64 * 10.0 + (i % 4) as f64, (i % 3) as f64))
            .collect();
        let init = ClusterAssignment::from_labels(&block);
        let r = refine_clusters(&g, &ground, &init, &RefinementConfig::default()).unwrap();
        assert_eq!(r.assignment, init);
        assert!(!r.warning);
        assert_eq!(r.passes, 0);
    }

    #[test]
    fn count_range_matches_hand_values() {
        let cfg = RefinementConfig::default();
        let (lo, hi) = cfg.count_range(51, 3);
        assert_eq!((lo, hi), (8.5, 25.5));
    }
}
