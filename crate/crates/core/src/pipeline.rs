//! End-to-end division pipeline, baseline partitioners and accuracy scoring.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, Vector2};
use serde::{Deserialize, Serialize};

use crate::camera_selection::{extended_ratio, select_all_camera_sets, DEFAULT_TAU_EXT};
use crate::classifier::SvmConfig;
use crate::division::{compute_boundaries, refine_clusters, BoundaryConfig, Refinement, RefinementConfig, SceneDivision};
use crate::error::{Error, Result};
use crate::kmeans::{kmeans, KMeansConfig};
use crate::sfm::{CameraId, SceneModel};
use crate::splat::RasterConfig;
use crate::view_graph::{
    build_view_graph, graph_filter, similarity_matrix, spectral_cluster, ClusterAssignment, DEFAULT_FILTER_ORDER,
    DEFAULT_PE_FREQUENCIES,
};
use crate::visibility::{MaskConfig, DEFAULT_RENDER_SIZE, DEFAULT_THRESHOLD};

/// Every tunable of the pipeline; serialized into each output for provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub initial_k: usize,
    pub sigma_c: f64,
    pub min_cluster_floor: usize,
    pub max_recursion: usize,
    pub seed: u64,
    pub pe_frequencies: usize,
    pub filter_order: usize,
    pub tau_ext: f64,
    pub fov_margin_deg: f64,
    pub threshold: f64,
    pub render_size: [usize; 2],
    pub svm_lambda: f64,
    pub svm_iterations: usize,
    pub proximity: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let refine = RefinementConfig::default();
        let svm = SvmConfig::default();
        Self {
            initial_k: refine.initial_k,
            sigma_c: refine.sigma_c,
            min_cluster_floor: refine.min_cluster_floor,
            max_recursion: refine.max_recursion,
            seed: refine.seed,
            pe_frequencies: DEFAULT_PE_FREQUENCIES,
            filter_order: DEFAULT_FILTER_ORDER,
            tau_ext: DEFAULT_TAU_EXT,
            fov_margin_deg: 0.0,
            threshold: DEFAULT_THRESHOLD,
            render_size: [DEFAULT_RENDER_SIZE.0, DEFAULT_RENDER_SIZE.1],
            svm_lambda: svm.lambda,
            svm_iterations: svm.iterations,
            proximity: BoundaryConfig::default().proximity,
        }
    }
}

impl PipelineConfig {
    pub fn refinement(&self) -> RefinementConfig {
        RefinementConfig {
            initial_k: self.initial_k,
            sigma_c: self.sigma_c,
            min_cluster_floor: self.min_cluster_floor,
            max_recursion: self.max_recursion,
            seed: self.seed,
            filter_order: self.filter_order,
        }
    }

    pub fn boundary(&self) -> BoundaryConfig {
        BoundaryConfig {
            svm: SvmConfig {
                lambda: self.svm_lambda,
                iterations: self.svm_iterations,
            },
            proximity: self.proximity,
        }
    }

    pub fn mask(&self) -> MaskConfig {
        MaskConfig {
            threshold: self.threshold,
            render_size: (self.render_size[0], self.render_size[1]),
            raster: RasterConfig::default(),
        }
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

#[derive(Debug, Clone)]
pub struct DivisionOutcome {
    pub division: SceneDivision,
    pub initial: ClusterAssignment,
    pub refinement: Refinement,
}

fn ground_positions(model: &SceneModel) -> Vec<Vector2<f64>> {
    let basis = model.ground_basis();
    model
        .cameras()
        .iter()
        .map(|c| Vector2::new(basis[0].dot(&c.position), basis[1].dot(&c.position)))
        .collect()
}

/// Spectral clustering of the filtered view graph, refinement, boundaries and camera sets.
pub fn divide(model: &SceneModel, cfg: &PipelineConfig) -> Result<DivisionOutcome> {
    let graph = build_view_graph::<f64>(model, cfg.pe_frequencies)?;
    let filtered = graph_filter(&graph, cfg.filter_order)?;
    let w = similarity_matrix(&filtered);
    let k = cfg.initial_k.min(graph.len());
    let initial = spectral_cluster(&w, k, cfg.seed)?;
    let refinement = refine_clusters(&graph, &ground_positions(model), &initial, &cfg.refinement())?;
    let division = finish_division(model, &refinement.assignment, cfg)?;
    Ok(DivisionOutcome {
        division,
        initial,
        refinement,
    })
}

/// Boundaries and camera sets for a given labelling.
pub fn finish_division(model: &SceneModel, labels: &ClusterAssignment, cfg: &PipelineConfig) -> Result<SceneDivision> {
    let mut division = compute_boundaries(model, labels, &cfg.boundary())?;
    division.camera_sets = select_all_camera_sets(model, &division, cfg.tau_ext, cfg.fov_margin_deg)?;
    Ok(division)
}

/// Uniform `cols × rows` grid over the cameras' ground bounding box; empty cells are dropped.
pub fn grid_labels(model: &SceneModel, cols: usize, rows: usize) -> ClusterAssignment {
    let ground = ground_positions(model);
    let mut lo = Vector2::repeat(f64::INFINITY);
    let mut hi = Vector2::repeat(f64::NEG_INFINITY);
    for p in &ground {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let span = (hi - lo).map(|v| if v > 0.0 { v } else { 1.0 });
    let cell = |v: f64, n: usize| ((v * n as f64).floor() as usize).min(n - 1);
    let raw: Vec<usize> = ground
        .iter()
        .map(|p| {
            let q = (p - lo).component_div(&span);
            cell(q.y, rows) * cols + cell(q.x, cols)
        })
        .collect();
    compact(&raw)
}

/// Relabels to `0..k` in increasing order of the original labels.
fn compact(raw: &[usize]) -> ClusterAssignment {
    let used: std::collections::BTreeSet<usize> = raw.iter().copied().collect();
    let map: BTreeMap<usize, usize> = used.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    ClusterAssignment {
        labels: raw.iter().map(|l| map[l]).collect(),
        k: map.len(),
    }
}

/// k-means on raw ground positions.
pub fn position_kmeans_labels(model: &SceneModel, k: usize, seed: u64) -> Result<ClusterAssignment> {
    let ground = ground_positions(model);
    let n = ground.len();
    if k == 0 || k > n {
        return Err(Error::Precondition(format!("need 1 <= K <= n, got K = {k}, n = {n}")));
    }
    let data = DMatrix::from_fn(n, 2, |i, j| ground[i][j]);
    let result = kmeans(&data, k, seed, &KMeansConfig::default())?;
    Ok(ClusterAssignment::from_labels(&result.labels))
}

/// Fraction of cameras whose cluster's majority room is their own room.
pub fn room_accuracy(model: &SceneModel, labels: &ClusterAssignment, camera_room: &BTreeMap<CameraId, usize>) -> f64 {
    let cams = model.cameras();
    let mut tally: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (c, &l) in cams.iter().zip(&labels.labels) {
        *tally.entry((l, camera_room[&c.id])).or_default() += 1;
    }
    let mut best: BTreeMap<usize, usize> = BTreeMap::new();
    for ((l, _), n) in tally {
        let e = best.entry(l).or_default();
        *e = (*e).max(n);
    }
    best.values().sum::<usize>() as f64 / cams.len().max(1) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodReport {
    pub method: String,
    pub regions: usize,
    pub extended_ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub room_accuracy: Option<f64>,
}

pub struct BaselineComparison {
    pub reports: Vec<MethodReport>,
    pub divisions: Vec<(String, SceneDivision)>,
}

/// Our division next to the 3×3 grid and position k-means (with our final region count).
pub fn compare_baselines(
    model: &SceneModel,
    cfg: &PipelineConfig,
    camera_room: Option<&BTreeMap<CameraId, usize>>,
) -> Result<BaselineComparison> {
    let ours = divide(model, cfg)?;
    let k = ours.refinement.assignment.k;
    let runs = vec![
        ("occlusion-aware".to_string(), ours.refinement.assignment.clone(), Some(ours.division)),
        ("grid-3x3".to_string(), grid_labels(model, 3, 3), None),
        ("position-kmeans".to_string(), position_kmeans_labels(model, k, cfg.seed)?, None),
    ];
    let mut reports = Vec::new();
    let mut divisions = Vec::new();
    for (name, labels, division) in runs {
        let division = match division {
            Some(d) => d,
            None => finish_division(model, &labels, cfg)?,
        };
        reports.push(MethodReport {
            method: name.clone(),
            regions: labels.k,
            extended_ratio: extended_ratio(&division.camera_sets, model.cameras().len()),
            room_accuracy: camera_room.map(|t| room_accuracy(model, &labels, t)),
        });
        divisions.push((name, division));
    }
    Ok(BaselineComparison { reports, divisions })
}
