//! Attributed view graph, graph-convolution smoothing and spectral clustering of cameras.
//!
//! Nodes are cameras, edge weights are co-visibility counts and node features are
//! positionally encoded camera positions. Features are low-pass filtered with
//! `(I - L_s / 2)^r`, turned into an affinity `(|H| + |H^T|) / 2` with `H = X̄ X̄^T`, and the
//! affinity is clustered with a normalized spectral embedding followed by k-means.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::kmeans::{kmeans, KMeansConfig};
use crate::sfm::{CameraId, SceneModel};
use crate::Real;

pub const DEFAULT_PE_FREQUENCIES: usize = 10;
pub const DEFAULT_FILTER_ORDER: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct ViewGraph<T: Real> {
    pub node_ids: Vec<CameraId>,
    /// Symmetric, non-negative, zero diagonal.
    pub adjacency: DMatrix<T>,
    /// One row per node.
    pub features: DMatrix<T>,
}

impl<T: Real> ViewGraph<T> {
    pub fn new(node_ids: Vec<CameraId>, adjacency: DMatrix<T>, features: DMatrix<T>) -> Result<Self> {
        let n = node_ids.len();
        if adjacency.nrows() != n || adjacency.ncols() != n || features.nrows() != n {
            return Err(Error::Precondition("view graph dimensions disagree".into()));
        }
        let tol = T::of(1e-12);
        for i in 0..n {
            if adjacency[(i, i)] != T::zero() {
                return Err(Error::Precondition(format!("nonzero diagonal at node {}", node_ids[i])));
            }
            for j in 0..i {
                let (a, b) = (adjacency[(i, j)], adjacency[(j, i)]);
                if a < T::zero() || (a - b).abs() > tol {
                    return Err(Error::Precondition("adjacency must be symmetric and non-negative".into()));
                }
            }
        }
        Ok(Self {
            node_ids,
            adjacency,
            features,
        })
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn degrees(&self) -> Vec<T> {
        (0..self.len()).map(|i| self.adjacency.row(i).sum()).collect()
    }

    /// Subgraph on the given node indices (in that order).
    pub fn induced(&self, nodes: &[usize]) -> Self {
        let m = nodes.len();
        let adjacency = DMatrix::from_fn(m, m, |i, j| self.adjacency[(nodes[i], nodes[j])]);
        let features = DMatrix::from_fn(m, self.features.ncols(), |i, c| self.features[(nodes[i], c)]);
        Self {
            node_ids: nodes.iter().map(|&i| self.node_ids[i]).collect(),
            adjacency,
            features,
        }
    }
}

/// Node features after graph filtering.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredFeatures<T: Real> {
    pub matrix: DMatrix<T>,
    pub filter_order: usize,
}

/// Cluster index per node, every index in `[0, k)` used at least once.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub k: usize,
}

impl ClusterAssignment {
    /// Relabels clusters in order of first appearance so that equal partitions compare equal.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let labels: Vec<usize> = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Self { k: map.len(), labels }
    }

    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.k];
        for &l in &self.labels {
            c[l] += 1;
        }
        c
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == cluster)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// `[sin(2^l π p), cos(2^l π p)]` for `l = 0..frequencies`, coordinate by coordinate.
pub fn positional_encoding<T: Real>(p: &[T; 3], frequencies: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(6 * frequencies);
    for &x in p {
        let mut scale = T::pi();
        for _ in 0..frequencies {
            let a = scale * x;
            out.push(a.sin());
            out.push(a.cos());
            scale *= T::of(2.0);
        }
    }
    out
}

/// Affinely maps camera positions into `[-1, 1]^3` using their bounding box.
/// Axes with zero extent map to 0.
pub fn normalized_positions<T: Real>(model: &SceneModel) -> Vec<[T; 3]> {
    let cams = model.cameras();
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for c in cams {
        for k in 0..3 {
            lo[k] = lo[k].min(c.position[k]);
            hi[k] = hi[k].max(c.position[k]);
        }
    }
    cams.iter()
        .map(|c| {
            let mut p = [T::zero(); 3];
            for k in 0..3 {
                let ext = hi[k] - lo[k];
                if ext > 0.0 {
                    let center = 0.5 * (hi[k] + lo[k]);
                    p[k] = T::of(2.0 * (c.position[k] - center) / ext);
                }
            }
            p
        })
        .collect()
}

pub fn build_view_graph<T: Real>(model: &SceneModel, pe_frequencies: usize) -> Result<ViewGraph<T>> {
    let n = model.cameras().len();
    if n < 2 {
        return Err(Error::DegenerateGraph("a view graph needs at least two cameras".into()));
    }
    if pe_frequencies == 0 {
        return Err(Error::Precondition("pe_frequencies must be positive".into()));
    }
    let counts = model.covisibility_matrix();
    if counts.iter().all(|row| row.iter().all(|&c| c == 0)) {
        return Err(Error::DegenerateGraph("no co-visibility between any cameras".into()));
    }
    let adjacency = DMatrix::from_fn(n, n, |i, j| T::of_usize(counts[i][j]));
    let d = 6 * pe_frequencies;
    let mut features = DMatrix::zeros(n, d);
    for (i, p) in normalized_positions::<T>(model).iter().enumerate() {
        for (c, v) in positional_encoding(p, pe_frequencies).into_iter().enumerate() {
            features[(i, c)] = v;
        }
    }
    ViewGraph::new(model.camera_ids(), adjacency, features)
}

fn inv_sqrt_degrees<T: Real>(graph: &ViewGraph<T>) -> Result<Vec<T>> {
    graph
        .degrees()
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            if d > T::zero() {
                Ok(T::one() / d.sqrt())
            } else {
                Err(Error::IsolatedNode(graph.node_ids[i]))
            }
        })
        .collect()
}

/// `D^{-1/2} A D^{-1/2}`.
fn normalized_adjacency<T: Real>(graph: &ViewGraph<T>) -> Result<DMatrix<T>> {
    let s = inv_sqrt_degrees(graph)?;
    let n = graph.len();
    Ok(DMatrix::from_fn(n, n, |i, j| s[i] * graph.adjacency[(i, j)] * s[j]))
}

/// Symmetrically normalized Laplacian `I - D^{-1/2} A D^{-1/2}`.
pub fn normalized_laplacian<T: Real>(graph: &ViewGraph<T>) -> Result<DMatrix<T>> {
    let s = normalized_adjacency(graph)?;
    Ok(DMatrix::identity(graph.len(), graph.len()) - s)
}

/// Applies `(I - L_s / 2)^r` to every feature column by `r` repeated products.
pub fn graph_filter<T: Real>(graph: &ViewGraph<T>, r: usize) -> Result<FilteredFeatures<T>> {
    if r == 0 {
        return Err(Error::Precondition("filter order must be at least 1".into()));
    }
    // I - L_s/2 = (I + D^{-1/2} A D^{-1/2}) / 2
    let s = normalized_adjacency(graph)?;
    let half = T::of(0.5);
    let mut x = graph.features.clone();
    for _ in 0..r {
        let sx = &s * &x;
        x = (x + sx) * half;
    }
    Ok(FilteredFeatures {
        matrix: x,
        filter_order: r,
    })
}

/// `(|H| + |H^T|) / 2` with `H = X̄ X̄^T`.
pub fn similarity_matrix<T: Real>(filtered: &FilteredFeatures<T>) -> DMatrix<T> {
    let x = &filtered.matrix;
    let h = x * x.transpose();
    let n = h.nrows();
    let half = T::of(0.5);
    DMatrix::from_fn(n, n, |i, j| (h[(i, j)].abs() + h[(j, i)].abs()) * half)
}

/// Row-normalized leading eigenvectors of `D^{-1/2} W D^{-1/2}`, one row per node.
pub fn spectral_embedding<T: Real>(similarity: &DMatrix<T>, k: usize) -> DMatrix<T> {
    let n = similarity.nrows();
    let deg: Vec<T> = (0..n).map(|i| similarity.row(i).sum()).collect();
    let s: Vec<T> = deg
        .iter()
        .map(|&d| if d > T::zero() { T::one() / d.sqrt() } else { T::zero() })
        .collect();
    let m = DMatrix::from_fn(n, n, |i, j| s[i] * similarity[(i, j)] * s[j]);
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut u = DMatrix::from_fn(n, k, |i, c| eig.eigenvectors[(i, order[c])]);
    for i in 0..n {
        let norm = u.row(i).norm();
        if norm > T::zero() {
            let scaled = u.row(i) / norm;
            u.set_row(i, &scaled);
        }
    }
    u
}

/// Spectral clustering of a symmetric non-negative affinity into `k` groups.
pub fn spectral_cluster<T: Real>(similarity: &DMatrix<T>, k: usize, seed: u64) -> Result<ClusterAssignment> {
    spectral_cluster_with(similarity, k, seed, &KMeansConfig::default())
}

pub fn spectral_cluster_with<T: Real>(
    similarity: &DMatrix<T>,
    k: usize,
    seed: u64,
    cfg: &KMeansConfig,
) -> Result<ClusterAssignment> {
    let n = similarity.nrows();
    if similarity.ncols() != n {
        return Err(Error::Precondition("similarity must be square".into()));
    }
    if k == 0 || k > n {
        return Err(Error::Precondition(format!("need 1 <= K <= n, got K = {k}, n = {n}")));
    }
    if similarity.iter().all(|&v| v == T::zero()) {
        return Err(Error::DegenerateGraph("similarity matrix is identically zero".into()));
    }
    if k == 1 {
        return Ok(ClusterAssignment { labels: vec![0; n], k: 1 });
    }
    let embedding = spectral_embedding(similarity, k);
    let result = kmeans(&embedding, k, seed, cfg)?;
    Ok(ClusterAssignment::from_labels(&result.labels))
}

/// Normalized cut `Σ_c cut(c, rest) / vol(c)` of a labelling under affinity `w`.
pub fn normalized_cut_value<T: Real>(w: &DMatrix<T>, labels: &[usize]) -> T {
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut cut = vec![T::zero(); k];
    let mut vol = vec![T::zero(); k];
    for i in 0..w.nrows() {
        for j in 0..w.ncols() {
            vol[labels[i]] += w[(i, j)];
            if labels[i] != labels[j] {
                cut[labels[i]] += w[(i, j)];
            }
        }
    }
    let mut total = T::zero();
    for c in 0..k {
        if vol[c] > T::zero() {
            total += cut[c] / vol[c];
        } else if cut[c] > T::zero() {
            return T::max_value().unwrap_or_else(|| T::of(f64::MAX));
        }
    }
    total
}
