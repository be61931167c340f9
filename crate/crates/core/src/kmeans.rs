//! Seeded Lloyd k-means with k-means++ seeding.
//!
//! Center updates accumulate in point-index order, so results are reproducible bit for bit.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub max_iterations: usize,
    /// Stop once no center moves farther than this.
    pub tolerance: f64,
    /// Independent successful runs; the lowest inertia wins.
    pub n_init: usize,
    /// Runs allowed to end with an empty cluster before giving up.
    pub max_restarts: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            max_iterations: 300,
            tolerance: 1e-6,
            n_init: 10,
            max_restarts: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult<T: Real> {
    pub labels: Vec<usize>,
    pub centers: DMatrix<T>,
    pub inertia: T,
    pub iterations: usize,
}

fn sq_dist<T: Real>(data: &DMatrix<T>, i: usize, center: &DVector<T>) -> T {
    let mut acc = T::zero();
    for c in 0..data.ncols() {
        let d = data[(i, c)] - center[c];
        acc += d * d;
    }
    acc
}

fn plus_plus_init<T: Real>(data: &DMatrix<T>, k: usize, rng: &mut ChaCha8Rng) -> Vec<DVector<T>> {
    let n = data.nrows();
    let row = |i: usize| data.row(i).transpose();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(data, i, &row(chosen[0])).as_f64()).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if acc > target && w > 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            // Every point coincides with a center; take the first unused index.
            (0..n).find(|i| !chosen.contains(i)).unwrap_or(0)
        };
        chosen.push(next);
        let c = row(next);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(data, i, &c).as_f64());
        }
    }
    chosen.into_iter().map(row).collect()
}

/// One k-means run. Returns `None` when a cluster ends up empty.
pub fn kmeans_once<T: Real>(data: &DMatrix<T>, k: usize, seed: u64, cfg: &KMeansConfig) -> Option<KMeansResult<T>> {
    let n = data.nrows();
    let dim = data.ncols();
    assert!(k >= 1 && k <= n, "k-means requires 1 <= k <= n");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = plus_plus_init(data, k, &mut rng);
    let mut labels = vec![0usize; n];
    let tol = T::of(cfg.tolerance);
    let mut iterations = 0;
    for it in 0..cfg.max_iterations {
        iterations = it + 1;
        for (i, label) in labels.iter_mut().enumerate() {
            let mut best = 0;
            let mut best_d = sq_dist(data, i, &centers[0]);
            for (c, center) in centers.iter().enumerate().skip(1) {
                let d = sq_dist(data, i, center);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            *label = best;
        }
        let mut sums = vec![DVector::<T>::zeros(dim); k];
        let mut counts = vec![0usize; k];
        for (i, &l) in labels.iter().enumerate() {
            counts[l] += 1;
            for c in 0..dim {
                sums[l][c] += data[(i, c)];
            }
        }
        if counts.contains(&0) {
            return None;
        }
        let mut shift = T::zero();
        for c in 0..k {
            let new_center = &sums[c] / T::of_usize(counts[c]);
            shift = shift.max((&new_center - &centers[c]).norm());
            centers[c] = new_center;
        }
        if shift <= tol {
            break;
        }
    }
    // Final assignment against the converged centers.
    let mut inertia = T::zero();
    for (i, label) in labels.iter_mut().enumerate() {
        let mut best = 0;
        let mut best_d = sq_dist(data, i, &centers[0]);
        for (c, center) in centers.iter().enumerate().skip(1) {
            let d = sq_dist(data, i, center);
            if d < best_d {
                best = c;
                best_d = d;
            }
        }
        *label = best;
        inertia += best_d;
    }
    let mut counts = vec![0usize; k];
    for &l in &labels {
        counts[l] += 1;
    }
    if counts.contains(&0) {
        return None;
    }
    let mut m = DMatrix::zeros(k, dim);
    for (c, center) in centers.iter().enumerate() {
        m.set_row(c, &center.transpose());
    }
    Some(KMeansResult {
        labels,
        centers: m,
        inertia,
        iterations,
    })
}

/// Runs `cfg.n_init` seeded k-means passes (seeds `seed, seed + 1, ...`) and keeps the
/// lowest-inertia result. Runs that leave a cluster empty are retried with the next seed.
pub fn kmeans<T: Real>(data: &DMatrix<T>, k: usize, seed: u64, cfg: &KMeansConfig) -> Result<KMeansResult<T>> {
    if k == 0 || k > data.nrows() {
        return Err(Error::Precondition(format!("k = {k} with {} points", data.nrows())));
    }
    let mut best: Option<KMeansResult<T>> = None;
    let mut successes = 0;
    let mut failures = 0;
    let mut s = seed;
    while successes < cfg.n_init.max(1) {
        match kmeans_once(data, k, s, cfg) {
            Some(r) => {
                successes += 1;
                if best.as_ref().is_none_or(|b| r.inertia < b.inertia) {
                    best = Some(r);
                }
            }
            None => {
                failures += 1;
                if failures > cfg.max_restarts {
                    break;
                }
            }
        }
        s = s.wrapping_add(1);
    }
    best.ok_or_else(|| Error::ClusteringFailed(format!("k-means left a cluster empty after {failures} restarts")))
}
