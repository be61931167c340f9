//! Tiled EWA splatting, front to back, with per-Gaussian contribution bookkeeping.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use rayon::prelude::*;

use super::GaussianScene;
use crate::sfm::Camera;
use crate::Real;

/// How a Gaussian's contribution is aggregated over the pixels of one view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ContributionMode {
    /// Maximum over pixels of the compositing weight α·T.
    #[default]
    MaxPixelWeight,
    /// Sum over pixels of α·T.
    SummedWeight,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RasterConfig {
    pub tile_size: usize,
    pub mode: ContributionMode,
    pub near: f64,
    pub alpha_max: f64,
    /// Compositing stops once transmittance drops below this value.
    pub min_transmittance: f64,
    /// Footprint cutoff: pixels where opacity·G < this value are not evaluated.
    pub min_alpha: f64,
    /// Screen-space dilation added to the projected covariance diagonal, in pixels².
    pub dilation: f64,
}

impl Default for RasterConfig {
    fn default() -> Self {
        Self {
            tile_size: 16,
            mode: ContributionMode::MaxPixelWeight,
            near: 0.01,
            alpha_max: 0.99,
            min_transmittance: 1e-4,
            min_alpha: 1e-4,
            dilation: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderResult<T: Real> {
    pub width: usize,
    pub height: usize,
    /// Row-major RGB, `3 * width * height` values in `[0, 1]`.
    pub image: Vec<T>,
    /// Per-Gaussian contribution (see [`ContributionMode`]), indexed like the scene.
    pub max_weight: Vec<T>,
    /// Transmittance left at each pixel after compositing.
    pub transmittance: Vec<T>,
    /// Number of Gaussians passed to the rasterizer (after masking).
    pub rasterized: usize,
}

impl<T: Real> RenderResult<T> {
    pub fn pixel(&self, x: usize, y: usize) -> [T; 3] {
        let o = 3 * (y * self.width + x);
        [self.image[o], self.image[o + 1], self.image[o + 2]]
    }

    /// Largest per-channel absolute difference between two images of equal size.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.image
            .iter()
            .zip(&other.image)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), |m, d| if d > m { d } else { m })
    }

    pub fn to_rgb8(&self) -> Vec<u8> {
        self.image
            .iter()
            .map(|v| (v.as_f64().clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect()
    }
}

struct Splat<T: Real> {
    index: usize,
    depth: T,
    center: Vector2<T>,
    conic: [T; 3],
    opacity: T,
    color: Vector3<T>,
    q_max: T,
    /// Inclusive pixel bounds `[x0, x1, y0, y1]`.
    bounds: [usize; 4],
}

fn project<T: Real>(
    scene: &GaussianScene<T>,
    index: usize,
    w2c: &Matrix3<T>,
    origin: &Vector3<T>,
    intr: &[T; 4],
    size: (usize, usize),
    cfg: &RasterConfig,
) -> Option<Splat<T>> {
    let g = &scene.gaussians[index];
    let [fx, fy, cx, cy] = *intr;
    let pc = w2c * (g.mean - origin);
    let z = pc.z;
    if z <= T::of(cfg.near) {
        return None;
    }
    let min_alpha = T::of(cfg.min_alpha);
    if g.opacity < min_alpha {
        return None;
    }
    let r = g.rotation.to_rotation_matrix().into_inner();
    let s2 = Matrix3::from_diagonal(&g.scale.component_mul(&g.scale));
    let cov_cam = w2c * (r * s2 * r.transpose()) * w2c.transpose();

    let half = T::of(0.5);
    let lim_x = T::of(1.3) * (T::of_usize(size.0) * half / fx);
    let lim_y = T::of(1.3) * (T::of_usize(size.1) * half / fy);
    let tx = z * (pc.x / z).max(-lim_x).min(lim_x);
    let ty = z * (pc.y / z).max(-lim_y).min(lim_y);
    let j = nalgebra::Matrix2x3::new(fx / z, T::zero(), -fx * tx / (z * z), T::zero(), fy / z, -fy * ty / (z * z));
    let dil = T::of(cfg.dilation);
    let cov2: Matrix2<T> = j * cov_cam * j.transpose() + Matrix2::from_diagonal_element(dil);
    let (a, b, c) = (cov2[(0, 0)], cov2[(0, 1)], cov2[(1, 1)]);
    let det = a * c - b * b;
    if det <= T::zero() {
        return None;
    }
    let conic = [c / det, -b / det, a / det];
    let q_max = T::of(2.0) * (g.opacity / min_alpha).ln();

    let u = fx * pc.x / z + cx;
    let v = fy * pc.y / z + cy;
    let rx = (q_max * a).sqrt();
    let ry = (q_max * c).sqrt();
    // Pixel centers sit at i + 0.5.
    let lo = |center: T, r: T| (center - r - half).ceil().as_f64().max(0.0);
    let hi = |center: T, r: T, n: usize| (center + r - half).floor().as_f64().min(n as f64 - 1.0);
    let (x0, x1) = (lo(u, rx), hi(u, rx, size.0));
    let (y0, y1) = (lo(v, ry), hi(v, ry, size.1));
    if !(x0 <= x1 && y0 <= y1) {
        return None;
    }
    Some(Splat {
        index,
        depth: z,
        center: Vector2::new(u, v),
        conic,
        opacity: g.opacity,
        color: g.color,
        q_max,
        bounds: [x0 as usize, x1 as usize, y0 as usize, y1 as usize],
    })
}

/// Renders the full scene with the default configuration.
pub fn rasterize<T: Real>(scene: &GaussianScene<T>, cam: &Camera, width: usize, height: usize) -> RenderResult<T> {
    rasterize_with(scene, cam, width, height, None, &RasterConfig::default())
}

/// Renders the Gaussians selected by `mask` (all of them when `None`).
///
/// Intrinsics are rescaled from the camera's native image size to `width × height`.
pub fn rasterize_with<T: Real>(
    scene: &GaussianScene<T>,
    cam: &Camera,
    width: usize,
    height: usize,
    mask: Option<&[bool]>,
    cfg: &RasterConfig,
) -> RenderResult<T> {
    let n = scene.len();
    let npix = width * height;
    let mut out = RenderResult {
        width,
        height,
        image: vec![T::zero(); 3 * npix],
        max_weight: vec![T::zero(); n],
        transmittance: vec![T::one(); npix],
        rasterized: 0,
    };
    if npix == 0 {
        return out;
    }
    let sx = width as f64 / cam.image_size[0].max(1) as f64;
    let sy = height as f64 / cam.image_size[1].max(1) as f64;
    let intr = [
        T::of(cam.focal * sx),
        T::of(cam.focal * sy),
        T::of(cam.principal_point.x * sx),
        T::of(cam.principal_point.y * sy),
    ];
    let w2c: Matrix3<T> = cam.rotation.to_rotation_matrix().into_inner().transpose().cast::<T>();
    let origin: Vector3<T> = cam.position.cast::<T>();

    let selected: Vec<usize> = (0..n).filter(|&i| mask.is_none_or(|m| m[i])).collect();
    out.rasterized = selected.len();
    let mut splats: Vec<Splat<T>> = selected
        .par_iter()
        .filter_map(|&i| project(scene, i, &w2c, &origin, &intr, (width, height), cfg))
        .collect();
    splats.sort_by(|a, b| a.depth.partial_cmp(&b.depth).unwrap_or(std::cmp::Ordering::Equal).then(a.index.cmp(&b.index)));

    let ts = cfg.tile_size.max(1);
    let (tiles_x, tiles_y) = (width.div_ceil(ts), height.div_ceil(ts));
    let mut bins: Vec<Vec<usize>> = vec![Vec::new(); tiles_x * tiles_y];
    for (k, s) in splats.iter().enumerate() {
        let [x0, x1, y0, y1] = s.bounds;
        for ty in y0 / ts..=y1 / ts {
            for tx in x0 / ts..=x1 / ts {
                bins[ty * tiles_x + tx].push(k);
            }
        }
    }

    let alpha_max = T::of(cfg.alpha_max);
    let t_min = T::of(cfg.min_transmittance);
    let half = T::of(0.5);
    let tiles: Vec<(Vec<T>, Vec<T>, Vec<T>)> = (0..tiles_x * tiles_y)
        .into_par_iter()
        .map(|t| {
            let list = &bins[t];
            let (bx, by) = ((t % tiles_x) * ts, (t / tiles_x) * ts);
            let (bw, bh) = (ts.min(width - bx), ts.min(height - by));
            let mut rgb = vec![T::zero(); 3 * bw * bh];
            let mut trans = vec![T::one(); bw * bh];
            let mut contrib = vec![T::zero(); list.len()];
            for ly in 0..bh {
                for lx in 0..bw {
                    let (px, py) = (bx + lx, by + ly);
                    let p = Vector2::new(T::of_usize(px) + half, T::of_usize(py) + half);
                    let mut tr = T::one();
                    let mut col = Vector3::zeros();
                    for (k, &si) in list.iter().enumerate() {
                        let s = &splats[si];
                        let [x0, x1, y0, y1] = s.bounds;
                        if px < x0 || px > x1 || py < y0 || py > y1 {
                            continue;
                        }
                        let d = p - s.center;
                        let q = s.conic[0] * d.x * d.x + T::of(2.0) * s.conic[1] * d.x * d.y + s.conic[2] * d.y * d.y;
                        if q > s.q_max {
                            continue;
                        }
                        let alpha = (s.opacity * (-half * q).exp()).min(alpha_max);
                        let w = alpha * tr;
                        col += s.color * w;
                        match cfg.mode {
                            ContributionMode::MaxPixelWeight => {
                                if w > contrib[k] {
                                    contrib[k] = w;
                                }
                            }
                            ContributionMode::SummedWeight => contrib[k] += w,
                        }
                        tr *= T::one() - alpha;
                        if tr < t_min {
                            break;
                        }
                    }
                    let o = ly * bw + lx;
                    rgb[3 * o..3 * o + 3].copy_from_slice(col.as_slice());
                    trans[o] = tr;
                }
            }
            (rgb, trans, contrib)
        })
        .collect();

    for (t, (rgb, trans, contrib)) in tiles.into_iter().enumerate() {
        let (bx, by) = ((t % tiles_x) * ts, (t / tiles_x) * ts);
        let bw = ts.min(width - bx);
        for (o, tr) in trans.iter().enumerate() {
            let p = (by + o / bw) * width + bx + o % bw;
            out.transmittance[p] = *tr;
            out.image[3 * p..3 * p + 3].copy_from_slice(&rgb[3 * o..3 * o + 3]);
        }
        for (k, &si) in bins[t].iter().enumerate() {
            let slot = &mut out.max_weight[splats[si].index];
            match cfg.mode {
                ContributionMode::MaxPixelWeight => {
                    if contrib[k] > *slot {
                        *slot = contrib[k];
                    }
                }
                ContributionMode::SummedWeight => *slot += contrib[k],
            }
        }
    }
    out
}
