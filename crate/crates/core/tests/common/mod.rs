//! Test-only helpers: an independent per-pixel splat evaluator and random graphs.
#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix3, UnitQuaternion, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use occlupart::splat::{Gaussian3D, GaussianScene};
use occlupart::view_graph::ViewGraph;
use occlupart::Camera;

pub struct Projected {
    pub index: usize,
    pub depth: f64,
    pub u: f64,
    pub v: f64,
    /// Inverse of the dilated 2D covariance, `[a, b, c]` for `a x² + 2 b x y + c y²`.
    pub conic: [f64; 3],
    pub opacity: f64,
    pub color: [f64; 3],
}

/// Projects every Gaussian in front of the camera, written out long-hand.
pub fn project_all(scene: &GaussianScene<f64>, cam: &Camera, width: usize, height: usize) -> Vec<Projected> {
    let sx = width as f64 / cam.image_size[0] as f64;
    let sy = height as f64 / cam.image_size[1] as f64;
    let (fx, fy) = (cam.focal * sx, cam.focal * sy);
    let (cx, cy) = (cam.principal_point.x * sx, cam.principal_point.y * sy);
    let rot: Matrix3<f64> = cam.rotation.to_rotation_matrix().into_inner();
    let mut out = Vec::new();
    for (index, g) in scene.gaussians.iter().enumerate() {
        let d = g.mean - cam.position;
        let (x, y, z) = (rot.column(0).dot(&d), rot.column(1).dot(&d), rot.column(2).dot(&d));
        if z <= 0.01 {
            continue;
        }
        let r = g.rotation.to_rotation_matrix().into_inner();
        let mut sigma = Matrix3::zeros();
        for k in 0..3 {
            let axis: Vector3<f64> = r.column(k).into();
            sigma += axis * axis.transpose() * (g.scale[k] * g.scale[k]);
        }
        let world_to_cam = rot.transpose();
        let sc = world_to_cam * sigma * world_to_cam.transpose();
        let lim_x = 1.3 * (0.5 * width as f64 / fx);
        let lim_y = 1.3 * (0.5 * height as f64 / fy);
        let tx = z * (x / z).clamp(-lim_x, lim_x);
        let ty = z * (y / z).clamp(-lim_y, lim_y);
        let j = [[fx / z, 0.0, -fx * tx / (z * z)], [0.0, fy / z, -fy * ty / (z * z)]];
        let mut cov = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                let mut s = 0.0;
                for p in 0..3 {
                    for q in 0..3 {
                        s += j[a][p] * sc[(p, q)] * j[b][q];
                    }
                }
                cov[a][b] = s;
            }
        }
        cov[0][0] += 0.3;
        cov[1][1] += 0.3;
        let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
        if det <= 0.0 {
            continue;
        }
        out.push(Projected {
            index,
            depth: z,
            u: fx * x / z + cx,
            v: fy * y / z + cy,
            conic: [cov[1][1] / det, -cov[0][1] / det, cov[0][0] / det],
            opacity: g.opacity,
            color: [g.color.x, g.color.y, g.color.z],
        });
    }
    out.sort_by(|a, b| a.depth.total_cmp(&b.depth).then(a.index.cmp(&b.index)));
    out
}

pub fn alpha_at(p: &Projected, px: f64, py: f64) -> f64 {
    let (dx, dy) = (px - p.u, py - p.v);
    let q = p.conic[0] * dx * dx + 2.0 * p.conic[1] * dx * dy + p.conic[2] * dy * dy;
    (p.opacity * (-0.5 * q).exp()).min(0.99)
}

/// `(index, alpha, weight)` of every splat at one pixel, front to back, with no cutoffs.
pub fn trace_pixel(sorted: &[Projected], x: usize, y: usize) -> Vec<(usize, f64, f64)> {
    let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
    let mut t = 1.0;
    let mut out = Vec::new();
    for p in sorted {
        let a = alpha_at(p, px, py);
        out.push((p.index, a, a * t));
        t *= 1.0 - a;
    }
    out
}

pub struct Reference {
    pub image: Vec<f64>,
    pub max_weight: Vec<f64>,
}

/// Evaluates every splat at every pixel: no tiles, no footprint cutoff, no early exit.
pub fn reference_render(scene: &GaussianScene<f64>, cam: &Camera, width: usize, height: usize) -> Reference {
    let sorted = project_all(scene, cam, width, height);
    let mut image = vec![0.0; 3 * width * height];
    let mut max_weight = vec![0.0; scene.len()];
    for y in 0..height {
        for x in 0..width {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            let mut t = 1.0;
            let o = 3 * (y * width + x);
            for p in &sorted {
                let a = alpha_at(p, px, py);
                let w = a * t;
                for k in 0..3 {
                    image[o + k] += w * p.color[k];
                }
                if w > max_weight[p.index] {
                    max_weight[p.index] = w;
                }
                t *= 1.0 - a;
            }
        }
    }
    Reference { image, max_weight }
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..i {
            if rng.random::<f64>() < density {
                let w = rng.random_range(0.05..5.0);
                a[i][j] = w;
                a[j][i] = w;
            }
        }
    }
    // A ring keeps every node connected.
    for i in 0..n {
        let j = (i + 1) % n;
        if j != i && a[i][j] == 0.0 {
            a[i][j] = 0.1;
            a[j][i] = 0.1;
        }
    }
    a
}

pub fn to_graph(a: &[Vec<f64>], d: usize, rng: &mut ChaCha8Rng) -> ViewGraph<f64> {
    let n = a.len();
    ViewGraph::new(
        (0..n as u32).collect(),
        DMatrix::from_fn(n, n, |i, j| a[i][j]),
        DMatrix::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0)),
    )
    .unwrap()
}

/// `D^{-1/2}(D - A)D^{-1/2}` written entry by entry.
pub fn laplacian_oracle(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let deg: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let dm = if i == j { deg[i] } else { 0.0 } - a[i][j];
            l[i][j] = dm / (deg[i].sqrt() * deg[j].sqrt());
        }
    }
    l
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![0.0; p]; n];
    for i in 0..n {
        for k in 0..m {
            for j in 0..p {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

/// Two communities of random size with dense random weights inside and sparse weak links
/// across, the shape spectral clustering is meant for.
pub fn planted_pair(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let split = rng.random_range(2..=n - 2);
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let v = if (i < split) == (j < split) {
                rng.random_range(0.5..2.0)
            } else if rng.random::<f64>() < 0.4 {
                rng.random_range(0.0..0.6)
            } else {
                0.0
            };
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    w
}

pub fn axis_camera(size: u32, focal: f64) -> Camera {
    Camera::looking(0, Vector3::zeros(), Vector3::x(), Vector3::z(), focal, [size, size])
}

pub fn random_scene(rng: &mut ChaCha8Rng, n: usize) -> GaussianScene<f64> {
    let gaussians = (0..n)
        .map(|_| {
            let mean = Vector3::new(rng.random_range(2.0..8.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let scale = Vector3::new(
                rng.random_range(0.05..0.6),
                rng.random_range(0.05..0.6),
                rng.random_range(0.05..0.6),
            );
            let rotation = UnitQuaternion::from_euler_angles(
                rng.random_range(-3.1..3.1),
                rng.random_range(-1.5..1.5),
                rng.random_range(-3.1..3.1),
            );
            Gaussian3D {
                mean,
                scale,
                rotation,
                opacity: rng.random_range(0.05..0.99),
                color: Vector3::new(rng.random(), rng.random(), rng.random()),
            }
        })
        .collect();
    GaussianScene::new(gaussians)
}

