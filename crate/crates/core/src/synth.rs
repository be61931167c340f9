//! Synthetic floor plans with ground truth: rooms, walls with doorways, camera loops, sparse
//! points and Gaussian geometry, plus brute-force oracles used by the tests.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use nalgebra::{DMatrix, UnitQuaternion, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::predicates::segments_intersect_robust;
use crate::sfm::{Camera, CameraId, PointId, SceneModel};
use crate::splat::{Gaussian3D, GaussianScene};

pub const PLAN_SCHEMA: &str = "occlupart-plan/1";
/// Largest graph accepted by [`normalized_cut_bruteforce`].
pub const BRUTEFORCE_MAX_NODES: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Room {
    pub id: usize,
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Room {
    pub fn center(&self) -> Vector2<f64> {
        Vector2::new(0.5 * (self.min[0] + self.max[0]), 0.5 * (self.min[1] + self.max[1]))
    }

    pub fn contains(&self, p: &Vector2<f64>) -> bool {
        p.x >= self.min[0] && p.x <= self.max[0] && p.y >= self.min[1] && p.y <= self.max[1]
    }

    pub fn distance(&self, p: &Vector2<f64>) -> f64 {
        let dx = (self.min[0] - p.x).max(p.x - self.max[0]).max(0.0);
        let dy = (self.min[1] - p.y).max(p.y - self.max[1]).max(0.0);
        dx.hypot(dy)
    }

    fn size(&self) -> [f64; 2] {
        [self.max[0] - self.min[0], self.max[1] - self.min[1]]
    }

    /// Centres and radii of the camera loops: one per roughly square cell along the long
    /// side, radius `fraction` of the cell's short side.
    pub fn camera_loops(&self, fraction: f64) -> Vec<(Vector2<f64>, f64)> {
        let [w, h] = self.size();
        let (long, short) = (w.max(h), w.min(h));
        let n = ((long / short).round() as usize).max(1);
        let cell = long / n as f64;
        (0..n)
            .map(|j| {
                let along = (j as f64 + 0.5) * cell;
                let c = if w >= h {
                    Vector2::new(self.min[0] + along, self.min[1] + 0.5 * h)
                } else {
                    Vector2::new(self.min[0] + 0.5 * w, self.min[1] + along)
                };
                (c, fraction * short.min(cell))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wall {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub height: f64,
    pub thickness: f64,
}

impl Wall {
    pub fn length(&self) -> f64 {
        (self.b[0] - self.a[0]).hypot(self.b[1] - self.a[1])
    }

    fn at(&self, s: f64) -> [f64; 2] {
        let t = s / self.length();
        [self.a[0] + t * (self.b[0] - self.a[0]), self.a[1] + t * (self.b[1] - self.a[1])]
    }
}

/// Gap `[start, end]` measured along a wall from its `a` end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Doorway {
    pub wall: usize,
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorPlan {
    pub rooms: Vec<Room>,
    pub walls: Vec<Wall>,
    pub doorways: Vec<Doorway>,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct PlanFile {
    schema: String,
    #[serde(flatten)]
    plan: FloorPlan,
}

/// A solid stretch of wall between doorways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallPiece {
    pub wall: usize,
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub height: f64,
}

impl FloorPlan {
    pub fn validate(&self) -> Result<()> {
        if self.rooms.is_empty() {
            return Err(Error::Generation("plan has no rooms".into()));
        }
        for (i, r) in self.rooms.iter().enumerate() {
            if !(r.min[0] < r.max[0] && r.min[1] < r.max[1]) {
                return Err(Error::Generation(format!("room {} is empty", r.id)));
            }
            for s in &self.rooms[i + 1..] {
                let overlap_x = r.min[0].max(s.min[0]) < r.max[0].min(s.max[0]);
                let overlap_y = r.min[1].max(s.min[1]) < r.max[1].min(s.max[1]);
                if overlap_x && overlap_y {
                    return Err(Error::Generation(format!("rooms {} and {} overlap", r.id, s.id)));
                }
            }
        }
        for w in &self.walls {
            if !(w.length() > 0.0 && w.height > 0.0 && w.thickness >= 0.0) {
                return Err(Error::Generation("degenerate wall".into()));
            }
        }
        for d in &self.doorways {
            let w = self
                .walls
                .get(d.wall)
                .ok_or_else(|| Error::Generation(format!("doorway on missing wall {}", d.wall)))?;
            if !(0.0 <= d.start && d.start < d.end && d.end <= w.length()) {
                return Err(Error::Generation(format!("doorway [{}, {}] is off its wall", d.start, d.end)));
            }
        }
        Ok(())
    }

    /// Walls split at their doorways.
    pub fn solid_pieces(&self) -> Vec<WallPiece> {
        let mut out = Vec::new();
        for (i, w) in self.walls.iter().enumerate() {
            let mut gaps: Vec<(f64, f64)> =
                self.doorways.iter().filter(|d| d.wall == i).map(|d| (d.start, d.end)).collect();
            gaps.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut s = 0.0;
            for (g0, g1) in gaps.into_iter().chain(std::iter::once((w.length(), w.length()))) {
                if g0 > s {
                    out.push(WallPiece {
                        wall: i,
                        a: w.at(s),
                        b: w.at(g0),
                        height: w.height,
                    });
                }
                s = s.max(g1);
            }
        }
        out
    }

    /// Room containing `p`, else the nearest one (lowest ID on ties).
    pub fn room_of(&self, p: &Vector2<f64>) -> usize {
        if let Some(r) = self.rooms.iter().find(|r| r.contains(p)) {
            return r.id;
        }
        let mut best = (f64::INFINITY, 0);
        for r in &self.rooms {
            let d = r.distance(p);
            if d < best.0 {
                best = (d, r.id);
            }
        }
        best.1
    }

    pub fn to_json(&self) -> String {
        let file = PlanFile {
            schema: PLAN_SCHEMA.into(),
            plan: self.clone(),
        };
        serde_json::to_string_pretty(&file).expect("plan serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PlanFile = serde_json::from_str(text).map_err(|e| Error::format("plan", e.to_string()))?;
        if file.schema != PLAN_SCHEMA {
            return Err(Error::format("plan", format!("unsupported schema `{}`", file.schema)));
        }
        file.plan.validate()?;
        Ok(file.plan)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

pub const DEFAULT_WALL_HEIGHT: f64 = 3.0;
/// Walls between rooms rise above the outer walls, so from inside a room the top edge of a
/// far outer wall always sits below the top edge of the nearer interior wall.
pub const INTERIOR_WALL_HEIGHT: f64 = 3.4;
pub const DEFAULT_DOOR_WIDTH: f64 = 1.0;

/// `cols × rows` grid of `size[0] × size[1]` rooms with exterior walls and interior walls
/// between all neighbours. Walls between the room pairs in `doors` (row-major IDs) get a
/// doorway centred half a short side from the wall start.
pub fn grid_plan(cols: usize, rows: usize, size: [f64; 2], doors: &[(usize, usize)], seed: u64) -> FloorPlan {
    let (h, t) = (DEFAULT_WALL_HEIGHT, 0.15);
    let [sx, sy] = size;
    let mut rooms = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let (x, y) = (c as f64 * sx, r as f64 * sy);
            rooms.push(Room {
                id: r * cols + c,
                min: [x, y],
                max: [x + sx, y + sy],
            });
        }
    }
    let (w, d) = (cols as f64 * sx, rows as f64 * sy);
    let wall = |a: [f64; 2], b: [f64; 2]| Wall {
        a,
        b,
        height: h,
        thickness: t,
    };
    let mut walls = vec![wall([0.0, 0.0], [w, 0.0]), wall([w, 0.0], [w, d]), wall([w, d], [0.0, d]), wall([0.0, d], [0.0, 0.0])];
    let mut doorways = Vec::new();
    let half = 0.5 * DEFAULT_DOOR_WIDTH;
    let mid = 0.5 * sx.min(sy);
    let linked = |a: usize, b: usize| doors.contains(&(a, b)) || doors.contains(&(b, a));
    for r in 0..rows {
        for c in 0..cols {
            let id = r * cols + c;
            let (x, y) = (c as f64 * sx, r as f64 * sy);
            let mut push = |a: [f64; 2], b: [f64; 2], door: bool| {
                walls.push(Wall {
                    height: INTERIOR_WALL_HEIGHT,
                    ..wall(a, b)
                });
                if door {
                    doorways.push(Doorway {
                        wall: walls.len() - 1,
                        start: mid - half,
                        end: mid + half,
                    });
                }
            };
            if c + 1 < cols {
                push([x + sx, y], [x + sx, y + sy], linked(id, id + 1));
            }
            if r + 1 < rows {
                push([x, y + sy], [x + sx, y + sy], linked(id, id + cols));
            }
        }
    }
    FloorPlan {
        rooms,
        walls,
        doorways,
        seed,
    }
}

/// Two 6×6 rooms side by side joined by one doorway.
pub fn two_room_plan(seed: u64) -> FloorPlan {
    grid_plan(2, 1, [6.0, 6.0], &[(0, 1)], seed)
}

/// Width of the opening in each campus room's partition wall.
pub const CAMPUS_PARTITION_OPENING: f64 = 1.0;

/// Six 6×12 rooms (2 columns × 3 rows) connected by doorways along a spanning tree. Each
/// room is split into two 6×6 halls by a partition wall with a central opening.
pub fn campus_plan(seed: u64) -> FloorPlan {
    let mut plan = grid_plan(2, 3, [6.0, 12.0], &[(0, 1), (2, 3), (4, 5), (0, 2), (3, 5)], seed);
    for r in plan.rooms.clone() {
        let y = 0.5 * (r.min[1] + r.max[1]);
        plan.walls.push(Wall {
            a: [r.min[0], y],
            b: [r.max[0], y],
            height: INTERIOR_WALL_HEIGHT,
            thickness: 0.15,
        });
        let len = r.max[0] - r.min[0];
        plan.doorways.push(Doorway {
            wall: plan.walls.len() - 1,
            start: 0.5 * (len - CAMPUS_PARTITION_OPENING),
            end: 0.5 * (len + CAMPUS_PARTITION_OPENING),
        });
    }
    plan
}

/// Whether the segment `a → b` passes through solid wall within the wall's height.
///
/// The crossing test is exact (touching a wall end counts as blocked); the height check
/// interpolates the segment at the crossing.
pub fn occlusion_oracle(plan: &FloorPlan, a: &Vector3<f64>, b: &Vector3<f64>) -> bool {
    occluded_by(&plan.solid_pieces(), a, b)
}

pub fn occluded_by(pieces: &[WallPiece], a: &Vector3<f64>, b: &Vector3<f64>) -> bool {
    let (p, q) = ([a.x, a.y], [b.x, b.y]);
    pieces.iter().any(|w| {
        if !segments_intersect_robust(&p, &q, &w.a, &w.b) {
            return false;
        }
        let d = Vector2::new(q[0] - p[0], q[1] - p[1]);
        let e = Vector2::new(w.b[0] - w.a[0], w.b[1] - w.a[1]);
        let denom = d.x * e.y - d.y * e.x;
        let t = if denom.abs() > 1e-300 {
            let f = Vector2::new(w.a[0] - p[0], w.a[1] - p[1]);
            ((f.x * e.y - f.y * e.x) / denom).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let z = a.z + t * (b.z - a.z);
        (0.0..=w.height).contains(&z)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub cams_per_room: usize,
    pub pts_per_room: usize,
    pub seed: u64,
    pub eye_height: f64,
    pub focal: f64,
    pub image_size: [u32; 2],
    /// Camera loop radius as a fraction of the room's smaller side.
    pub loop_fraction: f64,
    /// Standard deviation of wall Gaussians.
    pub wall_sigma: f64,
    /// Grid spacing of wall Gaussians.
    pub wall_spacing: f64,
    pub wall_opacity: f64,
    /// 1: one sheet on the wall's centre line; 2: one sheet on each face.
    pub wall_layers: usize,
    pub fillers_per_room: usize,
    /// Fraction of sparse points placed on the floor (the rest lie on walls).
    pub floor_fraction: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            cams_per_room: 60,
            pts_per_room: 300,
            seed: 0,
            eye_height: 1.6,
            focal: 128.0,
            image_size: [256, 256],
            loop_fraction: 0.3,
            wall_sigma: 0.15,
            wall_spacing: 0.2,
            wall_opacity: 0.99,
            wall_layers: 1,
            fillers_per_room: 150,
            floor_fraction: 0.4,
        }
    }
}

impl SynthConfig {
    /// Settings for the two-room fixture: wider loops bring cameras near the doorway into
    /// the border strips of their region.
    pub fn two_room(seed: u64) -> Self {
        Self {
            seed,
            loop_fraction: 0.45,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    pub camera_room: BTreeMap<CameraId, usize>,
    pub point_room: BTreeMap<PointId, usize>,
    /// Room of every Gaussian, indexed like the scene.
    pub gaussian_room: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SyntheticScene {
    pub plan: FloorPlan,
    pub model: SceneModel,
    pub gaussians: GaussianScene<f64>,
    pub truth: GroundTruth,
}

pub fn generate_scene(plan: &FloorPlan, cams_per_room: usize, pts_per_room: usize, seed: u64) -> Result<SyntheticScene> {
    generate_scene_with(
        plan,
        &SynthConfig {
            cams_per_room,
            pts_per_room,
            seed,
            ..SynthConfig::default()
        },
    )
}

fn room_rng(seed: u64, room: usize, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((room as u64) << 8) | stream);
    rng
}

pub fn generate_scene_with(plan: &FloorPlan, cfg: &SynthConfig) -> Result<SyntheticScene> {
    plan.validate()?;
    let inset = 0.05;
    for r in &plan.rooms {
        let [w, h] = r.size();
        let radius = r.camera_loops(cfg.loop_fraction).iter().map(|l| l.1).fold(f64::INFINITY, f64::min);
        if w.min(h) < 1.0 || radius <= 0.0 {
            return Err(Error::Generation(format!("room {} is too small", r.id)));
        }
        if cfg.cams_per_room > 0 && std::f64::consts::TAU * radius / (cfg.cams_per_room as f64) < 1e-3 {
            return Err(Error::Generation(format!(
                "room {} cannot hold {} cameras on its loop",
                r.id, cfg.cams_per_room
            )));
        }
    }
    let pieces = plan.solid_pieces();
    let up = Vector3::z();

    let mut cameras = Vec::new();
    let mut truth = GroundTruth::default();
    for r in &plan.rooms {
        let mut rng = room_rng(cfg.seed, r.id, 0);
        let loops = r.camera_loops(cfg.loop_fraction);
        for (j, (c, radius)) in loops.iter().enumerate() {
            let count = cfg.cams_per_room / loops.len() + usize::from(j < cfg.cams_per_room % loops.len());
            let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            for i in 0..count {
                let theta = phase + std::f64::consts::TAU * i as f64 / count as f64;
                let rad = radius * (1.0 + 0.05 * (rng.random::<f64>() - 0.5));
                let pos = Vector3::new(c.x + rad * theta.cos(), c.y + rad * theta.sin(), cfg.eye_height);
                let forward = Vector3::new(-theta.sin(), theta.cos(), 0.0);
                let id = cameras.len() as CameraId;
                cameras.push(Camera::looking(id, pos, forward, up, cfg.focal, cfg.image_size));
                truth.camera_room.insert(id, r.id);
            }
        }
    }

    let mut points: BTreeMap<PointId, Vector3<f64>> = BTreeMap::new();
    for r in &plan.rooms {
        let mut rng = room_rng(cfg.seed, r.id, 1);
        let [w, h] = r.size();
        let top = plan.walls.iter().map(|w| w.height).fold(f64::INFINITY, f64::min).min(DEFAULT_WALL_HEIGHT);
        for _ in 0..cfg.pts_per_room {
            let p = if rng.random::<f64>() < cfg.floor_fraction {
                Vector3::new(
                    r.min[0] + inset + rng.random::<f64>() * (w - 2.0 * inset),
                    r.min[1] + inset + rng.random::<f64>() * (h - 2.0 * inset),
                    0.0,
                )
            } else {
                let s = rng.random::<f64>() * 2.0 * (w + h);
                let z = 0.1 + rng.random::<f64>() * (top - 0.4);
                let (x, y) = if s < w {
                    (r.min[0] + s, r.min[1] + inset)
                } else if s < w + h {
                    (r.max[0] - inset, r.min[1] + s - w)
                } else if s < 2.0 * w + h {
                    (r.max[0] - (s - w - h), r.max[1] - inset)
                } else {
                    (r.min[0] + inset, r.max[1] - (s - 2.0 * w - h))
                };
                let x = x.clamp(r.min[0] + inset, r.max[0] - inset);
                let y = y.clamp(r.min[1] + inset, r.max[1] - inset);
                Vector3::new(x, y, z)
            };
            let id = points.len() as PointId;
            points.insert(id, p);
            truth.point_room.insert(id, r.id);
        }
    }

    for cam in &mut cameras {
        cam.observed_points = points
            .iter()
            .filter(|(_, p)| !occluded_by(&pieces, &cam.position, p))
            .map(|(id, _)| *id)
            .collect::<BTreeSet<_>>();
    }
    let model = SceneModel::new(cameras, points, Some(up))?;

    let mut gaussians = Vec::new();
    for (wi, piece) in pieces.iter().enumerate() {
        let wall = &plan.walls[piece.wall];
        let mut rng = room_rng(cfg.seed, 1 << 16 | wi, 2);
        let a = Vector2::new(piece.a[0], piece.a[1]);
        let b = Vector2::new(piece.b[0], piece.b[1]);
        let len = (b - a).norm();
        let dir = (b - a) / len;
        let normal = Vector2::new(-dir.y, dir.x);
        let cols = (len / cfg.wall_spacing).ceil() as usize + 1;
        let rows = (piece.height / cfg.wall_spacing).ceil() as usize + 1;
        let half_gap = 0.25 * wall.thickness.max(cfg.wall_sigma);
        let sides: &[f64] = if cfg.wall_layers >= 2 { &[-1.0, 1.0] } else { &[0.0] };
        for &side in sides {
            let shade: f64 = 0.35 + 0.4 * rng.random::<f64>();
            for j in 0..rows {
                let z = piece.height * j as f64 / (rows - 1) as f64;
                for i in 0..cols {
                    let g = a + dir * (len * i as f64 / (cols - 1) as f64) + normal * (side * half_gap);
                    let tint = 0.05 * (rng.random::<f64>() - 0.5);
                    let color = Vector3::new(shade + tint, shade * 0.9 + tint, shade * 0.8 + tint).map(|v| v.clamp(0.0, 1.0));
                    let center = Vector3::new(g.x, g.y, z);
                    let face = if side == 0.0 { 1.0 } else { side };
                    truth.gaussian_room.push(plan.room_of(&(g + normal * face * 1e-6)));
                    gaussians.push(Gaussian3D::isotropic(center, cfg.wall_sigma, cfg.wall_opacity, color));
                }
            }
        }
    }
    for r in &plan.rooms {
        let mut rng = room_rng(cfg.seed, r.id, 3);
        let [w, h] = r.size();
        let top = DEFAULT_WALL_HEIGHT.min(plan.walls.iter().map(|w| w.height).fold(f64::INFINITY, f64::min));
        let base = Vector3::new(rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>());
        for _ in 0..cfg.fillers_per_room {
            let mean = Vector3::new(
                r.min[0] + 0.3 + rng.random::<f64>() * (w - 0.6),
                r.min[1] + 0.3 + rng.random::<f64>() * (h - 0.6),
                0.2 + rng.random::<f64>() * (top - 0.8),
            );
            let scale = Vector3::new(
                0.05 + 0.15 * rng.random::<f64>(),
                0.05 + 0.15 * rng.random::<f64>(),
                0.05 + 0.15 * rng.random::<f64>(),
            );
            let rotation = UnitQuaternion::from_euler_angles(
                rng.random::<f64>() * std::f64::consts::PI,
                rng.random::<f64>() * std::f64::consts::PI,
                rng.random::<f64>() * std::f64::consts::PI,
            );
            let color = (base * 0.6 + Vector3::new(rng.random(), rng.random(), rng.random()) * 0.4).map(|v: f64| v.clamp(0.0, 1.0));
            truth.gaussian_room.push(r.id);
            gaussians.push(Gaussian3D {
                mean,
                scale,
                rotation,
                opacity: 0.2 + 0.3 * rng.random::<f64>(),
                color,
            });
        }
    }

    Ok(SyntheticScene {
        plan: plan.clone(),
        model,
        gaussians: GaussianScene::new(gaussians),
        truth,
    })
}

/// Exhaustive minimum normalized cut over all two-way partitions.
///
/// Returns labels with node 0 on side 0 and the cut value `cut/vol(A) + cut/vol(B)`.
pub fn normalized_cut_bruteforce(similarity: &DMatrix<f64>) -> Result<(Vec<usize>, f64)> {
    let n = similarity.nrows();
    if n > BRUTEFORCE_MAX_NODES {
        return Err(Error::OracleSize {
            n,
            max: BRUTEFORCE_MAX_NODES,
        });
    }
    if n < 2 {
        return Err(Error::Precondition("need at least two nodes to cut".into()));
    }
    let degree: Vec<f64> = (0..n).map(|i| similarity.row(i).sum()).collect();
    let mut best: Option<(u32, f64)> = None;
    // Bit i set puts node i on side 1; node 0 stays on side 0.
    for mask in 1u32..(1 << (n - 1)) {
        let side = |i: usize| i > 0 && mask >> (i - 1) & 1 == 1;
        let (mut cut, mut vol_a, mut vol_b) = (0.0, 0.0, 0.0);
        for i in 0..n {
            if side(i) {
                vol_b += degree[i];
            } else {
                vol_a += degree[i];
            }
            for j in 0..n {
                if !side(i) && side(j) {
                    cut += similarity[(i, j)];
                }
            }
        }
        let term = |vol: f64| if cut == 0.0 { 0.0 } else if vol > 0.0 { cut / vol } else { f64::INFINITY };
        let value = term(vol_a) + term(vol_b);
        if best.is_none_or(|(_, v)| value < v) {
            best = Some((mask, value));
        }
    }
    let (mask, value) = best.expect("n >= 2");
    let labels = (0..n).map(|i| usize::from(i > 0 && mask >> (i - 1) & 1 == 1)).collect();
    Ok((labels, value))
}

/// Share of view-graph edge mass (shared-point counts) between cameras of different rooms.
pub fn cross_room_edge_fraction(model: &SceneModel, truth: &GroundTruth) -> f64 {
    let cov = model.covisibility_matrix();
    let ids = model.camera_ids();
    let (mut cross, mut total) = (0usize, 0usize);
    for i in 0..ids.len() {
        for j in 0..ids.len() {
            if i == j {
                continue;
            }
            total += cov[i][j];
            if truth.camera_room[&ids[i]] != truth.camera_room[&ids[j]] {
                cross += cov[i][j];
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        cross as f64 / total as f64
    }
}
