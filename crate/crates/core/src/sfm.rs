//! Posed cameras, sparse points, and their COLMAP-text and JSON encodings.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{Quaternion, UnitQuaternion, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CameraId = u32;
pub type PointId = u64;

pub const SCENE_SCHEMA: &str = "occlupart-scene/1";

/// A posed pinhole camera. `rotation` maps camera coordinates (x right, y down, z forward)
/// to world coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Camera {
    pub id: CameraId,
    pub position: Vector3<f64>,
    pub rotation: UnitQuaternion<f64>,
    pub focal: f64,
    pub principal_point: Vector2<f64>,
    pub image_size: [u32; 2],
    pub observed_points: BTreeSet<PointId>,
}

impl Camera {
    pub fn forward(&self) -> Vector3<f64> {
        self.rotation * Vector3::z()
    }

    pub fn right(&self) -> Vector3<f64> {
        self.rotation * Vector3::x()
    }

    pub fn world_to_camera(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.inverse_transform_vector(&(p - self.position))
    }

    /// Full horizontal field of view in radians.
    pub fn horizontal_fov(&self) -> f64 {
        2.0 * (self.image_size[0] as f64 / (2.0 * self.focal)).atan()
    }

    /// Builds a camera at `position` looking along `forward` with image rows pointing
    /// against `up`.
    pub fn looking(
        id: CameraId,
        position: Vector3<f64>,
        forward: Vector3<f64>,
        up: Vector3<f64>,
        focal: f64,
        image_size: [u32; 2],
    ) -> Self {
        let f = forward.normalize();
        let right = f.cross(&up).normalize();
        let down = f.cross(&right);
        let m = nalgebra::Matrix3::from_columns(&[right, down, f]);
        let rotation = UnitQuaternion::from_rotation_matrix(&nalgebra::Rotation3::from_matrix_unchecked(m));
        Camera {
            id,
            position,
            rotation,
            focal,
            principal_point: Vector2::new(image_size[0] as f64 / 2.0, image_size[1] as f64 / 2.0),
            image_size,
            observed_points: BTreeSet::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.rotation.quaternion().norm();
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::Consistency(format!("camera {} rotation norm {n}", self.id)));
        }
        if !(self.focal > 0.0) || self.image_size[0] == 0 || self.image_size[1] == 0 {
            return Err(Error::Consistency(format!("camera {} has invalid intrinsics", self.id)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenePoint {
    pub position: Vector3<f64>,
    pub observing_cameras: BTreeSet<CameraId>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparsePointSet {
    pub points: BTreeMap<PointId, ScenePoint>,
}

impl SparsePointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, id: PointId) -> Option<&ScenePoint> {
        self.points.get(&id)
    }
}

/// Immutable, validated scene: unique camera IDs, symmetric observations, unit up axis.
#[derive(Debug, Clone)]
pub struct SceneModel {
    cameras: Vec<Camera>,
    points: SparsePointSet,
    up_axis: Vector3<f64>,
    index: HashMap<CameraId, usize>,
}

impl PartialEq for SceneModel {
    fn eq(&self, other: &Self) -> bool {
        self.cameras == other.cameras && self.points == other.points && self.up_axis == other.up_axis
    }
}

impl SceneModel {
    /// Validates and assembles a model. `observing_cameras` of every point is rebuilt from
    /// the cameras' observation sets, so callers only need to fill one side.
    pub fn new(
        cameras: Vec<Camera>,
        point_positions: BTreeMap<PointId, Vector3<f64>>,
        up_axis: Option<Vector3<f64>>,
    ) -> Result<Self> {
        if cameras.is_empty() {
            return Err(Error::Consistency("model has no cameras".into()));
        }
        let mut index = HashMap::with_capacity(cameras.len());
        for (i, cam) in cameras.iter().enumerate() {
            cam.validate()?;
            if index.insert(cam.id, i).is_some() {
                return Err(Error::Consistency(format!("duplicate camera id {}", cam.id)));
            }
        }
        let mut points: BTreeMap<PointId, ScenePoint> = point_positions
            .into_iter()
            .map(|(id, position)| {
                (
                    id,
                    ScenePoint {
                        position,
                        observing_cameras: BTreeSet::new(),
                    },
                )
            })
            .collect();
        for cam in &cameras {
            for pid in &cam.observed_points {
                let p = points.get_mut(pid).ok_or_else(|| {
                    Error::Consistency(format!("camera {} observes unknown point {pid}", cam.id))
                })?;
                p.observing_cameras.insert(cam.id);
            }
        }
        let up_axis = match up_axis {
            Some(u) => {
                if (u.norm() - 1.0).abs() > 1e-9 {
                    return Err(Error::Consistency("up axis is not unit length".into()));
                }
                u
            }
            None => default_up_axis(&cameras),
        };
        Ok(SceneModel {
            cameras,
            points: SparsePointSet { points },
            up_axis,
            index,
        })
    }

    pub fn cameras(&self) -> &[Camera] {
        &self.cameras
    }

    pub fn points(&self) -> &SparsePointSet {
        &self.points
    }

    pub fn up_axis(&self) -> Vector3<f64> {
        self.up_axis
    }

    pub fn with_up_axis(mut self, up: Vector3<f64>) -> Result<Self> {
        if (up.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::Consistency("up axis is not unit length".into()));
        }
        self.up_axis = up;
        Ok(self)
    }

    pub fn camera_index(&self, id: CameraId) -> Result<usize> {
        self.index.get(&id).copied().ok_or(Error::Key(id as u64))
    }

    pub fn camera(&self, id: CameraId) -> Result<&Camera> {
        Ok(&self.cameras[self.camera_index(id)?])
    }

    pub fn camera_ids(&self) -> Vec<CameraId> {
        self.cameras.iter().map(|c| c.id).collect()
    }

    /// Number of sparse points observed by both cameras.
    pub fn covisibility_count(&self, i: CameraId, j: CameraId) -> Result<usize> {
        let a = &self.camera(i)?.observed_points;
        let b = &self.camera(j)?.observed_points;
        let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        Ok(small.iter().filter(|p| large.contains(p)).count())
    }

    /// Dense co-visibility counts indexed like [`SceneModel::cameras`], diagonal zero.
    pub fn covisibility_matrix(&self) -> Vec<Vec<usize>> {
        let n = self.cameras.len();
        let mut m = vec![vec![0usize; n]; n];
        for p in self.points.points.values() {
            let obs: Vec<usize> = p.observing_cameras.iter().map(|c| self.index[c]).collect();
            for (a, &i) in obs.iter().enumerate() {
                for &j in &obs[a + 1..] {
                    m[i][j] += 1;
                    m[j][i] += 1;
                }
            }
        }
        m
    }

    /// Orthonormal basis `(e1, e2)` of the plane perpendicular to the up axis.
    pub fn ground_basis(&self) -> [Vector3<f64>; 2] {
        ground_basis(&self.up_axis)
    }

    pub fn to_json(&self) -> String {
        let doc = SceneDoc {
            schema: SCENE_SCHEMA.to_string(),
            up_axis: self.up_axis.into(),
            cameras: self
                .cameras
                .iter()
                .map(|c| {
                    let q = c.rotation.quaternion();
                    CameraDoc {
                        id: c.id,
                        position: c.position.into(),
                        rotation: [q.w, q.i, q.j, q.k],
                        focal: c.focal,
                        principal_point: c.principal_point.into(),
                        image_size: c.image_size,
                        observed_points: c.observed_points.iter().copied().collect(),
                    }
                })
                .collect(),
            points: self
                .points
                .points
                .iter()
                .map(|(id, p)| PointDoc {
                    id: *id,
                    position: p.position.into(),
                    observing_cameras: p.observing_cameras.iter().copied().collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("scene serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SceneDoc = serde_json::from_str(text).map_err(|e| Error::format("scene json", e.to_string()))?;
        if doc.schema != SCENE_SCHEMA {
            return Err(Error::format("scene json", format!("unexpected schema {:?}", doc.schema)));
        }
        let cameras = doc
            .cameras
            .into_iter()
            .map(|c| Camera {
                id: c.id,
                position: c.position.into(),
                // Stored as written; `SceneModel::new` rejects non-unit rotations.
                rotation: UnitQuaternion::new_unchecked(Quaternion::new(
                    c.rotation[0],
                    c.rotation[1],
                    c.rotation[2],
                    c.rotation[3],
                )),
                focal: c.focal,
                principal_point: c.principal_point.into(),
                image_size: c.image_size,
                observed_points: c.observed_points.into_iter().collect(),
            })
            .collect();
        let mut positions = BTreeMap::new();
        let mut declared: BTreeMap<PointId, BTreeSet<CameraId>> = BTreeMap::new();
        for p in doc.points {
            positions.insert(p.id, Vector3::from(p.position));
            declared.insert(p.id, p.observing_cameras.into_iter().collect());
        }
        let model = SceneModel::new(cameras, positions, Some(Vector3::from(doc.up_axis)))?;
        for (id, p) in &model.points.points {
            if declared.get(id) != Some(&p.observing_cameras) {
                return Err(Error::Consistency(format!(
                    "point {id} observing_cameras disagrees with camera observations"
                )));
            }
        }
        Ok(model)
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

/// World axis (positive direction) along which camera positions vary least.
pub fn default_up_axis(cameras: &[Camera]) -> Vector3<f64> {
    let n = cameras.len().max(1) as f64;
    let mean = cameras.iter().fold(Vector3::zeros(), |a, c| a + c.position) / n;
    let var = cameras.iter().fold(Vector3::zeros(), |a: Vector3<f64>, c| {
        let d = c.position - mean;
        a + d.component_mul(&d)
    });
    let mut axis = 0;
    for k in 1..3 {
        if var[k] < var[axis] {
            axis = k;
        }
    }
    let mut up = Vector3::zeros();
    up[axis] = 1.0;
    up
}

pub fn ground_basis(up: &Vector3<f64>) -> [Vector3<f64>; 2] {
    let mut axis = 0;
    for k in 1..3 {
        if up[k].abs() < up[axis].abs() {
            axis = k;
        }
    }
    let mut a = Vector3::zeros();
    a[axis] = 1.0;
    let e1 = (a - up * up.dot(&a)).normalize();
    let e2 = up.cross(&e1);
    [e1, e2]
}

#[derive(Serialize, Deserialize)]
struct SceneDoc {
    schema: String,
    up_axis: [f64; 3],
    cameras: Vec<CameraDoc>,
    points: Vec<PointDoc>,
}

#[derive(Serialize, Deserialize)]
struct CameraDoc {
    id: CameraId,
    position: [f64; 3],
    /// `[w, x, y, z]`, world-from-camera.
    rotation: [f64; 4],
    focal: f64,
    principal_point: [f64; 2],
    image_size: [u32; 2],
    observed_points: Vec<PointId>,
}

#[derive(Serialize, Deserialize)]
struct PointDoc {
    id: PointId,
    position: [f64; 3],
    observing_cameras: Vec<CameraId>,
}

// ---------------------------------------------------------------------------
// COLMAP text format

struct Intrinsics {
    width: u32,
    height: u32,
    focal: f64,
    cx: f64,
    cy: f64,
}

fn read_text(dir: &Path, name: &str) -> Result<String> {
    let path = dir.join(name);
    fs::read_to_string(&path).map_err(|_| Error::format(name, format!("cannot read {}", path.display())))
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, file: &str, line: usize, what: &str) -> Result<T> {
    tok.ok_or_else(|| Error::line(file, line, format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::line(file, line, format!("invalid {what}")))
}

fn parse_cameras(text: &str) -> Result<HashMap<u32, Intrinsics>> {
    const FILE: &str = "cameras.txt";
    let mut out = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let id: u32 = parse_num(it.next(), FILE, ln, "CAMERA_ID")?;
        let model = it.next().ok_or_else(|| Error::line(FILE, ln, "missing MODEL"))?;
        let width: u32 = parse_num(it.next(), FILE, ln, "WIDTH")?;
        let height: u32 = parse_num(it.next(), FILE, ln, "HEIGHT")?;
        let params: Vec<f64> = it
            .map(|t| t.parse().map_err(|_| Error::line(FILE, ln, "invalid PARAMS")))
            .collect::<Result<_>>()?;
        let (focal, cx, cy) = match (model, params.as_slice()) {
            ("SIMPLE_PINHOLE", [f, cx, cy]) => (*f, *cx, *cy),
            // A single focal length is kept; fx is used.
            ("PINHOLE", [fx, _fy, cx, cy]) => (*fx, *cx, *cy),
            ("SIMPLE_PINHOLE" | "PINHOLE", _) => {
                return Err(Error::line(FILE, ln, format!("wrong parameter count for {model}")))
            }
            _ => return Err(Error::line(FILE, ln, format!("unsupported camera model {model}"))),
        };
        out.insert(
            id,
            Intrinsics {
                width,
                height,
                focal,
                cx,
                cy,
            },
        );
    }
    Ok(out)
}

fn parse_points(text: &str) -> Result<BTreeMap<PointId, (Vector3<f64>, Vec<u32>)>> {
    const FILE: &str = "points3D.txt";
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < 8 || (toks.len() - 8) % 2 != 0 {
            return Err(Error::line(FILE, ln, "expected POINT3D_ID X Y Z R G B ERROR TRACK[]"));
        }
        let id: PointId = parse_num(Some(toks[0]), FILE, ln, "POINT3D_ID")?;
        let mut xyz = [0.0; 3];
        for k in 0..3 {
            xyz[k] = parse_num(Some(toks[1 + k]), FILE, ln, "coordinate")?;
        }
        for k in 4..8 {
            parse_num::<f64>(Some(toks[k]), FILE, ln, "color/error")?;
        }
        let mut track = Vec::new();
        for pair in toks[8..].chunks(2) {
            track.push(parse_num::<u32>(Some(pair[0]), FILE, ln, "IMAGE_ID")?);
            parse_num::<i64>(Some(pair[1]), FILE, ln, "POINT2D_IDX")?;
        }
        out.insert(id, (Vector3::from(xyz), track));
    }
    Ok(out)
}

/// Loads `cameras.txt`, `images.txt` and `points3D.txt` from a COLMAP text export.
///
/// Each registered image becomes a [`Camera`] with the image ID as its node ID.
pub fn load_colmap_text(dir: &Path) -> Result<SceneModel> {
    let intr = parse_cameras(&read_text(dir, "cameras.txt")?)?;
    let images = read_text(dir, "images.txt")?;
    let points = parse_points(&read_text(dir, "points3D.txt")?)?;

    const FILE: &str = "images.txt";
    let mut cameras = Vec::new();
    let mut lines = images.lines().enumerate();
    while let Some((i, raw)) = lines.next() {
        let ln = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < 9 {
            return Err(Error::line(FILE, ln, "expected IMAGE_ID QW QX QY QZ TX TY TZ CAMERA_ID NAME"));
        }
        let id: CameraId = parse_num(Some(toks[0]), FILE, ln, "IMAGE_ID")?;
        let mut q = [0.0; 4];
        for k in 0..4 {
            q[k] = parse_num(Some(toks[1 + k]), FILE, ln, "quaternion")?;
        }
        let mut t = [0.0; 3];
        for k in 0..3 {
            t[k] = parse_num(Some(toks[5 + k]), FILE, ln, "translation")?;
        }
        let cam_id: u32 = parse_num(Some(toks[8]), FILE, ln, "CAMERA_ID")?;
        let k = intr
            .get(&cam_id)
            .ok_or_else(|| Error::line(FILE, ln, format!("unknown CAMERA_ID {cam_id}")))?;
        let quat = Quaternion::new(q[0], q[1], q[2], q[3]);
        if quat.norm() < 1e-12 {
            return Err(Error::line(FILE, ln, "zero quaternion"));
        }
        let cam_from_world = UnitQuaternion::from_quaternion(quat);
        let t = Vector3::from(t);
        let position = -(cam_from_world.inverse_transform_vector(&t));

        let mut observed = BTreeSet::new();
        if let Some((j, obs_line)) = lines.next() {
            let toks: Vec<&str> = obs_line.split_whitespace().collect();
            if toks.len() % 3 != 0 {
                return Err(Error::line(FILE, j + 1, "POINTS2D must be (X, Y, POINT3D_ID) triplets"));
            }
            for tri in toks.chunks(3) {
                parse_num::<f64>(Some(tri[0]), FILE, j + 1, "X")?;
                parse_num::<f64>(Some(tri[1]), FILE, j + 1, "Y")?;
                let pid: i64 = parse_num(Some(tri[2]), FILE, j + 1, "POINT3D_ID")?;
                if pid >= 0 {
                    let pid = pid as PointId;
                    if !points.contains_key(&pid) {
                        return Err(Error::Consistency(format!("image {id} references unknown point {pid}")));
                    }
                    observed.insert(pid);
                }
            }
        }
        cameras.push(Camera {
            id,
            position,
            rotation: cam_from_world.inverse(),
            focal: k.focal,
            principal_point: Vector2::new(k.cx, k.cy),
            image_size: [k.width, k.height],
            observed_points: observed,
        });
    }

    // Tracks and per-image observations are merged so the observation relation is symmetric
    // even when one side of the export is incomplete.
    let idx: HashMap<CameraId, usize> = cameras.iter().enumerate().map(|(i, c)| (c.id, i)).collect();
    for (pid, (_, track)) in &points {
        for img in track {
            let &ci = idx
                .get(img)
                .ok_or_else(|| Error::Consistency(format!("point {pid} track references unknown image {img}")))?;
            cameras[ci].observed_points.insert(*pid);
        }
    }
    let positions = points.into_iter().map(|(id, (p, _))| (id, p)).collect();
    SceneModel::new(cameras, positions, None)
}

/// Writes a COLMAP text export (one `SIMPLE_PINHOLE` intrinsics entry per image).
pub fn write_colmap_text(model: &SceneModel, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut cams = String::from("# Camera list with one line of data per camera:\n#   CAMERA_ID, MODEL, WIDTH, HEIGHT, PARAMS[]\n");
    let mut imgs = String::from(
        "# Image list with two lines of data per image:\n#   IMAGE_ID, QW, QX, QY, QZ, TX, TY, TZ, CAMERA_ID, NAME\n#   POINTS2D[] as (X, Y, POINT3D_ID)\n",
    );
    let mut tracks: BTreeMap<PointId, Vec<(CameraId, usize)>> = BTreeMap::new();
    for cam in model.cameras() {
        let _ = writeln!(
            cams,
            "{} SIMPLE_PINHOLE {} {} {} {} {}",
            cam.id, cam.image_size[0], cam.image_size[1], cam.focal, cam.principal_point.x, cam.principal_point.y
        );
        let cam_from_world = cam.rotation.inverse();
        let q = cam_from_world.quaternion();
        let t = -(cam_from_world * cam.position);
        let _ = writeln!(
            imgs,
            "{} {} {} {} {} {} {} {} {} image_{:06}.png",
            cam.id, q.w, q.i, q.j, q.k, t.x, t.y, t.z, cam.id, cam.id
        );
        let mut obs = Vec::new();
        for (k, pid) in cam.observed_points.iter().enumerate() {
            let p = &model.points().points[pid].position;
            let c = cam.world_to_camera(p);
            let (u, v) = if c.z > 1e-9 {
                (
                    cam.focal * c.x / c.z + cam.principal_point.x,
                    cam.focal * c.y / c.z + cam.principal_point.y,
                )
            } else {
                (-1.0, -1.0)
            };
            obs.push(format!("{u} {v} {pid}"));
            tracks.entry(*pid).or_default().push((cam.id, k));
        }
        imgs.push_str(&obs.join(" "));
        imgs.push('\n');
    }
    let mut pts = String::from(
        "# 3D point list with one line of data per point:\n#   POINT3D_ID, X, Y, Z, R, G, B, ERROR, TRACK[] as (IMAGE_ID, POINT2D_IDX)\n",
    );
    for (pid, p) in &model.points().points {
        let _ = write!(pts, "{} {} {} {} 128 128 128 0", pid, p.position.x, p.position.y, p.position.z);
        if let Some(track) = tracks.get(pid) {
            for (img, k) in track {
                let _ = write!(pts, " {img} {k}");
            }
        }
        pts.push('\n');
    }
    for (name, body) in [("cameras.txt", cams), ("images.txt", imgs), ("points3D.txt", pts)] {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cam(id: CameraId, x: f64, obs: &[PointId]) -> Camera {
        let mut c = Camera::looking(id, Vector3::new(x, 0.0, 1.0), Vector3::x(), Vector3::z(), 100.0, [64, 64]);
        c.observed_points = obs.iter().copied().collect();
        c
    }

    fn positions(ids: &[PointId]) -> BTreeMap<PointId, Vector3<f64>> {
        ids.iter().map(|&i| (i, Vector3::new(i as f64, 1.0, 0.0))).collect()
    }

    #[test]
    fn observation_sets_are_symmetric() {
        let model = SceneModel::new(vec![cam(1, 0.0, &[1, 2]), cam(2, 1.0, &[1, 2, 3])], positions(&[1, 2, 3]), None)
            .unwrap();
        let p = &model.points().points;
        assert_eq!(p[&1].observing_cameras, [1, 2].into_iter().collect());
        assert_eq!(p[&3].observing_cameras, [2].into_iter().collect());
    }

    #[test]
    fn covisibility_counts() {
        let model = SceneModel::new(
            vec![cam(1, 0.0, &[1, 2, 3, 4, 5]), cam(2, 1.0, &[1, 2, 3, 4, 5]), cam(3, 2.0, &[6])],
            positions(&[1, 2, 3, 4, 5, 6]),
            None,
        )
        .unwrap();
        assert_eq!(model.covisibility_count(1, 2).unwrap(), 5);
        assert_eq!(model.covisibility_count(1, 3).unwrap(), 0);
        assert!(matches!(model.covisibility_count(1, 9), Err(Error::Key(9))));
        let m = model.covisibility_matrix();
        assert_eq!(m[0][1], 5);
        assert_eq!(m[1][0], 5);
        assert_eq!(m[0][0], 0);
    }

    #[test]
    fn unknown_point_is_rejected() {
        let err = SceneModel::new(vec![cam(1, 0.0, &[7])], positions(&[1]), None).unwrap_err();
        assert!(matches!(err, Error::Consistency(_)));
    }

    #[test]
    fn duplicate_camera_ids_are_rejected() {
        let err = SceneModel::new(vec![cam(1, 0.0, &[]), cam(1, 1.0, &[])], BTreeMap::new(), None).unwrap_err();
        assert!(matches!(err, Error::Consistency(_)));
    }

    #[test]
    fn up_axis_defaults_to_least_variance_axis() {
        let model = SceneModel::new(vec![cam(1, 0.0, &[]), cam(2, 5.0, &[])], BTreeMap::new(), None).unwrap();
        // x varies, y and z are constant; y comes first among the ties.
        assert_eq!(model.up_axis(), Vector3::y());
        let [e1, e2] = ground_basis(&Vector3::z());
        assert_eq!(e1, Vector3::x());
        assert_eq!(e2, Vector3::y());
    }

    #[test]
    fn looking_camera_axes() {
        let c = cam(1, 0.0, &[]);
        assert!((c.forward() - Vector3::x()).norm() < 1e-12);
        assert!((c.right() + Vector3::y()).norm() < 1e-12);
    }
}
