//! JSON form of a [`SceneDivision`].

use std::collections::BTreeSet;
use std::path::Path;

use nalgebra::{Quaternion, UnitQuaternion, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::camera_selection::RegionCameraSets;
use crate::division::{Boundary, Region, SceneDivision, DIVISION_SCHEMA};
use crate::error::{Error, Result};
use crate::geometry::HalfPlane;
use crate::sfm::{Camera, CameraId};

#[derive(Serialize, Deserialize)]
struct CameraJson {
    id: CameraId,
    position: [f64; 3],
    /// World-from-camera rotation as `[w, x, y, z]`.
    rotation: [f64; 4],
    focal: f64,
    principal_point: [f64; 2],
    image_size: [u32; 2],
}

#[derive(Serialize, Deserialize)]
struct BoundaryJson {
    nx: f64,
    ny: f64,
    b: f64,
    neighbor_id: usize,
}

#[derive(Serialize, Deserialize)]
struct CameraSetsJson {
    base: BTreeSet<CameraId>,
    extended: BTreeSet<CameraId>,
    border: BTreeSet<CameraId>,
    tau_ext: f64,
}

#[derive(Serialize, Deserialize)]
struct RegionJson {
    id: usize,
    camera_ids: Vec<CameraId>,
    boundaries: Vec<BoundaryJson>,
    hull: Vec<[f64; 2]>,
    centroid: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    camera_sets: Option<CameraSetsJson>,
}

#[derive(Serialize, Deserialize)]
struct DivisionJson {
    schema: String,
    up_axis: [f64; 3],
    ground_basis: [[f64; 3]; 2],
    domain: [[f64; 2]; 2],
    scene_diameter: f64,
    cameras: Vec<CameraJson>,
    regions: Vec<RegionJson>,
    #[serde(default)]
    provenance: serde_json::Value,
}

fn v2(v: &Vector2<f64>) -> [f64; 2] {
    [v.x, v.y]
}

fn v3(v: &Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

impl SceneDivision {
    /// Pretty JSON with `provenance` embedded verbatim.
    pub fn to_json(&self, provenance: &serde_json::Value) -> String {
        let doc = DivisionJson {
            schema: DIVISION_SCHEMA.into(),
            up_axis: v3(&self.up_axis),
            ground_basis: [v3(&self.ground_basis[0]), v3(&self.ground_basis[1])],
            domain: [v2(&self.domain[0]), v2(&self.domain[1])],
            scene_diameter: self.scene_diameter,
            cameras: self
                .cameras
                .iter()
                .map(|c| {
                    let q = c.rotation.quaternion();
                    CameraJson {
                        id: c.id,
                        position: v3(&c.position),
                        rotation: [q.w, q.i, q.j, q.k],
                        focal: c.focal,
                        principal_point: v2(&c.principal_point),
                        image_size: c.image_size,
                    }
                })
                .collect(),
            regions: self
                .regions
                .iter()
                .map(|r| RegionJson {
                    id: r.id,
                    camera_ids: r.camera_ids.clone(),
                    boundaries: r
                        .boundary
                        .iter()
                        .map(|b| BoundaryJson {
                            nx: b.plane.normal.x,
                            ny: b.plane.normal.y,
                            b: b.plane.offset,
                            neighbor_id: b.neighbor,
                        })
                        .collect(),
                    hull: r.hull.iter().map(v2).collect(),
                    centroid: v2(&r.centroid),
                    camera_sets: self.camera_sets.iter().find(|s| s.region_id == r.id).map(|s| CameraSetsJson {
                        base: s.base.clone(),
                        extended: s.extended.clone(),
                        border: s.border.clone(),
                        tau_ext: s.tau_ext,
                    }),
                })
                .collect(),
            provenance: provenance.clone(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("division serializes");
        text.push('\n');
        text
    }

    /// Parses a division and returns it with its provenance block.
    pub fn from_json(text: &str) -> Result<(Self, serde_json::Value)> {
        let doc: DivisionJson = serde_json::from_str(text).map_err(|e| Error::format("division", e.to_string()))?;
        if doc.schema != DIVISION_SCHEMA {
            return Err(Error::format("division", format!("unsupported schema `{}`", doc.schema)));
        }
        let cameras: Vec<Camera> = doc
            .cameras
            .iter()
            .map(|c| {
                let [w, x, y, z] = c.rotation;
                Camera {
                    id: c.id,
                    position: Vector3::from(c.position),
                    rotation: UnitQuaternion::from_quaternion(Quaternion::new(w, x, y, z)),
                    focal: c.focal,
                    principal_point: Vector2::from(c.principal_point),
                    image_size: c.image_size,
                    observed_points: BTreeSet::new(),
                }
            })
            .collect();
        let known: BTreeSet<CameraId> = cameras.iter().map(|c| c.id).collect();
        let mut assignment = std::collections::BTreeMap::new();
        let mut camera_sets = Vec::new();
        let mut regions = Vec::with_capacity(doc.regions.len());
        for (i, r) in doc.regions.into_iter().enumerate() {
            if r.id != i {
                return Err(Error::format("division", format!("region {} listed at position {i}", r.id)));
            }
            for id in &r.camera_ids {
                if !known.contains(id) || assignment.insert(*id, r.id).is_some() {
                    return Err(Error::format("division", format!("camera {id} is unknown or assigned twice")));
                }
            }
            if let Some(s) = r.camera_sets {
                camera_sets.push(RegionCameraSets {
                    region_id: r.id,
                    base: s.base,
                    extended: s.extended,
                    border: s.border,
                    tau_ext: s.tau_ext,
                });
            }
            regions.push(Region {
                id: r.id,
                camera_ids: r.camera_ids,
                boundary: r
                    .boundaries
                    .iter()
                    .map(|b| Boundary {
                        neighbor: b.neighbor_id,
                        plane: HalfPlane::new(Vector2::new(b.nx, b.ny), b.b),
                    })
                    .collect(),
                hull: r.hull.iter().map(|p| Vector2::from(*p)).collect(),
                centroid: Vector2::from(r.centroid),
            });
        }
        let n_regions = regions.len();
        if regions.iter().flat_map(|r| &r.boundary).any(|b| b.neighbor >= n_regions) {
            return Err(Error::format("division", "boundary refers to a missing region"));
        }
        let division = SceneDivision {
            regions,
            up_axis: Vector3::from(doc.up_axis),
            ground_basis: [Vector3::from(doc.ground_basis[0]), Vector3::from(doc.ground_basis[1])],
            assignment,
            domain: [Vector2::from(doc.domain[0]), Vector2::from(doc.domain[1])],
            scene_diameter: doc.scene_diameter,
            cameras,
            camera_sets,
        };
        Ok((division, doc.provenance))
    }

    pub fn load_json(path: &Path) -> Result<(Self, serde_json::Value)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Format { message, .. } => Error::format(path.display().to_string(), message),
            other => other,
        })
    }

    pub fn save_json(&self, path: &Path, provenance: &serde_json::Value) -> Result<()> {
        std::fs::write(path, self.to_json(provenance)).map_err(|e| Error::io(path, e))
    }
}
