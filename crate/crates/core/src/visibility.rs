//! Region-based visibility masks, region subdivision and culled rendering.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::{Vector2, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::division::SceneDivision;
use crate::error::{Error, Result};
use crate::geometry::{clip_polygon, polygon_area, polygon_contains, polygon_distance, point_polygon_distance};
use crate::sfm::{Camera, SceneModel};
use crate::splat::{backside_camera, rasterize_with, GaussianScene, RasterConfig, RenderResult};
use crate::Real;

pub const MASK_SCHEMA: &str = "occlupart-mask/1";
pub const DEFAULT_THRESHOLD: f64 = 0.01;
pub const DEFAULT_RENDER_SIZE: (usize, usize) = (256, 256);
/// Inward shift of boundary lines, as a fraction of the region's camera spread.
pub const SHRINK_FACTOR: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubRegionTag {
    Whole,
    Interior,
    Border(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityMask {
    pub region_id: usize,
    pub sub_region: SubRegionTag,
    /// Ground-plane polygon the mask applies to.
    pub polygon: Vec<Vector2<f64>>,
    pub bits: Vec<bool>,
}

impl VisibilityMask {
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| !*a || *b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskConfig {
    /// A Gaussian is visible when its contribution strictly exceeds this value.
    pub threshold: f64,
    pub render_size: (usize, usize),
    pub raster: RasterConfig,
}

impl Default for MaskConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            render_size: DEFAULT_RENDER_SIZE,
            raster: RasterConfig::default(),
        }
    }
}

fn or_into(acc: &mut [bool], bits: &[bool]) {
    for (a, b) in acc.iter_mut().zip(bits) {
        *a |= *b;
    }
}

/// Gaussians contributing more than the threshold to the camera's view or its backside view.
pub fn camera_visibility<T: Real>(scene: &GaussianScene<T>, cam: &Camera, up: &Vector3<f64>, cfg: &MaskConfig) -> Vec<bool> {
    let (w, h) = cfg.render_size;
    let threshold = T::of(cfg.threshold);
    let mut bits = vec![false; scene.len()];
    for view in [cam.clone(), backside_camera(cam, up)] {
        let r = rasterize_with(scene, &view, w, h, None, &cfg.raster);
        for (b, m) in bits.iter_mut().zip(&r.max_weight) {
            *b |= *m > threshold;
        }
    }
    bits
}

fn cameras_visibility<T: Real>(
    scene: &GaussianScene<T>,
    cams: &[&Camera],
    up: &Vector3<f64>,
    cfg: &MaskConfig,
) -> Vec<Vec<bool>> {
    cams.par_iter().map(|c| camera_visibility(scene, c, up, cfg)).collect()
}

fn union(n: usize, parts: &[&Vec<bool>]) -> Vec<bool> {
    let mut acc = vec![false; n];
    for p in parts {
        or_into(&mut acc, p);
    }
    acc
}

fn region_cameras<'a>(model: &'a SceneModel, division: &SceneDivision, region: usize) -> Result<Vec<&'a Camera>> {
    let r = division.region(region)?;
    if r.camera_ids.is_empty() {
        return Err(Error::DegenerateRegion(region));
    }
    r.camera_ids.iter().map(|id| model.camera(*id)).collect()
}

pub fn compute_region_mask<T: Real>(
    scene: &GaussianScene<T>,
    model: &SceneModel,
    division: &SceneDivision,
    region: usize,
    cfg: &MaskConfig,
) -> Result<VisibilityMask> {
    let cams = region_cameras(model, division, region)?;
    let per_cam = cameras_visibility(scene, &cams, &division.up_axis, cfg);
    Ok(VisibilityMask {
        region_id: region,
        sub_region: SubRegionTag::Whole,
        polygon: division.region_polygon(region)?,
        bits: union(scene.len(), &per_cam.iter().collect::<Vec<_>>()),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubdividedRegion {
    pub region_id: usize,
    pub polygon: Vec<Vector2<f64>>,
    pub interior_polygon: Vec<Vector2<f64>>,
    pub border_strips: Vec<(usize, Vec<Vector2<f64>>)>,
    pub d_max: f64,
}

impl SubdividedRegion {
    /// Sub-region containing `p`: interior first, then strips in boundary order.
    pub fn locate(&self, p: &Vector2<f64>, eps: f64) -> Option<SubRegionTag> {
        if polygon_contains(&self.interior_polygon, p, eps) {
            return Some(SubRegionTag::Interior);
        }
        self.border_strips
            .iter()
            .find(|(_, poly)| polygon_contains(poly, p, eps))
            .map(|(n, _)| SubRegionTag::Border(*n))
    }

    /// Like [`locate`](Self::locate) but falls back to the nearest sub-region polygon.
    pub fn attribute(&self, p: &Vector2<f64>, eps: f64) -> SubRegionTag {
        self.locate(p, eps).unwrap_or_else(|| {
            let mut best = (point_polygon_distance(&self.interior_polygon, p), SubRegionTag::Interior);
            for (n, poly) in &self.border_strips {
                let d = point_polygon_distance(poly, p);
                if d < best.0 {
                    best = (d, SubRegionTag::Border(*n));
                }
            }
            best.1
        })
    }

    fn polygon_of(&self, tag: SubRegionTag) -> &[Vector2<f64>] {
        match tag {
            SubRegionTag::Interior => &self.interior_polygon,
            SubRegionTag::Border(n) => &self.border_strips.iter().find(|(m, _)| *m == n).expect("strip").1,
            SubRegionTag::Whole => &self.polygon,
        }
    }
}

pub fn subdivide_region(division: &SceneDivision, model: &SceneModel, region: usize) -> Result<SubdividedRegion> {
    let r = division.region(region)?;
    if r.camera_ids.len() < 2 || r.boundary.is_empty() {
        return Err(Error::Precondition(format!(
            "region {region} needs at least two cameras and one boundary to be subdivided"
        )));
    }
    let ground: Vec<Vector2<f64>> = r
        .camera_ids
        .iter()
        .map(|id| model.camera(*id).map(|c| division.project(&c.position)))
        .collect::<Result<_>>()?;
    let mut d_max: f64 = 0.0;
    for (i, a) in ground.iter().enumerate() {
        for b in &ground[i + 1..] {
            d_max = d_max.max((a - b).norm());
        }
    }
    let shift = SHRINK_FACTOR * d_max;
    let polygon = division.region_polygon(region)?;
    let mut interior = polygon.clone();
    let mut strips = Vec::with_capacity(r.boundary.len());
    for b in &r.boundary {
        let inner = b.plane.shifted(shift);
        interior = clip_polygon(&interior, &inner);
        strips.push((b.neighbor, clip_polygon(&polygon, &inner.flipped())));
    }
    if interior.len() < 3 || polygon_area(&interior) <= 1e-12 * division.scene_diameter.powi(2).max(1e-300) {
        return Err(Error::InteriorCollapsed(region));
    }
    Ok(SubdividedRegion {
        region_id: region,
        polygon,
        interior_polygon: interior,
        border_strips: strips,
        d_max,
    })
}

/// Interior and border masks of one region, from renders of its own cameras.
///
/// Cameras go to the sub-region containing their ground projection (nearest otherwise). A
/// sub-region without cameras takes the union of the non-empty sub-regions it touches, or of
/// every non-empty one when it touches none.
pub fn compute_subregion_masks<T: Real>(
    scene: &GaussianScene<T>,
    model: &SceneModel,
    division: &SceneDivision,
    region: usize,
    cfg: &MaskConfig,
) -> Result<Vec<VisibilityMask>> {
    let sub = subdivide_region(division, model, region)?;
    let cams = region_cameras(model, division, region)?;
    let per_cam = cameras_visibility(scene, &cams, &division.up_axis, cfg);
    Ok(subregion_masks_from(scene.len(), division, &sub, &cams, &per_cam))
}

fn subregion_masks_from(
    n: usize,
    division: &SceneDivision,
    sub: &SubdividedRegion,
    cams: &[&Camera],
    per_cam: &[Vec<bool>],
) -> Vec<VisibilityMask> {
    let eps = division.boundary_slack();
    let mut tags = vec![SubRegionTag::Interior];
    tags.extend(sub.border_strips.iter().map(|(n, _)| SubRegionTag::Border(*n)));
    let owner: Vec<SubRegionTag> = cams.iter().map(|c| sub.attribute(&division.project(&c.position), eps)).collect();
    let direct: Vec<Option<Vec<bool>>> = tags
        .iter()
        .map(|t| {
            let parts: Vec<&Vec<bool>> = owner.iter().zip(per_cam).filter(|(o, _)| *o == t).map(|(_, b)| b).collect();
            (!parts.is_empty()).then(|| union(n, &parts))
        })
        .collect();
    let touch = 1e-6 * division.scene_diameter.max(1.0);
    tags.iter()
        .enumerate()
        .map(|(i, &tag)| {
            let bits = match &direct[i] {
                Some(b) => b.clone(),
                None => {
                    let poly = sub.polygon_of(tag);
                    let filled: Vec<usize> = (0..tags.len()).filter(|&j| direct[j].is_some()).collect();
                    let near: Vec<usize> = filled
                        .iter()
                        .copied()
                        .filter(|&j| {
                            let other = sub.polygon_of(tags[j]);
                            !poly.is_empty() && !other.is_empty() && polygon_distance(poly, other) <= touch
                        })
                        .collect();
                    let pick = if near.is_empty() { filled } else { near };
                    union(n, &pick.iter().map(|&j| direct[j].as_ref().unwrap()).collect::<Vec<_>>())
                }
            };
            VisibilityMask {
                region_id: sub.region_id,
                sub_region: tag,
                polygon: sub.polygon_of(tag).to_vec(),
                bits,
            }
        })
        .collect()
}

/// Whole-region masks for every region, followed by each region's sub-region masks when it
/// can be subdivided. Every camera is rendered once.
pub fn compute_all_masks<T: Real>(
    scene: &GaussianScene<T>,
    model: &SceneModel,
    division: &SceneDivision,
    cfg: &MaskConfig,
) -> Result<MaskSet> {
    let n = scene.len();
    let mut masks = Vec::new();
    for region in 0..division.regions.len() {
        let cams = region_cameras(model, division, region)?;
        let per_cam = cameras_visibility(scene, &cams, &division.up_axis, cfg);
        masks.push(VisibilityMask {
            region_id: region,
            sub_region: SubRegionTag::Whole,
            polygon: division.region_polygon(region)?,
            bits: union(n, &per_cam.iter().collect::<Vec<_>>()),
        });
        match subdivide_region(division, model, region) {
            Ok(sub) => masks.extend(subregion_masks_from(n, division, &sub, &cams, &per_cam)),
            Err(e @ (Error::InteriorCollapsed(_) | Error::Precondition(_))) => {
                log::info!("region {region} kept whole: {e}");
            }
            Err(e) => return Err(e),
        }
    }
    Ok(MaskSet { n_gaussians: n, masks })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskSet {
    pub n_gaussians: usize,
    pub masks: Vec<VisibilityMask>,
}

#[derive(Serialize, Deserialize)]
struct MaskEntry {
    region: usize,
    sub_region: SubRegionTag,
    polygon: Vec<[f64; 2]>,
    offset: usize,
}

#[derive(Serialize, Deserialize)]
struct MaskHeader {
    schema: String,
    n_gaussians: usize,
    entries: Vec<MaskEntry>,
}

impl MaskSet {
    pub fn get(&self, region: usize, tag: SubRegionTag) -> Option<&VisibilityMask> {
        self.masks.iter().find(|m| m.region_id == region && m.sub_region == tag)
    }

    /// One JSON header line followed by the bitsets, each `ceil(n/8)` bytes, LSB first.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        let stride = self.n_gaussians.div_ceil(8);
        let header = MaskHeader {
            schema: MASK_SCHEMA.into(),
            n_gaussians: self.n_gaussians,
            entries: self
                .masks
                .iter()
                .enumerate()
                .map(|(i, m)| MaskEntry {
                    region: m.region_id,
                    sub_region: m.sub_region,
                    polygon: m.polygon.iter().map(|p| [p.x, p.y]).collect(),
                    offset: i * stride,
                })
                .collect(),
        };
        let io = |e: std::io::Error| Error::format("mask", e.to_string());
        let json = serde_json::to_string(&header).map_err(|e| Error::format("mask", e.to_string()))?;
        w.write_all(json.as_bytes()).map_err(io)?;
        w.write_all(b"\n").map_err(io)?;
        for m in &self.masks {
            let mut bytes = vec![0u8; stride];
            for (i, b) in m.bits.iter().enumerate() {
                if *b {
                    bytes[i / 8] |= 1 << (i % 8);
                }
            }
            w.write_all(&bytes).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn read<R: BufRead>(mut r: R) -> Result<Self> {
        let mut line = String::new();
        r.read_line(&mut line).map_err(|e| Error::format("mask", e.to_string()))?;
        let header: MaskHeader =
            serde_json::from_str(line.trim_end()).map_err(|e| Error::format("mask", format!("bad header: {e}")))?;
        if header.schema != MASK_SCHEMA {
            return Err(Error::format("mask", format!("unsupported schema `{}`", header.schema)));
        }
        let mut payload = Vec::new();
        r.read_to_end(&mut payload).map_err(|e| Error::format("mask", e.to_string()))?;
        let n = header.n_gaussians;
        let stride = n.div_ceil(8);
        let masks = header
            .entries
            .into_iter()
            .map(|e| {
                let bytes = payload
                    .get(e.offset..e.offset + stride)
                    .ok_or_else(|| Error::format("mask", "truncated bitset payload"))?;
                Ok(VisibilityMask {
                    region_id: e.region,
                    sub_region: e.sub_region,
                    polygon: e.polygon.iter().map(|p| Vector2::new(p[0], p[1])).collect(),
                    bits: (0..n).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(MaskSet { n_gaussians: n, masks })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write(BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(f))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CulledRender<T: Real> {
    pub result: RenderResult<T>,
    pub region: usize,
    /// The mask actually used; `None` when the full scene was rendered.
    pub sub_region: Option<SubRegionTag>,
    pub culled: usize,
}

/// Renders only the Gaussians visible from the viewpoint's (sub-)region.
///
/// Falls back from the sub-region mask to the whole-region mask and then to the full scene
/// when a mask is missing or sized for a different scene.
pub fn render_culled<T: Real>(
    scene: &GaussianScene<T>,
    division: &SceneDivision,
    masks: &MaskSet,
    cam: &Camera,
    size: (usize, usize),
    raster: &RasterConfig,
) -> CulledRender<T> {
    let p = division.project(&cam.position);
    let region = division.locate_region_2d(&p);
    let eps = division.boundary_slack();
    let usable = |m: &&VisibilityMask| m.bits.len() == scene.len();
    let sub = masks
        .masks
        .iter()
        .filter(|m| m.region_id == region && m.sub_region != SubRegionTag::Whole)
        .filter(usable)
        .find(|m| m.sub_region == SubRegionTag::Interior && polygon_contains(&m.polygon, &p, eps))
        .or_else(|| {
            masks
                .masks
                .iter()
                .filter(|m| m.region_id == region && matches!(m.sub_region, SubRegionTag::Border(_)))
                .filter(usable)
                .find(|m| polygon_contains(&m.polygon, &p, eps))
        });
    let chosen = sub.or_else(|| masks.get(region, SubRegionTag::Whole).filter(usable));
    let bits = chosen.map(|m| m.bits.as_slice());
    let result = rasterize_with(scene, cam, size.0, size.1, bits, raster);
    CulledRender {
        culled: scene.len() - result.rasterized,
        result,
        region,
        sub_region: chosen.map(|m| m.sub_region),
    }
}

/// True when every sub-region polygon lies inside the region cell.
pub fn subdivision_within_region(sub: &SubdividedRegion, eps: f64) -> bool {
    let inside = |poly: &[Vector2<f64>]| poly.iter().all(|p| polygon_contains(&sub.polygon, p, eps));
    inside(&sub.interior_polygon) && sub.border_strips.iter().all(|(_, s)| inside(s))
}


#[cfg(test)]
mod tests {
    use super::*;

    fn mask(region: usize, tag: SubRegionTag, bits: &[u8]) -> VisibilityMask {
        VisibilityMask {
            region_id: region,
            sub_region: tag,
            polygon: vec![Vector2::new(0.0, 0.0), Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0)],
            bits: bits.iter().map(|b| *b == 1).collect(),
        }
    }

    #[test]
    fn tags_serialize_in_snake_case() {
        assert_eq!(serde_json::to_string(&SubRegionTag::Whole).unwrap(), "\"whole\"");
        assert_eq!(serde_json::to_string(&SubRegionTag::Interior).unwrap(), "\"interior\"");
        assert_eq!(serde_json::to_string(&SubRegionTag::Border(3)).unwrap(), "{\"border\":3}");
    }

    #[test]
    fn mask_file_round_trips() {
        let set = MaskSet {
            n_gaussians: 11,
            masks: vec![
                mask(0, SubRegionTag::Whole, &[1, 0, 1, 1, 0, 0, 0, 0, 1, 0, 1]),
                mask(0, SubRegionTag::Border(1), &[0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 1]),
            ],
        };
        let mut buf = Vec::new();
        set.write(&mut buf).unwrap();
        let header_len = buf.iter().position(|b| *b == b'\n').unwrap() + 1;
        assert_eq!(buf.len() - header_len, 2 * 2);
        // Bit 0, 2, 3 → 0b1101; bit 8, 10 → 0b101.
        assert_eq!(&buf[header_len..header_len + 2], &[0b0000_1101, 0b0000_0101]);
        assert_eq!(MaskSet::read(&buf[..]).unwrap(), set);
    }

    #[test]
    fn truncated_or_foreign_mask_files_are_rejected() {
        let set = MaskSet {
            n_gaussians: 9,
            masks: vec![mask(0, SubRegionTag::Whole, &[1; 9])],
        };
        let mut buf = Vec::new();
        set.write(&mut buf).unwrap();
        buf.pop();
        assert!(matches!(MaskSet::read(&buf[..]), Err(Error::Format { .. })));
        let foreign = b"{\"schema\":\"other\",\"n_gaussians\":0,\"entries\":[]}\n";
        assert!(matches!(MaskSet::read(&foreign[..]), Err(Error::Format { .. })));
    }

    #[test]
    fn subset_and_count() {
        let a = mask(0, SubRegionTag::Interior, &[1, 0, 0, 1]);
        let b = mask(0, SubRegionTag::Whole, &[1, 1, 0, 1]);
        assert_eq!(a.count(), 2);
        assert!(a.is_subset_of(&b));
        assert!(!b.is_subset_of(&a));
    }

    #[test]
    fn union_of_nothing_is_empty() {
        assert_eq!(union(3, &[]), vec![false; 3]);
        let x = vec![true, false, false];
        let y = vec![false, false, true];
        assert_eq!(union(3, &[&x, &y]), vec![true, false, true]);
    }
}
