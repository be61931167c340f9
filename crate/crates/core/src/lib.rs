//! Occlusion-aware partitioning of captured scenes and region-based visibility culling
//! for Gaussian-splat rendering.
//!
//! The numeric core is generic over [`Real`] (`f32`/`f64`); the aliases at the crate root
//! fix it to `f64`, which is what the pipeline and the command-line tool use.

pub mod camera_selection;
pub mod classifier;
pub mod division;
mod division_io;
pub mod error;
pub mod geometry;
pub mod kmeans;
pub mod pipeline;
pub mod scalar;
pub mod sfm;
pub mod splat;
pub mod svg;
pub mod synth;
pub mod view_graph;
pub mod visibility;

pub use error::{Error, Result};
pub use scalar::Real;
pub use sfm::{Camera, CameraId, PointId, SceneModel};
pub use view_graph::ClusterAssignment;
pub use pipeline::{divide, PipelineConfig};
pub use splat::{backside_camera, ContributionMode};
pub use visibility::{MaskSet, SubRegionTag, VisibilityMask};

pub type ViewGraph = view_graph::ViewGraph<f64>;
pub type FilteredFeatures = view_graph::FilteredFeatures<f64>;
pub type HalfPlane = geometry::HalfPlane<f64>;
pub type Point2 = nalgebra::Vector2<f64>;
pub type Point3 = nalgebra::Vector3<f64>;
pub type Gaussian3D = splat::Gaussian3D<f64>;
pub type GaussianScene = splat::GaussianScene<f64>;
pub type RenderResult = splat::RenderResult<f64>;
pub type SceneDivision = division::SceneDivision;
