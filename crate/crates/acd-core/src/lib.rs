//! Approximate convex decomposition (ACD) toolkit for 3D shapes.
//!
//! The pipeline implemented here turns a triangle mesh or point cloud into a
//! set of approximately convex components by recursive volumetric splitting,
//! propagates component labels onto arbitrary point clouds by nearest-neighbor
//! matching, exposes the pairwise contrastive / joint losses used to train
//! point embeddings against those labels, and evaluates clusterings against
//! reference part labels (NMI, pair precision/recall, plus K-means / HAC /
//! spectral baselines).
//!
//! Modules:
//! - [`geometry`]: points, meshes, bounding boxes, principal frames, surface sampling
//! - [`voxel`]: occupancy grids, solid voxelization, interior fill
//! - [`hull`]: 3D convex hulls, hull volumes, hull rasterization
//! - [`decompose`]: the recursive splitter (concavity, plane-search energy, decomposition loop)
//! - [`label`]: component label propagation onto point clouds
//! - [`selfsup`]: pairwise contrastive loss, cross-entropy, joint loss, pair sampling
//! - [`cluster`]: clustering metrics and baseline clustering algorithms
//! - [`io`]: file formats (OBJ, XYZ, PLY, RLE grids, embeddings, reports)

pub mod cluster;
pub mod decompose;
pub mod geometry;
pub mod hull;
pub mod io;
pub mod label;
pub mod selfsup;
pub mod shapes;
pub mod voxel;

pub(crate) mod accum;

pub use decompose::{DecompParams, DecompositionResult};
pub use geometry::{Aabb, Frame, Point3, PointCloud, TriangleMesh};
pub use voxel::{VoxelGrid, VoxelSet};
