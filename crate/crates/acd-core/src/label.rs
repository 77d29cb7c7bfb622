//! Propagation of component labels onto point clouds by nearest-neighbor
//! matching: each query point takes the label of the component owning its
//! nearest sampled point, ties going to the lowest component id.

use crate::decompose::DecompositionResult;
use crate::geometry::{sample_mesh_surface, Aabb, GeometryError, Point3, PointCloud, TriangleMesh};
use rayon::prelude::*;
use std::collections::HashMap;
use thiserror::Error;

/// Default surface samples per shape when labeling a mesh.
pub const DEFAULT_SHAPE_SAMPLES: usize = 10_000;
/// Default samples per component hull.
pub const DEFAULT_COMPONENT_SAMPLES: usize = 2_000;

/// Below this many samples the spatial hash is skipped in favor of brute
/// force.
const BRUTE_FORCE_THRESHOLD: usize = 256;

#[derive(Debug, Error, PartialEq)]
pub enum LabelError {
    #[error("query cloud is empty")]
    EmptyCloud,
    #[error("no component samples provided")]
    EmptySamples,
    #[error("component {0} has no sample points")]
    EmptyComponent(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A point cloud with one integer label per point (same order).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPointCloud {
    pub cloud: PointCloud,
    pub labels: Vec<usize>,
}

/// Sample points per component id. Ids need not be contiguous but every
/// component must be non-empty.
#[derive(Debug, Clone, Default)]
pub struct ComponentSamples {
    /// (component id, samples), sorted by id ascending.
    groups: Vec<(usize, PointCloud)>,
}

impl ComponentSamples {
    pub fn new(mut groups: Vec<(usize, PointCloud)>) -> Result<Self, LabelError> {
        if groups.is_empty() {
            return Err(LabelError::EmptySamples);
        }
        for (id, cloud) in &groups {
            if cloud.is_empty() {
                return Err(LabelError::EmptyComponent(*id));
            }
        }
        groups.sort_by_key(|(id, _)| *id);
        Ok(Self { groups })
    }

    pub fn groups(&self) -> &[(usize, PointCloud)] {
        &self.groups
    }

    pub fn total_points(&self) -> usize {
        self.groups.iter().map(|(_, c)| c.len()).sum()
    }

    /// Flattened samples in ascending component-id order.
    fn flat(&self) -> (Vec<Point3>, Vec<usize>) {
        let mut points = Vec::with_capacity(self.total_points());
        let mut owners = Vec::with_capacity(self.total_points());
        for (id, cloud) in &self.groups {
            for &p in &cloud.points {
                points.push(p);
                owners.push(*id);
            }
        }
        (points, owners)
    }
}

/// Nearest-sample query result, preferring smaller distance, then lower
/// component id. Distances are compared as squared norms computed the same
/// way in every search path.
#[derive(Clone, Copy)]
struct Best {
    d2: f64,
    id: usize,
}

impl Best {
    fn none() -> Best {
        Best {
            d2: f64::INFINITY,
            id: usize::MAX,
        }
    }

    fn offer(&mut self, d2: f64, id: usize) {
        if d2 < self.d2 || (d2 == self.d2 && id < self.id) {
            self.d2 = d2;
            self.id = id;
        }
    }
}

/// Labels every point of `cloud` with the component of its nearest sample.
///
/// Accelerated by a uniform spatial hash whose cell is twice the median
/// nearest-sample spacing; the result is exactly the brute-force double
/// minimum (ties to the lowest component id).
pub fn propagate_labels(
    cloud: &PointCloud,
    samples: &ComponentSamples,
) -> Result<LabeledPointCloud, LabelError> {
    if cloud.is_empty() {
        return Err(LabelError::EmptyCloud);
    }
    let (points, owners) = samples.flat();

    let labels: Vec<usize> = if points.len() < BRUTE_FORCE_THRESHOLD {
        cloud
            .points
            .par_iter()
            .map(|&q| brute_force_label(q, &points, &owners))
            .collect()
    } else {
        let index = SpatialHash::build(&points);
        match index {
            Some(index) => cloud
                .points
                .par_iter()
                .map(|&q| index.nearest(q, &points, &owners))
                .collect(),
            // Degenerate spacing (coincident samples): brute force.
            None => cloud
                .points
                .par_iter()
                .map(|&q| brute_force_label(q, &points, &owners))
                .collect(),
        }
    };
    Ok(LabeledPointCloud {
        cloud: cloud.clone(),
        labels,
    })
}

fn brute_force_label(q: Point3, points: &[Point3], owners: &[usize]) -> usize {
    let mut best = Best::none();
    for (&p, &id) in points.iter().zip(owners) {
        best.offer((q - p).norm_squared(), id);
    }
    best.id
}

struct SpatialHash {
    cell: f64,
    origin: Point3,
    dims: [i64; 3],
    buckets: HashMap<(i64, i64, i64), Vec<u32>>,
}

impl SpatialHash {
    /// Builds the hash; `None` when sample spacing degenerates to zero.
    fn build(points: &[Point3]) -> Option<SpatialHash> {
        let bb = Aabb::of_points(points)?;
        // Provisional grid to estimate nearest-sample spacing.
        let diag = bb.diagonal();
        if diag <= 0.0 {
            return None;
        }
        let provisional = SpatialHash::with_cell(points, bb, diag / (points.len() as f64).cbrt());
        let mut spacings: Vec<f64> = (0..points.len())
            .map(|i| provisional.nearest_other(points[i], i as u32, points))
            .collect();
        spacings.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = spacings[spacings.len() / 2];
        if median.is_nan() || median <= 0.0 {
            return None;
        }
        Some(SpatialHash::with_cell(points, bb, 2.0 * median))
    }

    fn with_cell(points: &[Point3], bb: Aabb, cell: f64) -> SpatialHash {
        let ext = bb.extent();
        let dims = [
            (ext.x / cell).floor() as i64 + 1,
            (ext.y / cell).floor() as i64 + 1,
            (ext.z / cell).floor() as i64 + 1,
        ];
        let mut hash = SpatialHash {
            cell,
            origin: bb.min,
            dims,
            buckets: HashMap::new(),
        };
        for (i, &p) in points.iter().enumerate() {
            hash.buckets.entry(hash.key(p)).or_default().push(i as u32);
        }
        hash
    }

    fn key(&self, p: Point3) -> (i64, i64, i64) {
        let d = p - self.origin;
        (
            (d.x / self.cell).floor() as i64,
            (d.y / self.cell).floor() as i64,
            (d.z / self.cell).floor() as i64,
        )
    }

    /// Largest ring that can still contain in-bound cells from a start cell.
    fn max_ring(&self, kx: i64, ky: i64, kz: i64) -> i64 {
        [
            kx.max(self.dims[0] - 1 - kx),
            ky.max(self.dims[1] - 1 - ky),
            kz.max(self.dims[2] - 1 - kz),
        ]
        .into_iter()
        .max()
        .unwrap()
        .max(0)
            + 1
    }

    /// Distance to the nearest sample other than `skip` (used for spacing).
    fn nearest_other(&self, q: Point3, skip: u32, points: &[Point3]) -> f64 {
        let mut best = f64::INFINITY;
        let (kx, ky, kz) = self.key(q);
        let max_ring = self.max_ring(kx, ky, kz);
        let mut ring = 0i64;
        loop {
            self.scan_ring(kx, ky, kz, ring, |idx| {
                if idx != skip {
                    best = best.min((q - points[idx as usize]).norm_squared());
                }
            });
            // Cells beyond ring r are at least (r * cell) away.
            let safe = ring as f64 * self.cell;
            if best <= safe * safe {
                return best.sqrt();
            }
            ring += 1;
            if ring > max_ring {
                return if best.is_finite() { best.sqrt() } else { 0.0 };
            }
        }
    }

    /// Visits every bucket whose Chebyshev distance from the query cell is
    /// exactly `ring`.
    fn scan_ring<F: FnMut(u32)>(&self, kx: i64, ky: i64, kz: i64, ring: i64, mut f: F) {
        let visit = |x: i64, y: i64, z: i64, f: &mut F| {
            if x < 0
                || y < 0
                || z < 0
                || x >= self.dims[0]
                || y >= self.dims[1]
                || z >= self.dims[2]
            {
                return;
            }
            if let Some(bucket) = self.buckets.get(&(x, y, z)) {
                for &idx in bucket {
                    f(idx);
                }
            }
        };
        if ring == 0 {
            visit(kx, ky, kz, &mut f);
            return;
        }
        for dx in -ring..=ring {
            for dy in -ring..=ring {
                for dz in -ring..=ring {
                    if dx.abs().max(dy.abs()).max(dz.abs()) != ring {
                        continue;
                    }
                    visit(kx + dx, ky + dy, kz + dz, &mut f);
                }
            }
        }
    }

    fn nearest(&self, q: Point3, points: &[Point3], owners: &[usize]) -> usize {
        let (kx, ky, kz) = self.key(q);
        let mut best = Best::none();
        let mut ring = 0i64;
        let max_ring = self.max_ring(kx, ky, kz);
        loop {
            self.scan_ring(kx, ky, kz, ring, |idx| {
                best.offer(
                    (q - points[idx as usize]).norm_squared(),
                    owners[idx as usize],
                );
            });
            if best.id != usize::MAX {
                let safe = ring as f64 * self.cell;
                if best.d2 <= safe * safe {
                    return best.id;
                }
            }
            ring += 1;
            if ring > max_ring {
                return best.id;
            }
        }
    }
}

/// Samples the shape surface and every component hull, then propagates
/// component labels to the surface samples. Uses 10k surface points and 2k
/// points per component hull by default.
pub fn label_mesh_points(
    mesh: &TriangleMesh,
    result: &DecompositionResult,
    n: usize,
    seed: u64,
) -> Result<LabeledPointCloud, LabelError> {
    label_mesh_points_with(mesh, result, n, DEFAULT_COMPONENT_SAMPLES, seed)
}

/// As [`label_mesh_points`] with an explicit per-component sample count.
pub fn label_mesh_points_with(
    mesh: &TriangleMesh,
    result: &DecompositionResult,
    n: usize,
    per_component: usize,
    seed: u64,
) -> Result<LabeledPointCloud, LabelError> {
    let surface = sample_mesh_surface(mesh, n, seed)?;
    let samples = sample_components(result, per_component, seed)?;
    propagate_labels(&surface, &samples)
}

/// Samples every component hull surface, deriving one RNG stream per
/// component from the base seed.
pub fn sample_components(
    result: &DecompositionResult,
    per_component: usize,
    seed: u64,
) -> Result<ComponentSamples, LabelError> {
    let mut groups = Vec::with_capacity(result.components.len());
    for comp in &result.components {
        let comp_seed = component_seed(seed, comp.id as u64);
        let cloud = sample_mesh_surface(&comp.hull.mesh, per_component, comp_seed)?;
        groups.push((comp.id, cloud));
    }
    ComponentSamples::new(groups)
}

/// Per-component RNG stream derived from the base seed (SplitMix64 step), so
/// component sampling is reproducible independent of component count.
pub fn component_seed(seed: u64, component_id: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E3779B97F4A7C15u64.wrapping_mul(component_id.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}
