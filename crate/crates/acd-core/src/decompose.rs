//! Recursive volumetric splitting into approximately convex components.
//!
//! The splitter repeatedly takes the component with the largest concavity,
//! re-aligns it to its principal frame, and cuts it with the axis-aligned
//! plane (in that frame) that minimizes the splitting energy
//! `E = E_con + alpha * E_bal + beta * E_sym`, until every component's
//! concavity is below tolerance or the component budget is exhausted.
//!
//! Concavity of a component is the volume gap between the component and its
//! convex hull, both measured on the source grid, normalized by the grid-cube
//! volume so the tolerance is scale-free.

use crate::geometry::{principal_components, Frame, Point3, PointCloud};
use crate::hull::{convex_hull_of_points, rasterize_hull_count, ConvexHull, HullError};
use crate::voxel::{boundary_cells_of, GridFrame, VoxelGrid, VoxelSet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DecompError {
    #[error("grid has no occupied cells")]
    EmptyGrid,
    #[error("splitting plane leaves an empty half")]
    InvalidPlane,
    #[error("no candidate plane splits the component")]
    NoSplit,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

/// Decomposition parameters.
///
/// Defaults: concavity tolerance 1.5e-3, at most 32 components, grid
/// resolution 128, alpha = beta = 0.05, and up to 64 candidate planes per
/// axis (every cell layer when the extent is 64 layers or fewer).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompParams {
    pub concavity_tol: f64,
    pub max_components: usize,
    pub resolution: usize,
    pub alpha: f64,
    pub beta: f64,
    pub planes_per_axis: usize,
}

impl Default for DecompParams {
    fn default() -> Self {
        DecompParams {
            concavity_tol: 1.5e-3,
            max_components: 32,
            resolution: 128,
            alpha: 0.05,
            beta: 0.05,
            planes_per_axis: 64,
        }
    }
}

impl DecompParams {
    pub fn validate(&self) -> Result<(), DecompError> {
        if !self.concavity_tol.is_finite() || self.concavity_tol <= 0.0 {
            return Err(DecompError::InvalidParams(
                "concavity_tol must be positive".into(),
            ));
        }
        if self.max_components < 1 {
            return Err(DecompError::InvalidParams(
                "max_components must be at least 1".into(),
            ));
        }
        if self.alpha < 0.0 || self.beta < 0.0 {
            return Err(DecompError::InvalidParams(
                "alpha and beta must be non-negative".into(),
            ));
        }
        if self.resolution < 2 {
            return Err(DecompError::InvalidParams(
                "resolution must be at least 2".into(),
            ));
        }
        if self.planes_per_axis < 1 {
            return Err(DecompError::InvalidParams(
                "planes_per_axis must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// An axis-aligned splitting plane in a component's principal frame:
/// `axis` selects the frame axis the plane is orthogonal to, `offset` the
/// plane coordinate along that axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitPlane {
    pub axis: usize,
    pub offset: f64,
}

/// Splitting-energy terms for one candidate plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub e_con: f64,
    pub e_bal: f64,
    pub e_sym: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(e_con: f64, e_bal: f64, e_sym: f64, alpha: f64, beta: f64) -> EnergyBreakdown {
        assert!(e_con.is_finite() && e_bal >= 0.0 && e_sym >= 0.0);
        EnergyBreakdown {
            e_con,
            e_bal,
            e_sym,
            total: e_con + alpha * e_bal + beta * e_sym,
        }
    }
}

/// One approximately convex component: its cells, hull, normalized concavity
/// and contiguous id.
#[derive(Debug, Clone)]
pub struct ConvexComponent {
    pub cells: VoxelSet,
    pub hull: ConvexHull,
    pub concavity: f64,
    pub id: usize,
}

/// Frame and occupancy summary of the grid a decomposition was computed on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub frame: GridFrame,
    pub occupied: usize,
}

/// The full partition: components are pairwise disjoint and their union is
/// exactly the occupied set of the source grid.
#[derive(Debug, Clone)]
pub struct DecompositionResult {
    pub components: Vec<ConvexComponent>,
    pub params: DecompParams,
    pub source_grid: GridSummary,
}

impl DecompositionResult {
    /// Maximum component concavity (the decomposition's concavity).
    pub fn concavity(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.concavity)
            .fold(0.0, f64::max)
    }
}

/// Hull of a voxel set's cell centers. With `include_corners`, the eight cube
/// corners of every boundary cell are used instead, which makes the hull
/// full-dimensional even for single-cell or planar sets.
pub fn voxel_set_hull(set: &VoxelSet, include_corners: bool) -> Result<ConvexHull, HullError> {
    let boundary = boundary_cells_of(&set.grid, &set.cells);
    if include_corners {
        let mut corner_ids = std::collections::BTreeSet::new();
        for &u in &boundary {
            let (ix, iy, iz) = set.grid.coords(u);
            for dx in 0..2usize {
                for dy in 0..2usize {
                    for dz in 0..2usize {
                        corner_ids.insert((ix + dx, iy + dy, iz + dz));
                    }
                }
            }
        }
        let h = set.grid.cell_size;
        let points: Vec<Point3> = corner_ids
            .into_iter()
            .map(|(x, y, z)| {
                set.grid.origin + Point3::new(x as f64 * h, y as f64 * h, z as f64 * h)
            })
            .collect();
        convex_hull_of_points(&points)
    } else {
        let centers: Vec<Point3> = boundary.iter().map(|&u| set.grid.center_of(u)).collect();
        convex_hull_of_points(&centers)
    }
}

/// Hull-minus-set gap in cell counts, with the hull when the set is
/// full-dimensional. Rank-deficient sets (planar, linear, single cell) are
/// convex by definition: gap 0, no hull.
fn concavity_parts(frame: &GridFrame, cells: &[u32]) -> (f64, Option<ConvexHull>) {
    let boundary = boundary_cells_of(frame, cells);
    let centers: Vec<Point3> = boundary.iter().map(|&u| frame.center_of(u)).collect();
    match convex_hull_of_points(&centers) {
        Ok(hull) => {
            let raster = rasterize_hull_count(&hull, frame);
            let gap = (raster as f64 - cells.len() as f64).max(0.0);
            (gap, Some(hull))
        }
        Err(HullError::DegenerateHull { .. }) => (0.0, None),
        Err(_) => (0.0, None),
    }
}

/// Normalized concavity of one component: hull-minus-set volume over the
/// grid-cube volume, in [0, 1].
pub fn component_concavity(c: &VoxelSet, grid: &VoxelGrid) -> f64 {
    let frame = grid.frame();
    let (gap, _) = concavity_parts(frame, &c.cells);
    gap / frame.cell_count() as f64
}

/// Maximum concavity over a set of components; 0 for an empty list.
pub fn set_concavity(components: &[VoxelSet], grid: &VoxelGrid) -> f64 {
    components
        .iter()
        .map(|c| component_concavity(c, grid))
        .fold(0.0, f64::max)
}

fn revolution_axis(eigenvalues: [f64; 3]) -> Option<usize> {
    // Axis whose two transverse eigenvalues differ by < 10% relatively.
    let mut best: Option<(f64, usize)> = None;
    for k in 0..3 {
        let (i, j) = match k {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let m = eigenvalues[i].abs().max(eigenvalues[j].abs());
        let rel = if m > 0.0 {
            (eigenvalues[i] - eigenvalues[j]).abs() / m
        } else {
            0.0
        };
        if rel < 0.1 && best.is_none_or(|(r, _)| rel < r) {
            best = Some((rel, k));
        }
    }
    best.map(|(_, k)| k)
}

struct SplitEval {
    plane: SplitPlane,
    energy: EnergyBreakdown,
    left: Vec<u32>,
    right: Vec<u32>,
    left_gap: f64,
    right_gap: f64,
}

/// Evaluates one candidate plane. `locals` holds each cell's coordinate along
/// the plane axis in the component frame, aligned with `cells`.
fn evaluate_plane(
    frame: &GridFrame,
    cells: &[u32],
    locals: &[f64],
    plane: SplitPlane,
    alpha: f64,
    beta: f64,
    rev_axis: Option<usize>,
) -> Result<SplitEval, DecompError> {
    let mut left = Vec::new();
    let mut right = Vec::new();
    for (&cell, &t) in cells.iter().zip(locals) {
        if t < plane.offset {
            left.push(cell);
        } else {
            right.push(cell);
        }
    }
    if left.is_empty() || right.is_empty() {
        return Err(DecompError::InvalidPlane);
    }
    let (left_gap, _) = concavity_parts(frame, &left);
    let (right_gap, _) = concavity_parts(frame, &right);
    // Both halves' concavities normalized by the volume being split.
    let e_con = (left_gap + right_gap) / cells.len() as f64;
    let e_bal = (left.len() as f64 - right.len() as f64).abs() / cells.len() as f64;
    let e_sym = if rev_axis == Some(plane.axis) {
        1.0
    } else {
        0.0
    };
    Ok(SplitEval {
        plane,
        energy: EnergyBreakdown::new(e_con, e_bal, e_sym, alpha, beta),
        left,
        right,
        left_gap,
        right_gap,
    })
}

/// Splitting energy of one plane: post-split concavities, half-volume
/// imbalance and the revolution-axis penalty.
pub fn split_energy(
    v: &VoxelSet,
    p: &SplitPlane,
    params: &DecompParams,
    frame: &Frame,
) -> Result<EnergyBreakdown, DecompError> {
    let eigen = eigenvalues_of(v);
    let locals: Vec<f64> = v
        .cells
        .iter()
        .map(|&u| frame.axes[p.axis].dot(v.grid.center_of(u) - frame.origin))
        .collect();
    evaluate_plane(
        &v.grid,
        &v.cells,
        &locals,
        *p,
        params.alpha,
        params.beta,
        revolution_axis(eigen),
    )
    .map(|e| e.energy)
}

fn eigenvalues_of(v: &VoxelSet) -> [f64; 3] {
    let cloud = PointCloud::new(v.centers());
    principal_components(&cloud)
        .map(|(_, e)| e)
        .unwrap_or([0.0; 3])
}

/// Candidate plane offsets along one axis: one per cell layer of the
/// component's extent, downsampled to at most `planes_per_axis` evenly spaced
/// offsets.
fn candidate_offsets(tmin: f64, tmax: f64, cell: f64, planes_per_axis: usize) -> Vec<f64> {
    let lo = tmin - 0.5 * cell;
    let layers = ((tmax - tmin) / cell).floor() as usize + 1;
    if layers < 2 {
        return Vec::new();
    }
    let boundary = |k: usize| lo + k as f64 * cell;
    if layers - 1 <= planes_per_axis {
        (1..layers).map(boundary).collect()
    } else {
        let mut ks: Vec<usize> = (1..=planes_per_axis)
            .map(|j| {
                let k = (j as f64 * layers as f64 / (planes_per_axis + 1) as f64).round() as usize;
                k.clamp(1, layers - 1)
            })
            .collect();
        ks.dedup();
        ks.into_iter().map(boundary).collect()
    }
}

fn best_split_full(
    grid_frame: &GridFrame,
    cells: &[u32],
    frame: &Frame,
    eigenvalues: [f64; 3],
    params: &DecompParams,
) -> Result<SplitEval, DecompError> {
    let cell = grid_frame.cell_size;
    let rev = revolution_axis(eigenvalues);

    // Local coordinates of every cell center on each frame axis.
    let mut locals: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for &u in cells {
        let d = grid_frame.center_of(u) - frame.origin;
        for (axis, ts) in locals.iter_mut().enumerate() {
            ts.push(frame.axes[axis].dot(d));
        }
    }

    let mut candidates: Vec<SplitPlane> = Vec::new();
    for (axis, ts) in locals.iter().enumerate() {
        let (tmin, tmax) = ts
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| {
                (lo.min(t), hi.max(t))
            });
        for offset in candidate_offsets(tmin, tmax, cell, params.planes_per_axis) {
            candidates.push(SplitPlane { axis, offset });
        }
    }
    if candidates.is_empty() {
        return Err(DecompError::NoSplit);
    }

    let evals: Vec<Option<SplitEval>> = candidates
        .par_iter()
        .map(|&plane| {
            evaluate_plane(
                grid_frame,
                cells,
                &locals[plane.axis],
                plane,
                params.alpha,
                params.beta,
                rev,
            )
            .ok()
        })
        .collect();

    // Exact argmin; candidates are ordered by (axis, offset), and a strict
    // comparison keeps the first minimum, which is the tie-break.
    let mut best: Option<SplitEval> = None;
    for eval in evals.into_iter().flatten() {
        if best
            .as_ref()
            .is_none_or(|b| eval.energy.total < b.energy.total)
        {
            best = Some(eval);
        }
    }
    best.ok_or(DecompError::NoSplit)
}

/// Exact argmin of [`split_energy`] over all candidate planes (three
/// principal axes, one offset per cell layer downsampled to the configured
/// budget). Ties break toward the lower axis index, then lower offset.
pub fn best_split(
    v: &VoxelSet,
    params: &DecompParams,
    frame: &Frame,
) -> Result<(SplitPlane, EnergyBreakdown), DecompError> {
    let eigen = eigenvalues_of(v);
    best_split_full(&v.grid, &v.cells, frame, eigen, params).map(|e| (e.plane, e.energy))
}

struct Piece {
    cells: Vec<u32>,
    gap: f64,
    splittable: bool,
}

impl Piece {
    fn new(frame: &GridFrame, cells: Vec<u32>) -> Piece {
        let (gap, _) = concavity_parts(frame, &cells);
        Piece {
            cells,
            gap,
            splittable: true,
        }
    }

    fn concavity(&self, frame: &GridFrame) -> f64 {
        self.gap / frame.cell_count() as f64
    }
}

/// Decomposes the occupied cells of a grid into approximately convex
/// components.
///
/// Disconnected 6-connected regions become separate components up front; the
/// recursion then splits the worst component until the tolerance or the
/// component budget is reached. Deterministic for fixed inputs. If the input
/// has more disconnected regions than `max_components`, they are all
/// returned.
pub fn decompose(
    grid: &VoxelGrid,
    params: &DecompParams,
) -> Result<DecompositionResult, DecompError> {
    params.validate()?;
    let frame = *grid.frame();
    let all = VoxelSet::from_grid(grid);
    if all.is_empty() {
        return Err(DecompError::EmptyGrid);
    }
    let occupied = all.len();

    let mut pieces: Vec<Piece> = all
        .connected_components()
        .into_iter()
        .map(|cells| Piece::new(&frame, cells))
        .collect();

    while pieces.len() < params.max_components {
        // Worst concavity first; ties keep the earlier piece.
        let mut worst: Option<(usize, f64)> = None;
        for (i, p) in pieces.iter().enumerate() {
            if !p.splittable {
                continue;
            }
            let c = p.concavity(&frame);
            if c > params.concavity_tol && worst.is_none_or(|(_, w)| c > w) {
                worst = Some((i, c));
            }
        }
        let Some((idx, _)) = worst else {
            break;
        };

        let centers = PointCloud::new(
            pieces[idx]
                .cells
                .iter()
                .map(|&u| frame.center_of(u))
                .collect(),
        );
        let (comp_frame, eigen) = principal_components(&centers).expect("non-empty piece");
        match best_split_full(&frame, &pieces[idx].cells, &comp_frame, eigen, params) {
            Ok(eval) => {
                let left = Piece {
                    cells: eval.left,
                    gap: eval.left_gap,
                    splittable: true,
                };
                let right = Piece {
                    cells: eval.right,
                    gap: eval.right_gap,
                    splittable: true,
                };
                pieces[idx] = left;
                pieces.push(right);
            }
            Err(_) => {
                pieces[idx].splittable = false;
            }
        }
    }

    // Contiguous ids ordered by smallest cell index. Exported hulls are
    // corner-based so each hull mesh covers its cells; concavity stays on
    // the center-based evaluation used during the search.
    pieces.sort_by_key(|p| p.cells.first().copied().unwrap_or(u32::MAX));
    let components: Vec<ConvexComponent> = pieces
        .into_iter()
        .enumerate()
        .map(|(id, piece)| {
            let concavity = piece.concavity(&frame);
            let cells = VoxelSet {
                grid: frame,
                cells: piece.cells,
            };
            let hull = voxel_set_hull(&cells, true).expect("corner hull of non-empty set");
            ConvexComponent {
                cells,
                hull,
                concavity,
                id,
            }
        })
        .collect();

    Ok(DecompositionResult {
        components,
        params: *params,
        source_grid: GridSummary { frame, occupied },
    })
}

/// Hull meshes of all components, id-ordered.
pub fn component_meshes(r: &DecompositionResult) -> Vec<crate::geometry::TriangleMesh> {
    r.components.iter().map(|c| c.hull.mesh.clone()).collect()
}
