//! Occupancy grids over an axis-aligned bounding cube and solid voxelization
//! of meshes and point clouds.
//!
//! The grid cube is the shape's AABB expanded by 5% and cubified to the
//! longest axis, so surface cells are never clipped by the cube boundary.
//! Interiors are filled by an exterior flood fill (6-connected), which is
//! robust to small leaks and treats open surfaces as shells.

use crate::geometry::{Aabb, GeometryError, Point3, PointCloud, TriangleMesh};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum VoxelError {
    #[error("resolution must be at least 2, got {0}")]
    ResolutionTooSmall(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Placement of a grid in space: per-axis resolution, origin (min corner of
/// the cube) and uniform cell size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridFrame {
    pub resolution: usize,
    pub origin: Point3,
    pub cell_size: f64,
}

impl GridFrame {
    /// Frame of the padded bounding cube for the given AABB: expanded 5% and
    /// cubified to the longest axis. A degenerate AABB gets a unit cube.
    pub fn for_aabb(aabb: Aabb, resolution: usize) -> GridFrame {
        let ext = aabb.extent();
        let longest = ext.x.max(ext.y).max(ext.z);
        let side = if longest > 0.0 { longest * 1.05 } else { 1.0 };
        let center = aabb.center();
        let half = side * 0.5;
        GridFrame {
            resolution,
            origin: center - Point3::new(half, half, half),
            cell_size: side / resolution as f64,
        }
    }

    pub fn cell_count(&self) -> usize {
        self.resolution * self.resolution * self.resolution
    }

    /// Linear index with ix fastest: `ix + R*(iy + R*iz)`.
    pub fn linear(&self, ix: usize, iy: usize, iz: usize) -> u32 {
        (ix + self.resolution * (iy + self.resolution * iz)) as u32
    }

    pub fn coords(&self, linear: u32) -> (usize, usize, usize) {
        let r = self.resolution;
        let u = linear as usize;
        (u % r, (u / r) % r, u / (r * r))
    }

    pub fn cell_center(&self, ix: usize, iy: usize, iz: usize) -> Point3 {
        self.origin
            + Point3::new(
                (ix as f64 + 0.5) * self.cell_size,
                (iy as f64 + 0.5) * self.cell_size,
                (iz as f64 + 0.5) * self.cell_size,
            )
    }

    pub fn center_of(&self, linear: u32) -> Point3 {
        let (ix, iy, iz) = self.coords(linear);
        self.cell_center(ix, iy, iz)
    }

    /// Cell containing `p`, clamped to the grid (points on the upper boundary
    /// bin into the last cell).
    pub fn cell_of(&self, p: Point3) -> (usize, usize, usize) {
        let r = self.resolution as i64;
        let clamp = |v: f64| -> usize { (v.floor() as i64).clamp(0, r - 1) as usize };
        (
            clamp((p.x - self.origin.x) / self.cell_size),
            clamp((p.y - self.origin.y) / self.cell_size),
            clamp((p.z - self.origin.z) / self.cell_size),
        )
    }

    /// Volume of the whole grid cube.
    pub fn cube_volume(&self) -> f64 {
        let side = self.cell_size * self.resolution as f64;
        side * side * side
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_size * self.cell_size * self.cell_size
    }
}

/// Dense occupancy bitset over a [`GridFrame`].
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    frame: GridFrame,
    bits: Vec<u64>,
}

impl VoxelGrid {
    pub fn new_empty(frame: GridFrame) -> Result<VoxelGrid, VoxelError> {
        if frame.resolution < 2 {
            return Err(VoxelError::ResolutionTooSmall(frame.resolution));
        }
        let words = frame.cell_count().div_ceil(64);
        Ok(VoxelGrid {
            frame,
            bits: vec![0u64; words],
        })
    }

    pub fn frame(&self) -> &GridFrame {
        &self.frame
    }

    pub fn resolution(&self) -> usize {
        self.frame.resolution
    }

    pub fn cell_size(&self) -> f64 {
        self.frame.cell_size
    }

    pub fn origin(&self) -> Point3 {
        self.frame.origin
    }

    pub fn is_occupied(&self, ix: usize, iy: usize, iz: usize) -> bool {
        self.is_occupied_linear(self.frame.linear(ix, iy, iz))
    }

    pub fn is_occupied_linear(&self, u: u32) -> bool {
        let u = u as usize;
        self.bits[u / 64] >> (u % 64) & 1 == 1
    }

    pub fn set(&mut self, ix: usize, iy: usize, iz: usize) {
        self.set_linear(self.frame.linear(ix, iy, iz));
    }

    pub fn set_linear(&mut self, u: u32) {
        let u = u as usize;
        self.bits[u / 64] |= 1 << (u % 64);
    }

    pub fn occupied_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Occupied cells as sorted linear indices.
    pub fn occupied_cells(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.occupied_count());
        for (wi, &w) in self.bits.iter().enumerate() {
            let mut bits = w;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                let u = wi * 64 + b;
                if u < self.frame.cell_count() {
                    out.push(u as u32);
                }
                bits &= bits - 1;
            }
        }
        out
    }

    fn or_with(&mut self, other: &VoxelGrid) {
        for (a, b) in self.bits.iter_mut().zip(other.bits.iter()) {
            *a |= *b;
        }
    }
}

/// A subset of a grid's cells: sorted, unique linear indices plus the frame
/// parameters of the parent grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelSet {
    pub grid: GridFrame,
    pub cells: Vec<u32>,
}

impl VoxelSet {
    /// Builds a set from cells, sorting and deduplicating.
    pub fn new(grid: GridFrame, mut cells: Vec<u32>) -> VoxelSet {
        cells.sort_unstable();
        cells.dedup();
        VoxelSet { grid, cells }
    }

    pub fn from_grid(grid: &VoxelGrid) -> VoxelSet {
        VoxelSet {
            grid: grid.frame,
            cells: grid.occupied_cells(),
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, cell: u32) -> bool {
        self.cells.binary_search(&cell).is_ok()
    }

    pub fn centers(&self) -> Vec<Point3> {
        self.cells.iter().map(|&u| self.grid.center_of(u)).collect()
    }

    /// Cells with at least one 6-neighbor outside the set. The convex hull of
    /// all cell centers equals the hull of the boundary centers, so hulls are
    /// built from these.
    pub fn boundary_cells(&self) -> Vec<u32> {
        boundary_cells_of(&self.grid, &self.cells)
    }

    /// Partition into 6-connected components, ordered by smallest cell index.
    pub fn connected_components(&self) -> Vec<Vec<u32>> {
        let r = self.grid.resolution as i64;
        let mut visited = vec![false; self.cells.len()];
        let mut components = Vec::new();
        for start in 0..self.cells.len() {
            if visited[start] {
                continue;
            }
            let mut comp = Vec::new();
            let mut stack = vec![start];
            visited[start] = true;
            while let Some(pos) = stack.pop() {
                let u = self.cells[pos];
                comp.push(u);
                let (ix, iy, iz) = self.grid.coords(u);
                for (dx, dy, dz) in NEIGHBORS_6 {
                    let nx = ix as i64 + dx;
                    let ny = iy as i64 + dy;
                    let nz = iz as i64 + dz;
                    if nx < 0 || ny < 0 || nz < 0 || nx >= r || ny >= r || nz >= r {
                        continue;
                    }
                    let n = self.grid.linear(nx as usize, ny as usize, nz as usize);
                    if let Ok(npos) = self.cells.binary_search(&n) {
                        if !visited[npos] {
                            visited[npos] = true;
                            stack.push(npos);
                        }
                    }
                }
            }
            comp.sort_unstable();
            components.push(comp);
        }
        components
    }
}

/// Volume of a voxel set: cell count times cell volume.
pub fn set_volume(s: &VoxelSet) -> f64 {
    s.cells.len() as f64 * s.grid.cell_volume()
}

/// Cells of `cells` with at least one 6-neighbor absent (membership via a
/// scratch bitset, so this is linear in the set size).
pub(crate) fn boundary_cells_of(frame: &GridFrame, cells: &[u32]) -> Vec<u32> {
    let words = frame.cell_count().div_ceil(64);
    let mut member = vec![0u64; words];
    for &u in cells {
        member[u as usize / 64] |= 1 << (u as usize % 64);
    }
    let contains = |u: u32| member[u as usize / 64] >> (u as usize % 64) & 1 == 1;
    let r = frame.resolution as i64;
    let mut out = Vec::new();
    for &u in cells {
        let (ix, iy, iz) = frame.coords(u);
        let mut interior = true;
        for (dx, dy, dz) in NEIGHBORS_6 {
            let nx = ix as i64 + dx;
            let ny = iy as i64 + dy;
            let nz = iz as i64 + dz;
            if nx < 0
                || ny < 0
                || nz < 0
                || nx >= r
                || ny >= r
                || nz >= r
                || !contains(frame.linear(nx as usize, ny as usize, nz as usize))
            {
                interior = false;
                break;
            }
        }
        if !interior {
            out.push(u);
        }
    }
    out
}

const NEIGHBORS_6: [(i64, i64, i64); 6] = [
    (-1, 0, 0),
    (1, 0, 0),
    (0, -1, 0),
    (0, 1, 0),
    (0, 0, -1),
    (0, 0, 1),
];

/// Voxelizes a triangle mesh: cells intersecting the surface (conservative
/// separating-axis triangle/box test) plus the interior after flood fill.
pub fn voxelize_mesh(mesh: &TriangleMesh, resolution: usize) -> Result<VoxelGrid, VoxelError> {
    if mesh.vertices.is_empty() || mesh.faces.is_empty() {
        return Err(GeometryError::EmptyMesh.into());
    }
    if resolution < 2 {
        return Err(VoxelError::ResolutionTooSmall(resolution));
    }
    let aabb = Aabb::of_points(&mesh.vertices).expect("non-empty");
    let frame = GridFrame::for_aabb(aabb, resolution);

    let surface = mesh
        .faces
        .par_iter()
        .fold(
            || VoxelGrid::new_empty(frame).expect("valid frame"),
            |mut grid, face| {
                let tri = [
                    mesh.vertices[face[0]],
                    mesh.vertices[face[1]],
                    mesh.vertices[face[2]],
                ];
                mark_triangle(&mut grid, &tri);
                grid
            },
        )
        .reduce(
            || VoxelGrid::new_empty(frame).expect("valid frame"),
            |mut a, b| {
                a.or_with(&b);
                a
            },
        );
    Ok(fill_interior(&surface))
}

fn mark_triangle(grid: &mut VoxelGrid, tri: &[Point3; 3]) {
    let frame = grid.frame;
    let tri_min = tri[0].min_componentwise(tri[1]).min_componentwise(tri[2]);
    let tri_max = tri[0].max_componentwise(tri[1]).max_componentwise(tri[2]);
    let (x0, y0, z0) = frame.cell_of(tri_min);
    let (x1, y1, z1) = frame.cell_of(tri_max);
    let half = frame.cell_size * 0.5;
    let halfsize = Point3::new(half, half, half);
    for iz in z0..=z1 {
        for iy in y0..=y1 {
            for ix in x0..=x1 {
                let center = frame.cell_center(ix, iy, iz);
                if tri_box_overlap(center, halfsize, tri) {
                    grid.set(ix, iy, iz);
                }
            }
        }
    }
}

/// Voxelizes a point cloud: a cell is occupied iff it contains at least one
/// point, followed by interior fill.
pub fn voxelize_points(cloud: &PointCloud, resolution: usize) -> Result<VoxelGrid, VoxelError> {
    if cloud.is_empty() {
        return Err(GeometryError::EmptyCloud.into());
    }
    if resolution < 2 {
        return Err(VoxelError::ResolutionTooSmall(resolution));
    }
    let aabb = Aabb::of_points(&cloud.points).expect("non-empty");
    let frame = GridFrame::for_aabb(aabb, resolution);
    let mut grid = VoxelGrid::new_empty(frame)?;
    for &p in &cloud.points {
        let (ix, iy, iz) = frame.cell_of(p);
        grid.set(ix, iy, iz);
    }
    Ok(fill_interior(&grid))
}

/// Bins a point cloud into an existing frame without interior fill.
pub fn bin_points(frame: GridFrame, points: &[Point3]) -> Result<VoxelGrid, VoxelError> {
    let mut grid = VoxelGrid::new_empty(frame)?;
    for &p in points {
        let (ix, iy, iz) = frame.cell_of(p);
        grid.set(ix, iy, iz);
    }
    Ok(grid)
}

/// Fills enclosed cavities: a 6-connected flood fill from all boundary cells
/// of the grid cube marks the exterior, and every non-exterior empty cell
/// becomes occupied. Idempotent, and never removes occupancy.
pub fn fill_interior(grid: &VoxelGrid) -> VoxelGrid {
    let frame = grid.frame;
    let r = frame.resolution;
    let mut visited = vec![0u64; grid.bits.len()];
    let is_visited =
        |v: &[u64], u: u32| -> bool { v[u as usize / 64] >> (u as usize % 64) & 1 == 1 };
    let mark = |v: &mut [u64], u: u32| v[u as usize / 64] |= 1 << (u as usize % 64);

    let mut stack: Vec<u32> = Vec::new();
    let seed = |v: &mut Vec<u64>, stack: &mut Vec<u32>, ix: usize, iy: usize, iz: usize| {
        let u = frame.linear(ix, iy, iz);
        if !grid.is_occupied_linear(u) && !is_visited(v, u) {
            mark(v, u);
            stack.push(u);
        }
    };
    for a in 0..r {
        for b in 0..r {
            seed(&mut visited, &mut stack, 0, a, b);
            seed(&mut visited, &mut stack, r - 1, a, b);
            seed(&mut visited, &mut stack, a, 0, b);
            seed(&mut visited, &mut stack, a, r - 1, b);
            seed(&mut visited, &mut stack, a, b, 0);
            seed(&mut visited, &mut stack, a, b, r - 1);
        }
    }
    while let Some(u) = stack.pop() {
        let (ix, iy, iz) = frame.coords(u);
        for (dx, dy, dz) in NEIGHBORS_6 {
            let nx = ix as i64 + dx;
            let ny = iy as i64 + dy;
            let nz = iz as i64 + dz;
            if nx < 0 || ny < 0 || nz < 0 || nx >= r as i64 || ny >= r as i64 || nz >= r as i64 {
                continue;
            }
            let n = frame.linear(nx as usize, ny as usize, nz as usize);
            if !grid.is_occupied_linear(n) && !is_visited(&visited, n) {
                mark(&mut visited, n);
                stack.push(n);
            }
        }
    }

    // Occupied stays occupied; unreachable empty cells become occupied.
    let mut out = grid.clone();
    let total = frame.cell_count();
    let words = out.bits.len();
    for (wi, word) in out.bits.iter_mut().enumerate() {
        let mut filled = grid.bits[wi] | !visited[wi];
        if wi == words - 1 && !total.is_multiple_of(64) {
            filled &= (1u64 << (total % 64)) - 1;
        }
        *word = filled;
    }
    out
}

/// Conservative triangle/box overlap via the 13-axis separating-axis test
/// (box face normals, triangle normal, and the nine edge cross products).
pub fn tri_box_overlap(box_center: Point3, box_half: Point3, tri: &[Point3; 3]) -> bool {
    let v0 = tri[0] - box_center;
    let v1 = tri[1] - box_center;
    let v2 = tri[2] - box_center;
    let e0 = v1 - v0;
    let e1 = v2 - v1;
    let e2 = v0 - v2;

    // Box face normals: AABB overlap of the triangle.
    let minmax = |a: f64, b: f64, c: f64| (a.min(b).min(c), a.max(b).max(c));
    let (minx, maxx) = minmax(v0.x, v1.x, v2.x);
    if minx > box_half.x || maxx < -box_half.x {
        return false;
    }
    let (miny, maxy) = minmax(v0.y, v1.y, v2.y);
    if miny > box_half.y || maxy < -box_half.y {
        return false;
    }
    let (minz, maxz) = minmax(v0.z, v1.z, v2.z);
    if minz > box_half.z || maxz < -box_half.z {
        return false;
    }

    // 9 cross-product axes: cross(edge, box unit axis).
    let units = [
        Point3::new(1.0, 0.0, 0.0),
        Point3::new(0.0, 1.0, 0.0),
        Point3::new(0.0, 0.0, 1.0),
    ];
    for e in [e0, e1, e2] {
        for u in units {
            let axis = e.cross(u);
            let p0 = axis.dot(v0);
            let p1 = axis.dot(v1);
            let p2 = axis.dot(v2);
            let (min, max) = minmax(p0, p1, p2);
            let rad =
                axis.x.abs() * box_half.x + axis.y.abs() * box_half.y + axis.z.abs() * box_half.z;
            if min > rad || max < -rad {
                return false;
            }
        }
    }

    // Triangle plane vs box.
    let normal = e0.cross(e1);
    plane_box_overlap(normal, v0, box_half)
}

fn plane_box_overlap(normal: Point3, vert: Point3, maxbox: Point3) -> bool {
    let mut vmin = Point3::default();
    let mut vmax = Point3::default();
    for q in 0..3 {
        let n = normal.component(q);
        let v = vert.component(q);
        let h = maxbox.component(q);
        let (lo, hi) = if n > 0.0 {
            (-h - v, h - v)
        } else {
            (h - v, -h - v)
        };
        match q {
            0 => {
                vmin.x = lo;
                vmax.x = hi;
            }
            1 => {
                vmin.y = lo;
                vmax.y = hi;
            }
            _ => {
                vmin.z = lo;
                vmax.z = hi;
            }
        }
    }
    if normal.dot(vmin) > 0.0 {
        return false;
    }
    normal.dot(vmax) >= 0.0
}
