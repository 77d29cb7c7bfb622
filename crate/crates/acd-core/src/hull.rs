//! 3D convex hulls by incremental quickhull, hull volumes, and hull
//! rasterization onto voxel grids.
//!
//! Robustness is tolerance-based rather than exact-arithmetic: points within
//! `eps = 1e-7 * bbox diagonal` of a face are treated as on-face, and a hull
//! guarantees every input point has signed distance at most `eps` from its
//! surface.

use crate::geometry::{Aabb, Point3, PointCloud, TriangleMesh};
use crate::voxel::{GridFrame, VoxelGrid, VoxelSet};
use thiserror::Error;

/// Relative factor applied to the input bounding-box diagonal to obtain the
/// hull tolerance.
pub const HULL_EPS_FACTOR: f64 = 1e-7;

#[derive(Debug, Error, PartialEq)]
pub enum HullError {
    /// Fewer than 4 points, or input of affine rank below 3.
    #[error("degenerate hull input (affine rank {rank})")]
    DegenerateHull { rank: usize },
    #[error("hull construction failed numerically")]
    NumericalFailure,
}

/// A closed convex polyhedron: outward-oriented triangle mesh, volume and
/// centroid.
#[derive(Debug, Clone)]
pub struct ConvexHull {
    pub mesh: TriangleMesh,
    pub volume: f64,
    pub centroid: Point3,
    eps: f64,
}

impl ConvexHull {
    /// Tolerance used during construction (1e-7 times the input diagonal).
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Outward unit normal and offset (`n . x = d` on the plane) per face.
    pub fn face_planes(&self) -> Vec<(Point3, f64)> {
        face_planes_of(&self.mesh)
    }

    /// Largest signed distance of `p` to any face plane; non-positive values
    /// are inside.
    pub fn signed_distance(&self, p: Point3) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for (n, d) in self.face_planes() {
            best = best.max(n.dot(p) - d);
        }
        best
    }

    pub fn contains(&self, p: Point3, tol: f64) -> bool {
        self.signed_distance(p) <= tol
    }
}

fn face_planes_of(mesh: &TriangleMesh) -> Vec<(Point3, f64)> {
    mesh.faces
        .iter()
        .map(|f| {
            let [a, b, c] = [
                mesh.vertices[f[0]],
                mesh.vertices[f[1]],
                mesh.vertices[f[2]],
            ];
            let n = (b - a).cross(c - a).normalized().unwrap_or_default();
            (n, n.dot(a))
        })
        .collect()
}

/// Signed volume of a closed, consistently oriented triangle mesh:
/// `(1/6) * sum of triple products`. Positive for outward orientation.
pub fn hull_volume(mesh: &TriangleMesh) -> f64 {
    let mut vol = 0.0;
    for f in &mesh.faces {
        let a = mesh.vertices[f[0]];
        let b = mesh.vertices[f[1]];
        let c = mesh.vertices[f[2]];
        vol += a.dot(b.cross(c));
    }
    vol / 6.0
}

fn mesh_centroid(mesh: &TriangleMesh) -> Point3 {
    // Volume-weighted centroid via signed tetrahedra against the origin.
    let mut acc = Point3::default();
    let mut vol = 0.0;
    for f in &mesh.faces {
        let a = mesh.vertices[f[0]];
        let b = mesh.vertices[f[1]];
        let c = mesh.vertices[f[2]];
        let w = a.dot(b.cross(c));
        acc = acc + (a + b + c) * (w / 4.0);
        vol += w;
    }
    if vol.abs() > 0.0 {
        acc * (1.0 / vol)
    } else {
        // Flat hull; fall back to the vertex mean.
        let mut m = Point3::default();
        for &v in &mesh.vertices {
            m = m + v;
        }
        m * (1.0 / mesh.vertices.len().max(1) as f64)
    }
}

/// Convex hull of a point set by incremental quickhull.
///
/// Errors with the affine rank when the input has fewer than 4 points or is
/// coincident / collinear / coplanar at the hull tolerance.
pub fn convex_hull_3d(points: &PointCloud) -> Result<ConvexHull, HullError> {
    convex_hull_of_points(&points.points)
}

pub(crate) fn convex_hull_of_points(points: &[Point3]) -> Result<ConvexHull, HullError> {
    let diag = Aabb::of_points(points).map(|b| b.diagonal()).unwrap_or(0.0);
    let base_eps = (HULL_EPS_FACTOR * diag).max(f64::MIN_POSITIVE);
    // Escalate the tolerance if the horizon topology breaks down numerically.
    let mut eps = base_eps;
    for _ in 0..3 {
        match QuickHull::build(points, eps) {
            Ok(hull) => return Ok(hull),
            Err(HullError::NumericalFailure) => eps *= 100.0,
            Err(e) => return Err(e),
        }
    }
    QuickHull::build(points, eps)
}

struct Face {
    verts: [usize; 3],
    normal: Point3,
    offset: f64,
    /// Neighbor face across edge i = (verts[i], verts[i+1]).
    neighbors: [usize; 3],
    outside: Vec<usize>,
    farthest: f64,
    farthest_idx: usize,
    alive: bool,
}

impl Face {
    fn dist(&self, p: Point3) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

struct QuickHull<'a> {
    points: &'a [Point3],
    faces: Vec<Face>,
    interior: Point3,
    eps: f64,
}

impl<'a> QuickHull<'a> {
    fn build(points: &'a [Point3], eps: f64) -> Result<ConvexHull, HullError> {
        if points.len() < 4 {
            return Err(HullError::DegenerateHull {
                rank: affine_rank(points, eps),
            });
        }
        let (i0, i1, i2, i3) = initial_simplex(points, eps)?;
        let interior = (points[i0] + points[i1] + points[i2] + points[i3]) * 0.25;
        let mut hull = QuickHull {
            points,
            faces: Vec::new(),
            interior,
            eps,
        };
        for tri in [[i0, i1, i2], [i0, i1, i3], [i0, i2, i3], [i1, i2, i3]] {
            hull.push_face_outward(tri)?;
        }
        // Brute-force adjacency for the initial tetrahedron.
        for a in 0..4 {
            for e in 0..3 {
                let (u, v) = (hull.faces[a].verts[e], hull.faces[a].verts[(e + 1) % 3]);
                for b in 0..4 {
                    if b == a {
                        continue;
                    }
                    let vs = hull.faces[b].verts;
                    if vs.contains(&u) && vs.contains(&v) {
                        hull.faces[a].neighbors[e] = b;
                    }
                }
            }
        }
        // Distribute points among faces.
        let simplex = [i0, i1, i2, i3];
        for (idx, &p) in points.iter().enumerate() {
            if simplex.contains(&idx) {
                continue;
            }
            hull.assign_point(idx, p, 0..4);
        }
        hull.run()?;
        hull.finish()
    }

    /// Adds a face with the given winding; the normal follows the winding.
    fn push_face(&mut self, verts: [usize; 3]) -> Result<usize, HullError> {
        let [a, b, c] = verts.map(|i| self.points[i]);
        let n = (b - a)
            .cross(c - a)
            .normalized()
            .ok_or(HullError::NumericalFailure)?;
        self.faces.push(Face {
            verts,
            normal: n,
            offset: n.dot(a),
            neighbors: [usize::MAX; 3],
            outside: Vec::new(),
            farthest: f64::NEG_INFINITY,
            farthest_idx: usize::MAX,
            alive: true,
        });
        Ok(self.faces.len() - 1)
    }

    /// Adds an initial-simplex face, flipping the winding if needed so the
    /// normal points away from the simplex interior.
    fn push_face_outward(&mut self, verts: [usize; 3]) -> Result<usize, HullError> {
        let fi = self.push_face(verts)?;
        let f = &mut self.faces[fi];
        if f.normal.dot(self.interior) - f.offset > 0.0 {
            f.verts.swap(1, 2);
            f.normal = -f.normal;
            f.offset = f.normal.dot(self.points[f.verts[0]]);
        }
        Ok(fi)
    }

    fn assign_point(&mut self, idx: usize, p: Point3, faces: std::ops::Range<usize>) {
        let mut best_face = usize::MAX;
        let mut best_dist = self.eps;
        for f in faces {
            if !self.faces[f].alive {
                continue;
            }
            let d = self.faces[f].dist(p);
            if d > best_dist {
                best_dist = d;
                best_face = f;
            }
        }
        if best_face != usize::MAX {
            let face = &mut self.faces[best_face];
            face.outside.push(idx);
            if best_dist > face.farthest {
                face.farthest = best_dist;
                face.farthest_idx = idx;
            }
        }
    }

    fn run(&mut self) -> Result<(), HullError> {
        loop {
            // Face with the globally farthest outside point.
            let mut pick = usize::MAX;
            let mut pick_dist = f64::NEG_INFINITY;
            for (fi, f) in self.faces.iter().enumerate() {
                if f.alive && !f.outside.is_empty() && f.farthest > pick_dist {
                    pick_dist = f.farthest;
                    pick = fi;
                }
            }
            if pick == usize::MAX {
                return Ok(());
            }
            let apex_idx = self.faces[pick].farthest_idx;
            let apex = self.points[apex_idx];

            // Visible region: BFS over adjacent faces the apex can see.
            let mut visible = vec![pick];
            let mut seen = std::collections::HashSet::new();
            seen.insert(pick);
            let mut stack = vec![pick];
            while let Some(f) = stack.pop() {
                for e in 0..3 {
                    let nb = self.faces[f].neighbors[e];
                    if nb == usize::MAX || seen.contains(&nb) || !self.faces[nb].alive {
                        continue;
                    }
                    if self.faces[nb].dist(apex) > self.eps {
                        seen.insert(nb);
                        visible.push(nb);
                        stack.push(nb);
                    }
                }
            }

            // Horizon: edges from a visible face to a non-visible neighbor,
            // kept in the visible face's winding order.
            let mut horizon: Vec<(usize, usize, usize)> = Vec::new(); // (a, b, outside_face)
            for &f in &visible {
                for e in 0..3 {
                    let nb = self.faces[f].neighbors[e];
                    if nb == usize::MAX || !seen.contains(&nb) {
                        let a = self.faces[f].verts[e];
                        let b = self.faces[f].verts[(e + 1) % 3];
                        horizon.push((a, b, nb));
                    }
                }
            }
            if horizon.is_empty() {
                return Err(HullError::NumericalFailure);
            }

            // Orphaned outside points to redistribute.
            let mut orphans: Vec<usize> = Vec::new();
            for &f in &visible {
                self.faces[f].alive = false;
                orphans.append(&mut self.faces[f].outside);
            }

            // New fan of faces around the apex.
            let new_start = self.faces.len();
            let mut start_of: std::collections::HashMap<usize, usize> = Default::default();
            let mut end_of: std::collections::HashMap<usize, usize> = Default::default();
            for &(a, b, nb) in &horizon {
                // (a, b) in visible-face winding puts the new face's normal
                // outward; edge 0 = (a, b) pairs with the surviving neighbor.
                let fi = self.push_face([a, b, apex_idx])?;
                self.faces[fi].neighbors[0] = nb;
                if start_of.insert(a, fi).is_some() || end_of.insert(b, fi).is_some() {
                    return Err(HullError::NumericalFailure);
                }
                // Re-point the surviving neighbor at the new face.
                if nb != usize::MAX {
                    let nbf = &mut self.faces[nb];
                    for e in 0..3 {
                        let (u, v) = (nbf.verts[e], nbf.verts[(e + 1) % 3]);
                        if (u, v) == (b, a) {
                            nbf.neighbors[e] = fi;
                        }
                    }
                }
            }
            // Link the fan: face (a,b,apex) meets face starting at b across
            // edge (b, apex), and the face ending at a across (apex, a).
            for fi in new_start..self.faces.len() {
                let a = self.faces[fi].verts[0];
                let b = self.faces[fi].verts[1];
                let next = *start_of.get(&b).ok_or(HullError::NumericalFailure)?;
                let prev = *end_of.get(&a).ok_or(HullError::NumericalFailure)?;
                self.faces[fi].neighbors[1] = next;
                self.faces[fi].neighbors[2] = prev;
            }

            // Reassign orphans to the new faces.
            let range = new_start..self.faces.len();
            for idx in orphans {
                if idx == apex_idx {
                    continue;
                }
                self.assign_point(idx, self.points[idx], range.clone());
            }
        }
    }

    fn finish(self) -> Result<ConvexHull, HullError> {
        let mut remap: std::collections::BTreeMap<usize, usize> = Default::default();
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        for f in self.faces.iter().filter(|f| f.alive) {
            let tri: Vec<usize> = f
                .verts
                .iter()
                .map(|&v| {
                    *remap.entry(v).or_insert_with(|| {
                        vertices.push(self.points[v]);
                        vertices.len() - 1
                    })
                })
                .collect();
            faces.push([tri[0], tri[1], tri[2]]);
        }
        let mesh = TriangleMesh { vertices, faces };
        let volume = hull_volume(&mesh);
        if !volume.is_finite() || volume <= 0.0 {
            return Err(HullError::NumericalFailure);
        }
        let centroid = mesh_centroid(&mesh);
        Ok(ConvexHull {
            mesh,
            volume,
            centroid,
            eps: self.eps,
        })
    }
}

/// Extreme-point initial tetrahedron; errors with the affine rank if any
/// stage degenerates at tolerance `eps`.
fn initial_simplex(points: &[Point3], eps: f64) -> Result<(usize, usize, usize, usize), HullError> {
    let mut extremes = [0usize; 6];
    for (i, p) in points.iter().enumerate() {
        if p.x < points[extremes[0]].x {
            extremes[0] = i;
        }
        if p.x > points[extremes[1]].x {
            extremes[1] = i;
        }
        if p.y < points[extremes[2]].y {
            extremes[2] = i;
        }
        if p.y > points[extremes[3]].y {
            extremes[3] = i;
        }
        if p.z < points[extremes[4]].z {
            extremes[4] = i;
        }
        if p.z > points[extremes[5]].z {
            extremes[5] = i;
        }
    }
    let (mut i0, mut i1, mut best) = (0, 0, -1.0);
    for &a in &extremes {
        for &b in &extremes {
            let d = (points[a] - points[b]).norm_squared();
            if d > best {
                best = d;
                i0 = a;
                i1 = b;
            }
        }
    }
    if best.sqrt() <= eps {
        return Err(HullError::DegenerateHull { rank: 0 });
    }
    let dir = (points[i1] - points[i0]).normalized().unwrap();
    let (mut i2, mut best) = (usize::MAX, eps);
    for (i, &p) in points.iter().enumerate() {
        let d = p - points[i0];
        let off = (d - dir * d.dot(dir)).norm();
        if off > best {
            best = off;
            i2 = i;
        }
    }
    if i2 == usize::MAX {
        return Err(HullError::DegenerateHull { rank: 1 });
    }
    let n = (points[i1] - points[i0])
        .cross(points[i2] - points[i0])
        .normalized()
        .unwrap();
    let (mut i3, mut best) = (usize::MAX, eps);
    for (i, &p) in points.iter().enumerate() {
        let off = (n.dot(p - points[i0])).abs();
        if off > best {
            best = off;
            i3 = i;
        }
    }
    if i3 == usize::MAX {
        return Err(HullError::DegenerateHull { rank: 2 });
    }
    Ok((i0, i1, i2, i3))
}

/// Affine rank of a point set at tolerance `eps` (0 = coincident, 1 =
/// collinear, 2 = coplanar, 3 = full-dimensional).
pub fn affine_rank(points: &[Point3], eps: f64) -> usize {
    if points.is_empty() {
        return 0;
    }
    match initial_simplex(points, eps) {
        Ok(_) => 3,
        Err(HullError::DegenerateHull { rank }) => rank,
        Err(_) => 0,
    }
}

/// Cells of `grid` whose centers lie inside the hull (strict center-in test,
/// no half-cell slack). Scanned row by row: the hull half-spaces reduce to an
/// interval of cell indices per row.
pub fn hull_occupancy(hull: &ConvexHull, grid: &VoxelGrid) -> VoxelSet {
    let cells = rasterize_planes(&hull.face_planes(), hull.eps * 2.0, grid.frame(), None);
    VoxelSet {
        grid: *grid.frame(),
        cells,
    }
}

/// Inclusive cell-index bounds `(lo, hi)` restricting a grid scan.
pub(crate) type CellBounds = ((usize, usize, usize), (usize, usize, usize));

/// Row-interval rasterization of a convex polytope given by outward planes.
/// `bounds` optionally restricts the scan to a cell-index AABB.
pub(crate) fn rasterize_planes(
    planes: &[(Point3, f64)],
    eps: f64,
    frame: &GridFrame,
    bounds: Option<CellBounds>,
) -> Vec<u32> {
    let r = frame.resolution;
    let ((x0, y0, z0), (x1, y1, z1)) = bounds.unwrap_or(((0, 0, 0), (r - 1, r - 1, r - 1)));
    let h = frame.cell_size;
    let base_x = frame.origin.x + 0.5 * h;
    let mut cells = Vec::new();
    for iz in z0..=z1 {
        let cz = frame.origin.z + (iz as f64 + 0.5) * h;
        for iy in y0..=y1 {
            let cy = frame.origin.y + (iy as f64 + 0.5) * h;
            // t parameterizes the cell index along x; constrain a*t <= b.
            let mut tlo = x0 as f64;
            let mut thi = x1 as f64;
            let mut feasible = true;
            for &(n, d) in planes {
                let a = n.x * h;
                let b = d + eps - (n.x * base_x + n.y * cy + n.z * cz);
                if a == 0.0 {
                    if b < 0.0 {
                        feasible = false;
                        break;
                    }
                } else if a > 0.0 {
                    thi = thi.min(b / a);
                } else {
                    tlo = tlo.max(b / a);
                }
                if tlo > thi {
                    feasible = false;
                    break;
                }
            }
            if !feasible {
                continue;
            }
            let lo = tlo.ceil() as i64;
            let hi = thi.floor() as i64;
            for ix in lo.max(x0 as i64)..=hi.min(x1 as i64) {
                cells.push(frame.linear(ix as usize, iy, iz));
            }
        }
    }
    cells
}

/// Rasterizes a hull restricted to its own AABB (fast path for concavity).
pub(crate) fn rasterize_hull_count(hull: &ConvexHull, frame: &GridFrame) -> usize {
    let bb = match Aabb::of_points(&hull.mesh.vertices) {
        Some(bb) => bb,
        None => return 0,
    };
    let lo = frame.cell_of(bb.min);
    let hi = frame.cell_of(bb.max);
    rasterize_planes(&hull.face_planes(), hull.eps * 2.0, frame, Some((lo, hi))).len()
}
