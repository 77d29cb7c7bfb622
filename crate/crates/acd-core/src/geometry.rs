//! Shared geometric primitives: points, point clouds, triangle meshes,
//! axis-aligned bounding boxes, principal-axis frames and surface sampling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("mesh has no faces")]
    EmptyMesh,
    #[error("mesh has zero total surface area")]
    ZeroArea,
    #[error("face {face} references vertex {index} but mesh has {vertex_count} vertices")]
    FaceIndexOutOfRange {
        face: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("face {face} repeats a vertex index")]
    DegenerateFace { face: usize },
    #[error("sample count must be at least 1")]
    ZeroSamples,
}

/// A 3D point (or vector; the toolkit uses one type for both).
///
/// All coordinates are expected to be finite.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Point3) -> Point3 {
        Point3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn normalized(self) -> Option<Point3> {
        let n = self.norm();
        if n > 0.0 {
            Some(self * (1.0 / n))
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn component(self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("axis out of range: {axis}"),
        }
    }

    pub fn min_componentwise(self, other: Point3) -> Point3 {
        Point3::new(
            self.x.min(other.x),
            self.y.min(other.y),
            self.z.min(other.z),
        )
    }

    pub fn max_componentwise(self, other: Point3) -> Point3 {
        Point3::new(
            self.x.max(other.x),
            self.y.max(other.y),
            self.z.max(other.z),
        )
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, rhs: Point3) -> Point3 {
        Point3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, rhs: Point3) -> Point3 {
        Point3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

/// An ordered list of points. Order is stable: labels index by position.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub points: Vec<Point3>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// An indexed triangle mesh.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriangleMesh {
    pub vertices: Vec<Point3>,
    pub faces: Vec<[usize; 3]>,
}

impl TriangleMesh {
    /// Builds a mesh, validating that every face index is in range and that
    /// no face repeats a vertex index.
    pub fn new(vertices: Vec<Point3>, faces: Vec<[usize; 3]>) -> Result<Self, GeometryError> {
        for (fi, f) in faces.iter().enumerate() {
            for &i in f {
                if i >= vertices.len() {
                    return Err(GeometryError::FaceIndexOutOfRange {
                        face: fi,
                        index: i,
                        vertex_count: vertices.len(),
                    });
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(GeometryError::DegenerateFace { face: fi });
            }
        }
        Ok(Self { vertices, faces })
    }

    pub fn face_vertices(&self, face: usize) -> [Point3; 3] {
        let [a, b, c] = self.faces[face];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn face_area(&self, face: usize) -> f64 {
        let [a, b, c] = self.face_vertices(face);
        (b - a).cross(c - a).norm() * 0.5
    }

    pub fn total_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    pub fn vertex_cloud(&self) -> PointCloud {
        PointCloud::new(self.vertices.clone())
    }
}

/// Axis-aligned bounding box, `min <= max` component-wise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn extent(&self) -> Point3 {
        self.max - self.min
    }

    pub fn center(&self) -> Point3 {
        (self.min + self.max) * 0.5
    }

    pub fn diagonal(&self) -> f64 {
        self.extent().norm()
    }

    pub fn contains(&self, p: Point3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    pub fn of_points(points: &[Point3]) -> Option<Aabb> {
        let first = *points.first()?;
        let mut min = first;
        let mut max = first;
        for &p in &points[1..] {
            min = min.min_componentwise(p);
            max = max.max_componentwise(p);
        }
        Some(Aabb { min, max })
    }
}

/// Component-wise extrema of a point cloud.
pub fn compute_aabb(cloud: &PointCloud) -> Result<Aabb, GeometryError> {
    Aabb::of_points(&cloud.points).ok_or(GeometryError::EmptyCloud)
}

/// An orthonormal principal-axis frame: origin at the centroid, axes sorted by
/// descending variance, right-handed (determinant +1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub origin: Point3,
    /// `axes[k]` is the k-th principal axis (unit length).
    pub axes: [Point3; 3],
}

impl Frame {
    /// Identity frame at the given origin.
    pub fn identity(origin: Point3) -> Self {
        Frame {
            origin,
            axes: [
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
                Point3::new(0.0, 0.0, 1.0),
            ],
        }
    }

    /// Coordinates of `p` in this frame.
    pub fn to_local(&self, p: Point3) -> Point3 {
        let d = p - self.origin;
        Point3::new(
            self.axes[0].dot(d),
            self.axes[1].dot(d),
            self.axes[2].dot(d),
        )
    }

    /// Inverse of [`Frame::to_local`].
    pub fn to_world(&self, q: Point3) -> Point3 {
        self.origin + self.axes[0] * q.x + self.axes[1] * q.y + self.axes[2] * q.z
    }

    pub fn determinant(&self) -> f64 {
        self.axes[0].cross(self.axes[1]).dot(self.axes[2])
    }
}

/// Eigen-decomposition of a symmetric 3x3 matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors as rows, unsorted.
/// Convergence: off-diagonal Frobenius norm below 1e-12 (bounded sweeps).
#[allow(clippy::needless_range_loop)] // paired row/column updates
fn jacobi_eigen_3x3(mut a: [[f64; 3]; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    // v holds accumulated rotations; rows of the result are eigenvectors.
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _ in 0..64 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if (2.0 * off).sqrt() < 1e-12 {
            break;
        }
        for &(p, q) in &[(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            // A <- J^T A J with J the rotation in the (p, q) plane.
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for k in 0..3 {
                let vpk = v[p][k];
                let vqk = v[q][k];
                v[p][k] = c * vpk - s * vqk;
                v[q][k] = s * vpk + c * vqk;
            }
        }
    }
    ([a[0][0], a[1][1], a[2][2]], v)
}

fn centroid(points: &[Point3]) -> Point3 {
    let mut c = Point3::default();
    for &p in points {
        c = c + p;
    }
    c * (1.0 / points.len() as f64)
}

fn covariance(points: &[Point3], center: Point3) -> [[f64; 3]; 3] {
    let mut m = [[0.0f64; 3]; 3];
    for &p in points {
        let d = p - center;
        let v = [d.x, d.y, d.z];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += v[i] * v[j];
            }
        }
    }
    let inv_n = 1.0 / points.len() as f64;
    for row in &mut m {
        for e in row.iter_mut() {
            *e *= inv_n;
        }
    }
    m
}

/// Principal frame of a point cloud together with the covariance eigenvalues
/// (descending). Used by the splitter, which needs the spectrum as well.
pub fn principal_components(cloud: &PointCloud) -> Result<(Frame, [f64; 3]), GeometryError> {
    if cloud.is_empty() {
        return Err(GeometryError::EmptyCloud);
    }
    let origin = centroid(&cloud.points);
    let cov = covariance(&cloud.points, origin);
    let (vals, vecs) = jacobi_eigen_3x3(cov);

    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| vals[j].partial_cmp(&vals[i]).unwrap());

    let mut axes = [Point3::default(); 3];
    let mut eigenvalues = [0.0f64; 3];
    for (k, &i) in order.iter().enumerate() {
        let ax = Point3::new(vecs[i][0], vecs[i][1], vecs[i][2]);
        // Sign convention: flip so the largest-magnitude entry is positive.
        let comps = [ax.x, ax.y, ax.z];
        let mut dominant = 0;
        for c in 1..3 {
            if comps[c].abs() > comps[dominant].abs() {
                dominant = c;
            }
        }
        axes[k] = if comps[dominant] < 0.0 { -ax } else { ax };
        eigenvalues[k] = vals[i];
    }
    let mut frame = Frame { origin, axes };
    if frame.determinant() < 0.0 {
        frame.axes[2] = -frame.axes[2];
    }
    Ok((frame, eigenvalues))
}

/// Principal-axis frame: origin at the centroid, axes the covariance
/// eigenvectors in descending-eigenvalue order. With repeated eigenvalues any
/// orthonormal eigenbasis may be returned; callers must not rely on the
/// specific choice.
pub fn principal_frame(cloud: &PointCloud) -> Result<Frame, GeometryError> {
    principal_components(cloud).map(|(f, _)| f)
}

/// Samples `n` points uniformly by area on the mesh surface.
///
/// Faces are chosen by a cumulative-area table with binary search; the
/// position within a face is uniform via barycentric sampling. Deterministic
/// for a fixed seed.
pub fn sample_mesh_surface(
    mesh: &TriangleMesh,
    n: usize,
    seed: u64,
) -> Result<PointCloud, GeometryError> {
    if mesh.faces.is_empty() {
        return Err(GeometryError::EmptyMesh);
    }
    if n == 0 {
        return Err(GeometryError::ZeroSamples);
    }
    let mut cumulative = Vec::with_capacity(mesh.faces.len());
    let mut total = 0.0f64;
    for f in 0..mesh.faces.len() {
        total += mesh.face_area(f);
        cumulative.push(total);
    }
    if total <= 0.0 {
        return Err(GeometryError::ZeroArea);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let target = rng.gen::<f64>() * total;
        let face = cumulative
            .partition_point(|&c| c <= target)
            .min(mesh.faces.len() - 1);
        let [a, b, c] = mesh.face_vertices(face);
        let r1: f64 = rng.gen();
        let r2: f64 = rng.gen();
        let sq = r1.sqrt();
        let p = a * (1.0 - sq) + b * (sq * (1.0 - r2)) + c * (sq * r2);
        points.push(p);
    }
    Ok(PointCloud::new(points))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aabb_extrema() {
        let cloud = PointCloud::new(vec![Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 2.0, 3.0)]);
        let bb = compute_aabb(&cloud).unwrap();
        assert_eq!(bb.min, Point3::new(0.0, 0.0, 0.0));
        assert_eq!(bb.max, Point3::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn aabb_single_point_degenerate() {
        let cloud = PointCloud::new(vec![Point3::new(5.0, 5.0, 5.0)]);
        let bb = compute_aabb(&cloud).unwrap();
        assert_eq!(bb.min, bb.max);
    }

    #[test]
    fn aabb_empty_errors() {
        assert_eq!(
            compute_aabb(&PointCloud::default()),
            Err(GeometryError::EmptyCloud)
        );
    }

    #[test]
    fn aabb_unit_cube_corners() {
        let corners = unit_cube_corners();
        let bb = compute_aabb(&PointCloud::new(corners)).unwrap();
        assert_eq!(bb.min, Point3::new(0.0, 0.0, 0.0));
        assert_eq!(bb.max, Point3::new(1.0, 1.0, 1.0));
    }

    fn unit_cube_corners() -> Vec<Point3> {
        let mut v = Vec::new();
        for x in [0.0, 1.0] {
            for y in [0.0, 1.0] {
                for z in [0.0, 1.0] {
                    v.push(Point3::new(x, y, z));
                }
            }
        }
        v
    }

    #[test]
    fn frame_of_x_axis_segment() {
        let cloud = PointCloud::new(
            (0..20)
                .map(|i| Point3::new(i as f64 * 0.1, 0.0, 0.0))
                .collect(),
        );
        let frame = principal_frame(&cloud).unwrap();
        assert!(frame.axes[0].x.abs() > 1.0 - 1e-9);
        assert!(frame.axes[0].y.abs() < 1e-9 && frame.axes[0].z.abs() < 1e-9);
    }

    #[test]
    fn frame_orthonormal_and_right_handed() {
        let cloud = PointCloud::new(unit_cube_corners());
        let frame = principal_frame(&cloud).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((frame.axes[i].dot(frame.axes[j]) - expected).abs() < 1e-9);
            }
        }
        assert!((frame.determinant() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn frame_errors_on_empty() {
        assert!(principal_frame(&PointCloud::default()).is_err());
    }

    #[test]
    fn frame_single_point_is_valid() {
        let cloud = PointCloud::new(vec![Point3::new(1.0, 2.0, 3.0)]);
        let frame = principal_frame(&cloud).unwrap();
        assert_eq!(frame.origin, Point3::new(1.0, 2.0, 3.0));
        assert!((frame.determinant() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn local_world_roundtrip() {
        let cloud = PointCloud::new(vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(3.0, 1.0, 0.5),
            Point3::new(1.0, 2.0, 2.0),
            Point3::new(-1.0, 0.3, 1.0),
        ]);
        let frame = principal_frame(&cloud).unwrap();
        let p = Point3::new(0.3, -0.7, 2.1);
        let q = frame.to_world(frame.to_local(p));
        assert!((p - q).norm() < 1e-12);
    }

    #[test]
    fn single_triangle_samples_on_plane() {
        let mesh = TriangleMesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let cloud = sample_mesh_surface(&mesh, 1000, 7).unwrap();
        for p in &cloud.points {
            assert!(p.z.abs() < 1e-9);
            assert!(p.x >= -1e-9 && p.y >= -1e-9 && p.x + p.y <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn sampling_deterministic() {
        let mesh = TriangleMesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let a = sample_mesh_surface(&mesh, 500, 42).unwrap();
        let b = sample_mesh_surface(&mesh, 500, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mesh_validation() {
        let verts = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        assert!(TriangleMesh::new(verts.clone(), vec![[0, 1, 3]]).is_err());
        assert!(TriangleMesh::new(verts, vec![[0, 1, 1]]).is_err());
    }

    #[test]
    fn zero_area_mesh_rejected_for_sampling() {
        let mesh = TriangleMesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(0.0, 0.0, 0.0),
            ],
            vec![[0, 1, 2]],
        );
        // Distinct indices but coincident vertices: zero area.
        let mesh = mesh.unwrap();
        assert_eq!(
            sample_mesh_surface(&mesh, 10, 0).unwrap_err(),
            GeometryError::ZeroArea
        );
    }
}
