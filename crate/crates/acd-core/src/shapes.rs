//! Procedural meshes used as pipeline inputs and test fixtures: boxes,
//! icospheres, L-shaped prisms and multi-box assemblies.

use crate::geometry::{Point3, TriangleMesh};

/// Axis-aligned box as 12 outward-oriented triangles.
pub fn box_mesh(min: Point3, max: Point3) -> TriangleMesh {
    let v = [
        Point3::new(min.x, min.y, min.z),
        Point3::new(max.x, min.y, min.z),
        Point3::new(max.x, max.y, min.z),
        Point3::new(min.x, max.y, min.z),
        Point3::new(min.x, min.y, max.z),
        Point3::new(max.x, min.y, max.z),
        Point3::new(max.x, max.y, max.z),
        Point3::new(min.x, max.y, max.z),
    ];
    let faces = vec![
        // -z
        [0, 2, 1],
        [0, 3, 2],
        // +z
        [4, 5, 6],
        [4, 6, 7],
        // -y
        [0, 1, 5],
        [0, 5, 4],
        // +y
        [3, 6, 2],
        [3, 7, 6],
        // -x
        [0, 4, 7],
        [0, 7, 3],
        // +x
        [1, 2, 6],
        [1, 6, 5],
    ];
    TriangleMesh {
        vertices: v.to_vec(),
        faces,
    }
}

/// Cube `[0, side]^3`.
pub fn cube_mesh(side: f64) -> TriangleMesh {
    box_mesh(Point3::new(0.0, 0.0, 0.0), Point3::new(side, side, side))
}

/// Icosphere centered at `center`: an icosahedron with the given circumradius
/// subdivided `subdivisions` times, vertices projected back to the sphere.
pub fn icosphere(center: Point3, radius: f64, subdivisions: usize) -> TriangleMesh {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let raw = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ];
    let mut vertices: Vec<Point3> = raw
        .iter()
        .map(|&(x, y, z)| Point3::new(x, y, z).normalized().unwrap())
        .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..subdivisions {
        let mut midpoint: std::collections::HashMap<(usize, usize), usize> = Default::default();
        let mut next_faces = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let mut mid = |i: usize, j: usize, vertices: &mut Vec<Point3>| -> usize {
                let key = (i.min(j), i.max(j));
                *midpoint.entry(key).or_insert_with(|| {
                    let m = ((vertices[i] + vertices[j]) * 0.5).normalized().unwrap();
                    vertices.push(m);
                    vertices.len() - 1
                })
            };
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next_faces.push([a, ab, ca]);
            next_faces.push([b, bc, ab]);
            next_faces.push([c, ca, bc]);
            next_faces.push([ab, bc, ca]);
        }
        faces = next_faces;
    }

    for v in &mut vertices {
        *v = center + *v * radius;
    }
    TriangleMesh { vertices, faces }
}

/// Concatenation of meshes into one (no welding; shared internal walls are
/// harmless to solid voxelization).
pub fn concat_meshes(meshes: &[TriangleMesh]) -> TriangleMesh {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for m in meshes {
        let base = vertices.len();
        vertices.extend_from_slice(&m.vertices);
        faces.extend(
            m.faces
                .iter()
                .map(|f| [f[0] + base, f[1] + base, f[2] + base]),
        );
    }
    TriangleMesh { vertices, faces }
}

/// L-shaped prism: the unit square section minus its upper-right quadrant,
/// extruded to height 1. A single closed surface (no internal walls), and
/// symmetric under swapping x and y.
pub fn l_shape_mesh() -> TriangleMesh {
    // Section polygon, counter-clockwise viewed from +z; star-shaped from
    // the origin, so a fan triangulation of the caps stays inside.
    let section = [
        (0.0, 0.0),
        (1.0, 0.0),
        (1.0, 0.5),
        (0.5, 0.5),
        (0.5, 1.0),
        (0.0, 1.0),
    ];
    let n = section.len();
    let mut vertices = Vec::with_capacity(2 * n);
    for &(x, y) in &section {
        vertices.push(Point3::new(x, y, 0.0));
    }
    for &(x, y) in &section {
        vertices.push(Point3::new(x, y, 1.0));
    }
    let mut faces = Vec::new();
    for i in 1..n - 1 {
        faces.push([0, i + 1, i]); // bottom, normal -z
        faces.push([n, n + i, n + i + 1]); // top, normal +z
    }
    for i in 0..n {
        let j = (i + 1) % n;
        faces.push([i, j, n + j]);
        faces.push([i, n + j, n + i]);
    }
    TriangleMesh { vertices, faces }
}

/// Four-legged table analog: a top slab over four legs. Returns the part
/// meshes in a fixed order (top, then legs).
pub fn table_parts(
    width: f64,
    depth: f64,
    height: f64,
    top_thickness: f64,
    leg_thickness: f64,
) -> Vec<TriangleMesh> {
    let top = box_mesh(
        Point3::new(0.0, 0.0, height - top_thickness),
        Point3::new(width, depth, height),
    );
    let lt = leg_thickness;
    let leg_h = height - top_thickness;
    let legs = [
        (0.0, 0.0),
        (width - lt, 0.0),
        (0.0, depth - lt),
        (width - lt, depth - lt),
    ];
    let mut parts = vec![top];
    for (x, y) in legs {
        parts.push(box_mesh(
            Point3::new(x, y, 0.0),
            Point3::new(x + lt, y + lt, leg_h),
        ));
    }
    parts
}
