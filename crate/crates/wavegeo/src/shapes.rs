//! Procedural test meshes: icosphere, planar grid, torus, and a bumpy
//! sphere standing in for scanned-model-scale inputs.

use std::collections::HashMap;

use crate::mesh::{TriangleMesh, Vec3};

/// Icosphere by repeated 1-to-4 subdivision of an icosahedron, vertices
/// projected to radius `radius`. Subdivision 4 gives 5120 faces.
pub fn icosphere(radius: f64, subdivisions: u32) -> TriangleMesh {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
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
    let mut vertices: Vec<Vec3> = raw
        .iter()
        .map(|&(x, y, z)| {
            let p = Vec3::new(x, y, z);
            p * (radius / p.norm())
        })
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
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next_faces = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut mid = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                mid[k] = *midpoint.entry(key).or_insert_with(|| {
                    let m = (vertices[a] + vertices[b]) * 0.5;
                    vertices.push(m * (radius / m.norm()));
                    vertices.len() - 1
                });
            }
            next_faces.push([f[0], mid[0], mid[2]]);
            next_faces.push([f[1], mid[1], mid[0]]);
            next_faces.push([f[2], mid[2], mid[1]]);
            next_faces.push([mid[0], mid[1], mid[2]]);
        }
        faces = next_faces;
    }

    TriangleMesh::new(vertices, faces).expect("icosphere construction is valid")
}

/// Flat rectangular grid in the z = 0 plane with `nx` by `ny` vertices
/// spanning `width` by `height`, corner at the origin. Each cell is split
/// along the same diagonal.
pub fn grid(nx: usize, ny: usize, width: f64, height: f64) -> TriangleMesh {
    assert!(nx >= 2 && ny >= 2);
    let mut vertices = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            vertices.push(Vec3::new(
                width * i as f64 / (nx - 1) as f64,
                height * j as f64 / (ny - 1) as f64,
                0.0,
            ));
        }
    }
    let mut faces = Vec::with_capacity((nx - 1) * (ny - 1) * 2);
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let v00 = j * nx + i;
            let v10 = v00 + 1;
            let v01 = v00 + nx;
            let v11 = v01 + 1;
            faces.push([v00, v10, v11]);
            faces.push([v00, v11, v01]);
        }
    }
    TriangleMesh::new(vertices, faces).expect("grid construction is valid")
}

/// Closed torus with major radius `major`, tube radius `minor`, sampled
/// on an `nu` by `nv` parameter grid.
pub fn torus(major: f64, minor: f64, nu: usize, nv: usize) -> TriangleMesh {
    assert!(nu >= 3 && nv >= 3);
    let tau = std::f64::consts::TAU;
    let mut vertices = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = tau * i as f64 / nu as f64;
        for j in 0..nv {
            let v = tau * j as f64 / nv as f64;
            let ring = major + minor * v.cos();
            vertices.push(Vec3::new(ring * u.cos(), ring * u.sin(), minor * v.sin()));
        }
    }
    let mut faces = Vec::with_capacity(nu * nv * 2);
    for i in 0..nu {
        let i1 = (i + 1) % nu;
        for j in 0..nv {
            let j1 = (j + 1) % nv;
            let a = i * nv + j;
            let b = i1 * nv + j;
            let c = i1 * nv + j1;
            let d = i * nv + j1;
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    TriangleMesh::new(vertices, faces).expect("torus construction is valid")
}

/// Icosphere with the lattice regularity broken: vertices are jittered
/// tangentially (seeded) and re-projected, so the geometry is still an
/// exact sphere but the triangulation is unstructured.
pub fn irregular_sphere(radius: f64, subdivisions: u32, jitter: f64, seed: u64) -> TriangleMesh {
    use rand::{Rng, SeedableRng};
    let base = icosphere(radius, subdivisions);
    let edge = base.mean_edge_length();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let moved = base
        .vertices()
        .iter()
        .map(|p| {
            let d = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let radial = p / p.norm();
            let tangential = d - radial * d.dot(&radial);
            let q = p + tangential * (jitter * edge);
            q * (radius / q.norm())
        })
        .collect();
    base.with_positions(moved)
}

/// Icosphere with a smooth radial bump field: closed, irregular
/// curvature and anisotropic triangles at scanned-model face counts.
pub fn bumpy_sphere(radius: f64, subdivisions: u32, bump_amplitude: f64) -> TriangleMesh {
    let base = icosphere(radius, subdivisions);
    let displaced = base
        .vertices()
        .iter()
        .map(|p| {
            let d = p / p.norm();
            let bump = (3.0 * d.x).sin() * (4.0 * d.y).cos() + (5.0 * d.z).sin();
            p * (1.0 + bump_amplitude * bump)
        })
        .collect();
    base.with_positions(displaced)
}

/// Delete `count` faces spread over the mesh, punching holes while
/// keeping the rest of the connectivity intact.
pub fn delete_faces(mesh: &TriangleMesh, face_ids: &[usize]) -> TriangleMesh {
    let keep: Vec<[usize; 3]> = mesh
        .faces()
        .iter()
        .enumerate()
        .filter(|(fi, _)| !face_ids.contains(fi))
        .map(|(_, f)| *f)
        .collect();
    TriangleMesh::new(mesh.vertices().to_vec(), keep).expect("face deletion keeps mesh valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn icosphere_counts() {
        let m = icosphere(1.0, 4);
        assert_eq!(m.face_count(), 5120);
        assert_eq!(m.vertex_count(), 2562);
        for p in m.vertices() {
            assert_relative_eq!(p.norm(), 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn grid_is_open_with_expected_counts() {
        let m = grid(5, 4, 1.0, 1.0);
        assert_eq!(m.vertex_count(), 20);
        assert_eq!(m.face_count(), 24);
        assert!(!m.is_closed());
    }

    #[test]
    fn torus_is_closed() {
        let m = torus(1.0, 0.3, 16, 8);
        assert!(m.is_closed());
    }

    #[test]
    fn delete_faces_opens_holes() {
        let m = icosphere(1.0, 2);
        let holed = delete_faces(&m, &[0, 50, 200]);
        assert_eq!(holed.face_count(), m.face_count() - 3);
        assert!(!holed.is_closed());
    }
}
