//! Manifold triangle meshes with derived connectivity and per-face geometry.

mod io;

pub use io::{load_mesh, load_mesh_auto, write_obj, write_off, write_ply_with_scalar, MeshFormat};

use std::collections::BTreeMap;

use thiserror::Error;

/// 3D position/vector type used throughout the crate.
pub type Vec3 = nalgebra::Vector3<f64>;

/// Relative area threshold below which a face counts as degenerate.
/// Faces with area < threshold * (bbox diagonal)^2 are rejected: their
/// cotangents blow up and the per-face 2x2 gradient solve goes singular.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("non-manifold edge ({v0}, {v1}) shared by {count} faces")]
    NonManifold { v0: usize, v1: usize, count: usize },
    #[error("face at line {line} has {arity} vertices; only triangles are accepted")]
    NonTriangle { line: usize, arity: usize },
    #[error("face {face} references an invalid or repeated vertex index")]
    InvalidFace { face: usize },
    #[error("face {face} is degenerate (area {area:.3e} below threshold)")]
    DegenerateFace { face: usize, area: f64 },
    #[error("vertex {vertex} has no incident edges")]
    IsolatedVertex { vertex: usize },
    #[error("vertex index {vertex} out of range (mesh has {count} vertices)")]
    InvalidVertex { vertex: usize, count: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Faces incident on an edge: one for boundary edges, two for interior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeFaces {
    pub f0: usize,
    pub f1: Option<usize>,
}

/// An indexed triangle mesh with derived edges and adjacency.
///
/// Immutable after construction; construction validates manifoldness
/// (every edge has at most two incident faces) and rejects degenerate
/// faces. Boundary edges (one incident face) are accepted.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    /// Canonical edges (min index, max index), sorted lexicographically.
    edges: Vec<[usize; 2]>,
    edge_faces: Vec<EdgeFaces>,
    edge_index: BTreeMap<(usize, usize), usize>,
    vertex_faces: Vec<Vec<usize>>,
    vertex_neighbors: Vec<Vec<usize>>,
    boundary_vertex: Vec<bool>,
    bbox_diagonal: f64,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let nv = vertices.len();

        for (fi, f) in faces.iter().enumerate() {
            let distinct = f[0] != f[1] && f[1] != f[2] && f[0] != f[2];
            if !distinct || f.iter().any(|&v| v >= nv) {
                return Err(MeshError::InvalidFace { face: fi });
            }
        }

        let bbox_diagonal = bbox_diagonal(&vertices);
        let area_floor = DEGENERACY_THRESHOLD * bbox_diagonal * bbox_diagonal;
        for (fi, f) in faces.iter().enumerate() {
            let area = triangle_area(&vertices[f[0]], &vertices[f[1]], &vertices[f[2]]);
            if area < area_floor || !area.is_finite() {
                return Err(MeshError::DegenerateFace { face: fi, area });
            }
        }

        // BTreeMap keeps the derived edge list deterministic.
        let mut edge_map: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                edge_map.entry(key).or_default().push(fi);
            }
        }

        let mut edges = Vec::with_capacity(edge_map.len());
        let mut edge_faces = Vec::with_capacity(edge_map.len());
        let mut edge_index = BTreeMap::new();
        for (&(a, b), incident) in &edge_map {
            if incident.len() > 2 {
                return Err(MeshError::NonManifold {
                    v0: a,
                    v1: b,
                    count: incident.len(),
                });
            }
            edge_index.insert((a, b), edges.len());
            edges.push([a, b]);
            edge_faces.push(EdgeFaces {
                f0: incident[0],
                f1: incident.get(1).copied(),
            });
        }

        let mut vertex_faces = vec![Vec::new(); nv];
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                vertex_faces[v].push(fi);
            }
        }

        let mut vertex_neighbors = vec![Vec::new(); nv];
        let mut boundary_vertex = vec![false; nv];
        for (e, &[a, b]) in edges.iter().enumerate() {
            vertex_neighbors[a].push(b);
            vertex_neighbors[b].push(a);
            if edge_faces[e].f1.is_none() {
                boundary_vertex[a] = true;
                boundary_vertex[b] = true;
            }
        }
        for nbrs in &mut vertex_neighbors {
            nbrs.sort_unstable();
        }

        Ok(Self {
            vertices,
            faces,
            edges,
            edge_faces,
            edge_index,
            vertex_faces,
            vertex_neighbors,
            boundary_vertex,
            bbox_diagonal,
        })
    }

    /// Same connectivity, new vertex positions. Used by perturbations,
    /// which leave |V|, |E|, |F| untouched by contract. Positions are
    /// taken verbatim; no degeneracy re-check.
    pub fn with_positions(&self, vertices: Vec<Vec3>) -> Self {
        assert_eq!(vertices.len(), self.vertices.len());
        let bbox_diagonal = bbox_diagonal(&vertices);
        Self {
            vertices,
            bbox_diagonal,
            ..self.clone()
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn edge_faces(&self) -> &[EdgeFaces] {
        &self.edge_faces
    }

    /// Index of the canonical edge between `a` and `b`, if present.
    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        &self.vertex_faces[v]
    }

    /// Sorted 1-ring vertex neighborhood.
    pub fn vertex_neighbors(&self, v: usize) -> &[usize] {
        &self.vertex_neighbors[v]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    /// True when every edge has two incident faces.
    pub fn is_closed(&self) -> bool {
        self.edge_faces.iter().all(|ef| ef.f1.is_some())
    }

    pub fn bbox_diagonal(&self) -> f64 {
        self.bbox_diagonal
    }

    pub fn check_vertex(&self, v: usize) -> Result<(), MeshError> {
        if v < self.vertices.len() {
            Ok(())
        } else {
            Err(MeshError::InvalidVertex {
                vertex: v,
                count: self.vertices.len(),
            })
        }
    }

    pub fn total_area(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| triangle_area(&self.vertices[f[0]], &self.vertices[f[1]], &self.vertices[f[2]]))
            .sum()
    }

    /// Mean length over all edges.
    pub fn mean_edge_length(&self) -> f64 {
        if self.edges.is_empty() {
            return 0.0;
        }
        let total: f64 = self
            .edges
            .iter()
            .map(|&[a, b]| (self.vertices[a] - self.vertices[b]).norm())
            .sum();
        total / self.edges.len() as f64
    }

    /// Rescale about the origin so the bounding-box diagonal is 1.
    pub fn normalized_to_unit_diagonal(&self) -> Self {
        let d = self.bbox_diagonal;
        if d <= 0.0 {
            return self.clone();
        }
        let scaled = self.vertices.iter().map(|p| p / d).collect();
        self.with_positions(scaled)
    }
}

/// Per-face area, corner cotangents, and local edge vectors.
///
/// `corner_cotangents[k]` is the cotangent of the interior angle at
/// face vertex `k`; `edge_vectors` are `v1 - v0` and `v2 - v0`.
#[derive(Debug, Clone)]
pub struct FaceGeometry {
    pub area: f64,
    pub corner_cotangents: [f64; 3],
    pub edge_vectors: [Vec3; 2],
}

impl FaceGeometry {
    /// Unit normal of the face plane (right-hand rule over the CCW loop).
    pub fn unit_normal(&self) -> Vec3 {
        let n = self.edge_vectors[0].cross(&self.edge_vectors[1]);
        n / n.norm()
    }
}

/// Compute area, cotangents, and local frame for every face.
pub fn compute_face_geometry(mesh: &TriangleMesh) -> Result<Vec<FaceGeometry>, MeshError> {
    let area_floor = DEGENERACY_THRESHOLD * mesh.bbox_diagonal() * mesh.bbox_diagonal();
    let verts = mesh.vertices();
    mesh.faces()
        .iter()
        .enumerate()
        .map(|(fi, f)| {
            let p = [verts[f[0]], verts[f[1]], verts[f[2]]];
            let area = triangle_area(&p[0], &p[1], &p[2]);
            if area < area_floor || !area.is_finite() {
                return Err(MeshError::DegenerateFace { face: fi, area });
            }
            let mut cot = [0.0; 3];
            for k in 0..3 {
                let u = p[(k + 1) % 3] - p[k];
                let v = p[(k + 2) % 3] - p[k];
                cot[k] = u.dot(&v) / u.cross(&v).norm();
            }
            Ok(FaceGeometry {
                area,
                corner_cotangents: cot,
                edge_vectors: [p[1] - p[0], p[2] - p[0]],
            })
        })
        .collect()
}

/// Median length of the edges incident on `v`; even counts use the mean
/// of the two middle values.
pub fn median_incident_edge_length(mesh: &TriangleMesh, v: usize) -> Result<f64, MeshError> {
    mesh.check_vertex(v)?;
    let nbrs = mesh.vertex_neighbors(v);
    if nbrs.is_empty() {
        return Err(MeshError::IsolatedVertex { vertex: v });
    }
    let mut lengths: Vec<f64> = nbrs
        .iter()
        .map(|&u| (mesh.vertices()[u] - mesh.vertices()[v]).norm())
        .collect();
    lengths.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = lengths.len();
    Ok(if n % 2 == 1 {
        lengths[n / 2]
    } else {
        0.5 * (lengths[n / 2 - 1] + lengths[n / 2])
    })
}

pub fn triangle_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

fn bbox_diagonal(vertices: &[Vec3]) -> f64 {
    if vertices.is_empty() {
        return 0.0;
    }
    let mut lo = vertices[0];
    let mut hi = vertices[0];
    for p in vertices {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (hi - lo).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn single_triangle() -> TriangleMesh {
        TriangleMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn smallest_valid_mesh() {
        let m = single_triangle();
        assert_eq!(m.vertex_count(), 3);
        assert_eq!(m.face_count(), 1);
        assert_eq!(m.edge_count(), 3);
        assert!(!m.is_closed());
    }

    #[test]
    fn non_manifold_edge_rejected() {
        // Edge (0,1) shared by three faces.
        let r = TriangleMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
                Vec3::new(0.0, -1.0, 0.0),
                Vec3::new(0.0, 0.0, 1.0),
            ],
            vec![[0, 1, 2], [0, 1, 3], [0, 1, 4]],
        );
        assert!(matches!(r, Err(MeshError::NonManifold { count: 3, .. })));
    }

    #[test]
    fn degenerate_face_rejected() {
        let r = TriangleMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(2.0, 0.0, 0.0),
            ],
            vec![[0, 1, 2]],
        );
        assert!(matches!(r, Err(MeshError::DegenerateFace { .. })));
    }

    #[test]
    fn repeated_vertex_rejected() {
        let r = TriangleMesh::new(
            vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)],
            vec![[0, 1, 1]],
        );
        assert!(matches!(r, Err(MeshError::InvalidFace { .. })));
    }

    #[test]
    fn right_triangle_geometry() {
        let m = single_triangle();
        let g = compute_face_geometry(&m).unwrap();
        assert_relative_eq!(g[0].area, 0.5, max_relative = 1e-12);
        // Right angle at corner 0 (cot 90 = 0), 45 degrees at the others.
        assert_relative_eq!(g[0].corner_cotangents[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(g[0].corner_cotangents[1], 1.0, max_relative = 1e-12);
        assert_relative_eq!(g[0].corner_cotangents[2], 1.0, max_relative = 1e-12);
    }

    #[test]
    fn equilateral_geometry() {
        let m = TriangleMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.5, 3f64.sqrt() / 2.0, 0.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let g = compute_face_geometry(&m).unwrap();
        assert_relative_eq!(g[0].area, 3f64.sqrt() / 4.0, max_relative = 1e-12);
        for k in 0..3 {
            assert_relative_eq!(g[0].corner_cotangents[k], 1.0 / 3f64.sqrt(), max_relative = 1e-12);
        }
    }

    #[test]
    fn angle_sum_is_pi() {
        let m = crate::shapes::icosphere(1.0, 2);
        let g = compute_face_geometry(&m).unwrap();
        for fg in &g {
            let sum: f64 = fg
                .corner_cotangents
                .iter()
                .map(|&c| (1.0 / c).atan())
                .map(|a| if a < 0.0 { a + std::f64::consts::PI } else { a })
                .sum();
            assert_relative_eq!(sum, std::f64::consts::PI, epsilon = 1e-9);
        }
    }

    #[test]
    fn median_edge_length_conventions() {
        // Vertex 0 with neighbors at distances 1, 2, 3.
        let m = TriangleMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 2.0, 0.0),
                Vec3::new(0.0, 0.0, 3.0),
            ],
            vec![[0, 1, 2], [0, 2, 3], [0, 3, 1]],
        )
        .unwrap();
        assert_relative_eq!(median_incident_edge_length(&m, 0).unwrap(), 2.0);

        // Even count: distances 1, 2, 3, 4 -> 2.5.
        let m = TriangleMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 2.0, 0.0),
                Vec3::new(-3.0, 0.0, 0.0),
                Vec3::new(0.0, -4.0, 0.0),
            ],
            vec![[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 1]],
        )
        .unwrap();
        assert_relative_eq!(median_incident_edge_length(&m, 0).unwrap(), 2.5);
    }

    #[test]
    fn median_edge_length_constant_case() {
        let m = crate::shapes::icosphere(2.0, 0);
        // Icosahedron: all edges the same length.
        let l = (m.vertices()[m.edges()[0][0]] - m.vertices()[m.edges()[0][1]]).norm();
        for v in 0..m.vertex_count() {
            assert_relative_eq!(median_incident_edge_length(&m, v).unwrap(), l, max_relative = 1e-12);
        }
    }

    #[test]
    fn euler_characteristic_closed_meshes() {
        let sphere = crate::shapes::icosphere(1.0, 3);
        let chi = sphere.vertex_count() as i64 - sphere.edge_count() as i64
            + sphere.face_count() as i64;
        assert_eq!(chi, 2); // genus 0
        assert!(sphere.is_closed());

        let torus = crate::shapes::torus(1.0, 0.35, 24, 12);
        let chi = torus.vertex_count() as i64 - torus.edge_count() as i64
            + torus.face_count() as i64;
        assert_eq!(chi, 0); // genus 1
        assert!(torus.is_closed());
    }

    #[test]
    fn area_invariant_under_reindexing() {
        let m = crate::shapes::icosphere(1.0, 2);
        let n = m.vertex_count();
        // Reverse the vertex order.
        let perm: Vec<usize> = (0..n).rev().collect();
        let verts: Vec<Vec3> = perm.iter().map(|&old| m.vertices()[old]).collect();
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let faces: Vec<[usize; 3]> = m
            .faces()
            .iter()
            .map(|f| [inv[f[0]], inv[f[1]], inv[f[2]]])
            .collect();
        let re = TriangleMesh::new(verts, faces).unwrap();
        assert_relative_eq!(re.total_area(), m.total_area(), max_relative = 1e-12);
    }
}
