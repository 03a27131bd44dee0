//! Discrete operators on the hat-function basis: Galerkin mass M,
//! cotangent stiffness S, and the incidence/edge-weight factorization
//! L = D' Lambda D of the same Laplacian.
//!
//! Sign convention: S and L are assembled positive semidefinite
//! (S[i][j] = -(cot a + cot b)/2 off the diagonal, diagonal = row-sum
//! negated), so that time-stepping and Poisson systems built from them
//! are positive definite once the constant mode is handled.

use crate::linalg::{LinAlgError, SparseSymMatrix, TripletLayout};
use crate::mesh::{FaceGeometry, MeshError, TriangleMesh};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FemError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}

/// Mass and stiffness operators over the vertex basis.
#[derive(Debug, Clone)]
pub struct FemOperators {
    /// Galerkin mass: area/6 on element diagonals, area/12 off-diagonal.
    pub mass: SparseSymMatrix,
    /// Cotangent stiffness, positive semidefinite with S 1 = 0.
    pub stiffness: SparseSymMatrix,
    /// Barycentric lumped mass (one third of incident face area).
    pub lumped_mass: Vec<f64>,
}

impl FemOperators {
    pub fn build(mesh: &TriangleMesh, geometry: &[FaceGeometry]) -> Result<Self, FemError> {
        Ok(Self {
            mass: mass_matrix(mesh, geometry)?,
            stiffness: stiffness_matrix(mesh, geometry)?,
            lumped_mass: lumped_mass(mesh, geometry),
        })
    }
}

/// Galerkin (consistent) mass matrix from linear hat functions.
pub fn mass_matrix(
    mesh: &TriangleMesh,
    geometry: &[FaceGeometry],
) -> Result<SparseSymMatrix, FemError> {
    let mut triplets = Vec::with_capacity(mesh.face_count() * 6);
    for (f, g) in mesh.faces().iter().zip(geometry) {
        for a in 0..3 {
            triplets.push((f[a], f[a], g.area / 6.0));
            for b in 0..a {
                let (i, j) = (f[a].max(f[b]), f[a].min(f[b]));
                triplets.push((i, j, g.area / 12.0));
            }
        }
    }
    Ok(SparseSymMatrix::assemble(
        mesh.vertex_count(),
        &triplets,
        TripletLayout::LowerOnly,
    )?)
}

/// Barycentric lumped mass diagonal.
pub fn lumped_mass(mesh: &TriangleMesh, geometry: &[FaceGeometry]) -> Vec<f64> {
    let mut diag = vec![0.0; mesh.vertex_count()];
    for (f, g) in mesh.faces().iter().zip(geometry) {
        for &v in f {
            diag[v] += g.area / 3.0;
        }
    }
    diag
}

/// Cotangent stiffness matrix, PSD convention.
pub fn stiffness_matrix(
    mesh: &TriangleMesh,
    geometry: &[FaceGeometry],
) -> Result<SparseSymMatrix, FemError> {
    let mut triplets = Vec::with_capacity(mesh.face_count() * 9);
    for (f, g) in mesh.faces().iter().zip(geometry) {
        for corner in 0..3 {
            // Half-cotangent of the angle at `corner` weights the
            // opposite edge (the other two vertices).
            let w = 0.5 * g.corner_cotangents[corner];
            let a = f[(corner + 1) % 3];
            let b = f[(corner + 2) % 3];
            triplets.push((a.max(b), a.min(b), -w));
            triplets.push((a, a, w));
            triplets.push((b, b, w));
        }
    }
    Ok(SparseSymMatrix::assemble(
        mesh.vertex_count(),
        &triplets,
        TripletLayout::LowerOnly,
    )?)
}

/// Signed incidence D, diagonal edge weights Lambda, and L = D' Lambda D.
///
/// Edges are oriented from the smaller vertex index to the larger, so
/// each incidence row carries -1 at the start and +1 at the end. D is
/// kept implicit as the mesh edge list; `apply_d`/`apply_d_transpose`
/// realize the operator and its adjoint.
#[derive(Debug, Clone)]
pub struct DifferentialOperators {
    edges: Vec<[usize; 2]>,
    /// (cot a + cot b)/2 per edge; one-sided on boundary edges.
    pub lambda: Vec<f64>,
    /// D' Lambda D, entrywise equal to the cotangent stiffness.
    pub laplacian: SparseSymMatrix,
    vertex_count: usize,
}

impl DifferentialOperators {
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Edge differences: (D x)(e) = x[end] - x[start].
    pub fn apply_d(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.vertex_count);
        self.edges.iter().map(|&[a, b]| x[b] - x[a]).collect()
    }

    /// Vertex accumulation: (D' y)(v) = sum of +-y over incident edges.
    pub fn apply_d_transpose(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.edges.len());
        let mut out = vec![0.0; self.vertex_count];
        for (&[a, b], &ye) in self.edges.iter().zip(y) {
            out[a] -= ye;
            out[b] += ye;
        }
        out
    }

    /// D' Lambda y in one pass; the Poisson right-hand side for
    /// edge-based divergence data y.
    pub fn apply_d_transpose_lambda(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.edges.len());
        let mut out = vec![0.0; self.vertex_count];
        for ((&[a, b], &ye), &le) in self.edges.iter().zip(y).zip(&self.lambda) {
            out[a] -= le * ye;
            out[b] += le * ye;
        }
        out
    }
}

/// Assemble D, Lambda, and L = D' Lambda D.
pub fn differential_operators(
    mesh: &TriangleMesh,
    geometry: &[FaceGeometry],
) -> Result<DifferentialOperators, FemError> {
    let edges = mesh.edges().to_vec();
    let mut lambda = vec![0.0; edges.len()];

    // Each face contributes cot(angle opposite the edge)/2 to its three
    // edges; boundary edges end up with the single one-sided weight.
    for (f, g) in mesh.faces().iter().zip(geometry) {
        for corner in 0..3 {
            let a = f[(corner + 1) % 3];
            let b = f[(corner + 2) % 3];
            let e = mesh
                .edge_between(a, b)
                .expect("face edge present in edge list");
            lambda[e] += 0.5 * g.corner_cotangents[corner];
        }
    }

    let mut triplets = Vec::with_capacity(edges.len() * 3);
    for (&[a, b], &w) in edges.iter().zip(&lambda) {
        triplets.push((b, a, -w));
        triplets.push((a, a, w));
        triplets.push((b, b, w));
    }
    let laplacian =
        SparseSymMatrix::assemble(mesh.vertex_count(), &triplets, TripletLayout::LowerOnly)?;

    Ok(DifferentialOperators {
        edges,
        lambda,
        laplacian,
        vertex_count: mesh.vertex_count(),
    })
}
