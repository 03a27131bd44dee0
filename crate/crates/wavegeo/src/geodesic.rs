//! From pseudo-distance to geodesic distance: per-face gradients of the
//! vertex data, normalization to unit length, a divergence (edge-based
//! or face-based), and one Poisson solve against the cotangent
//! Laplacian, followed by the shift that puts the minimum at zero.

use serde::Serialize;
use thiserror::Error;

use crate::fem::{self, DifferentialOperators, FemError, FemOperators};
use crate::linalg::{CholeskyFactor, LinAlgError, SparseSymMatrix};
use crate::mesh::{compute_face_geometry, FaceGeometry, MeshError, TriangleMesh, Vec3};
use crate::wave::{self, EpsilonSchedule, WaveConfig, WaveError};

#[derive(Debug, Error)]
pub enum GeodesicError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
    #[error(transparent)]
    Wave(#[from] WaveError),
    #[error("singular gradient system on face {face} (degenerate geometry)")]
    SingularK { face: usize },
}

/// Which divergence feeds the Poisson right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DivergenceBackend {
    /// Mean of the two incident face gradients projected on each edge.
    Edge,
    /// Per-face gradients tested against hat-function gradients.
    Face,
}

impl std::fmt::Display for DivergenceBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DivergenceBackend::Edge => write!(f, "edge"),
            DivergenceBackend::Face => write!(f, "face"),
        }
    }
}

/// Per-face gradient vectors with their local-frame coefficients.
#[derive(Debug, Clone)]
pub struct FaceGradientField {
    /// Gradient per face, in world coordinates (lies in the face plane).
    pub vectors: Vec<Vec3>,
    /// Coefficients (p, q) of the gradient over the local edge frame.
    pub coeffs: Vec<[f64; 2]>,
    /// Faces whose raw gradient was zero; they carry a zero vector.
    pub flagged: Vec<bool>,
    /// Whether `vectors` have been scaled to unit length.
    pub normalized: bool,
}

/// Raw gradient of the linear interpolant of (d0, d1, d2) on one face:
/// solve the 2x2 Gram system K (p, q)' = (d1 - d0, d2 - d0)'.
pub fn face_gradient_raw(geometry: &FaceGeometry, d0: f64, d1: f64, d2: f64) -> Vec3 {
    let e1 = geometry.edge_vectors[0];
    let e2 = geometry.edge_vectors[1];
    let k11 = e1.dot(&e1);
    let k12 = e1.dot(&e2);
    let k22 = e2.dot(&e2);
    let det = k11 * k22 - k12 * k12;
    let r1 = d1 - d0;
    let r2 = d2 - d0;
    let p = (k22 * r1 - k12 * r2) / det;
    let q = (k11 * r2 - k12 * r1) / det;
    e1 * p + e2 * q
}

/// Per-face normalized gradients of per-vertex data `d`. Faces where the
/// data is constant get a zero vector and a flag instead of a NaN.
pub fn face_gradients(
    mesh: &TriangleMesh,
    geometry: &[FaceGeometry],
    d: &[f64],
) -> Result<FaceGradientField, GeodesicError> {
    assert_eq!(d.len(), mesh.vertex_count());
    let nf = mesh.face_count();
    let mut vectors = Vec::with_capacity(nf);
    let mut coeffs = Vec::with_capacity(nf);
    let mut flagged = vec![false; nf];

    for (fi, (f, g)) in mesh.faces().iter().zip(geometry).enumerate() {
        let e1 = g.edge_vectors[0];
        let e2 = g.edge_vectors[1];
        let k11 = e1.dot(&e1);
        let k12 = e1.dot(&e2);
        let k22 = e2.dot(&e2);
        let det = k11 * k22 - k12 * k12;
        // det = (2 area)^2; the mesh degeneracy floor keeps it positive.
        if det <= 0.0 || !det.is_finite() {
            return Err(GeodesicError::SingularK { face: fi });
        }
        let r1 = d[f[1]] - d[f[0]];
        let r2 = d[f[2]] - d[f[0]];
        let mut p = (k22 * r1 - k12 * r2) / det;
        let mut q = (k11 * r2 - k12 * r1) / det;
        let w = e1 * p + e2 * q;
        let len = w.norm();
        if len == 0.0 {
            flagged[fi] = true;
            vectors.push(Vec3::zeros());
            coeffs.push([0.0, 0.0]);
        } else {
            p /= len;
            q /= len;
            vectors.push(w / len);
            coeffs.push([p, q]);
        }
    }

    Ok(FaceGradientField {
        vectors,
        coeffs,
        flagged,
        normalized: true,
    })
}

/// Per-edge scalar field: the mean incident-face gradient projected on
/// the edge vector, oriented from the smaller to the larger vertex id.
#[derive(Debug, Clone)]
pub struct EdgeDivergenceField {
    pub values: Vec<f64>,
}

impl EdgeDivergenceField {
    /// Value for the edge traversed from `from` to `to`; flipping the
    /// orientation flips the sign.
    pub fn oriented_value(&self, mesh: &TriangleMesh, from: usize, to: usize) -> Option<f64> {
        let e = mesh.edge_between(from, to)?;
        let v = self.values[e];
        Some(if mesh.edges()[e][0] == from { v } else { -v })
    }
}

/// Project face gradients onto edges (mean of the one or two incident
/// faces).
pub fn edge_divergence(mesh: &TriangleMesh, grads: &FaceGradientField) -> EdgeDivergenceField {
    let values = mesh
        .edges()
        .iter()
        .zip(mesh.edge_faces())
        .map(|(&[a, b], ef)| {
            let mean = match ef.f1 {
                Some(f1) => (grads.vectors[ef.f0] + grads.vectors[f1]) * 0.5,
                None => grads.vectors[ef.f0],
            };
            (mesh.vertices()[b] - mesh.vertices()[a]).dot(&mean)
        })
        .collect();
    EdgeDivergenceField { values }
}

/// Gradient of the hat function of `corner` restricted to the face.
fn hat_gradient(geometry: &FaceGeometry, corner: usize) -> Vec3 {
    let e1 = geometry.edge_vectors[0];
    let e2 = geometry.edge_vectors[1];
    let opposite = match corner {
        0 => e2 - e1,
        1 => -e2,
        _ => e1,
    };
    let normal = e1.cross(&e2); // length 2 * area
    let two_area = normal.norm();
    normal.cross(&opposite) / (two_area * two_area)
}

/// Per-vertex divergence of a face field: Div_i = -sum over incident
/// faces of <grad h_i, G_f> |f|, the negative adjoint of the
/// piecewise-linear gradient. For G = grad(d) this reproduces -S d.
pub fn face_divergence(
    mesh: &TriangleMesh,
    geometry: &[FaceGeometry],
    grads: &FaceGradientField,
) -> Vec<f64> {
    let mut out = vec![0.0; mesh.vertex_count()];
    for (f, (g, grad)) in mesh.faces().iter().zip(geometry.iter().zip(&grads.vectors)) {
        for corner in 0..3 {
            out[f[corner]] -= hat_gradient(g, corner).dot(grad) * g.area;
        }
    }
    out
}

/// Per-vertex geodesic distance approximation, shifted so the minimum
/// is exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    pub values: Vec<f64>,
    pub source: usize,
}

impl DistanceField {
    /// Shift values so min = 0 exactly.
    pub fn from_unshifted(mut values: Vec<f64>, source: usize) -> Self {
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        for v in &mut values {
            *v -= min;
        }
        Self { values, source }
    }

    pub fn argmin(&self) -> usize {
        self.values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0)
    }
}

/// Reusable Poisson stage: the pinned Laplacian is factored once and
/// shared across queries on the same mesh.
pub struct PoissonSolver {
    factor: CholeskyFactor,
    pin: usize,
    closed: bool,
    n: usize,
}

/// Relative right-hand-side imbalance beyond which the compatibility
/// projection kicks in on closed meshes.
const RHS_IMBALANCE_TOLERANCE: f64 = 1e-8;

impl PoissonSolver {
    pub fn new(
        laplacian: &SparseSymMatrix,
        pin: usize,
        closed: bool,
    ) -> Result<Self, GeodesicError> {
        let pinned = laplacian.with_pinned_index(pin);
        let factor = pinned.factorize()?;
        Ok(Self {
            factor,
            pin,
            closed,
            n: laplacian.dim(),
        })
    }

    /// Solve L w = rhs with the pinned vertex at zero, then min-shift.
    pub fn solve(&self, rhs: &[f64], source: usize) -> Result<DistanceField, GeodesicError> {
        if rhs.len() != self.n {
            return Err(GeodesicError::LinAlg(LinAlgError::DimensionMismatch {
                expected: self.n,
                got: rhs.len(),
            }));
        }
        let mut rhs = rhs.to_vec();
        if self.closed {
            // On a closed mesh the range of L is mean-free; project the
            // data instead of letting the pin absorb the imbalance.
            let sum: f64 = rhs.iter().sum();
            let norm: f64 = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
            if sum.abs() > RHS_IMBALANCE_TOLERANCE * norm {
                let mean = sum / self.n as f64;
                for v in &mut rhs {
                    *v -= mean;
                }
            }
        }
        rhs[self.pin] = 0.0;
        let w = self.factor.solve(&rhs)?;
        Ok(DistanceField::from_unshifted(w, source))
    }
}

/// One-shot Poisson solve; pipelines keep a `PoissonSolver` around
/// instead so the factorization is reused.
pub fn solve_poisson(
    laplacian: &SparseSymMatrix,
    closed: bool,
    rhs: &[f64],
    pin: usize,
    source: usize,
) -> Result<DistanceField, GeodesicError> {
    PoissonSolver::new(laplacian, pin, closed)?.solve(rhs, source)
}

/// The gradient -> divergence -> Poisson stages shared by every
/// pipeline that integrates a pseudo-distance into distances.
pub struct GradientIntegrator<'m> {
    mesh: &'m TriangleMesh,
    pub geometry: Vec<FaceGeometry>,
    pub diff: DifferentialOperators,
    poisson: PoissonSolver,
}

impl<'m> GradientIntegrator<'m> {
    pub fn new(mesh: &'m TriangleMesh) -> Result<Self, GeodesicError> {
        let geometry = compute_face_geometry(mesh)?;
        let diff = fem::differential_operators(mesh, &geometry)?;
        Self::from_parts(mesh, geometry, diff)
    }

    pub fn from_parts(
        mesh: &'m TriangleMesh,
        geometry: Vec<FaceGeometry>,
        diff: DifferentialOperators,
    ) -> Result<Self, GeodesicError> {
        let poisson = PoissonSolver::new(&diff.laplacian, 0, mesh.is_closed())?;
        Ok(Self {
            mesh,
            geometry,
            diff,
            poisson,
        })
    }

    /// Integrate the normalized gradient of `d` into a distance field.
    pub fn integrate(
        &self,
        d: &[f64],
        source: usize,
        backend: DivergenceBackend,
    ) -> Result<DistanceField, GeodesicError> {
        let grads = face_gradients(self.mesh, &self.geometry, d)?;
        let rhs = match backend {
            DivergenceBackend::Edge => {
                let edge_field = edge_divergence(self.mesh, &grads);
                self.diff.apply_d_transpose_lambda(&edge_field.values)
            }
            DivergenceBackend::Face => {
                // L w = -Div matches the sign of the PSD Laplacian.
                face_divergence(self.mesh, &self.geometry, &grads)
                    .into_iter()
                    .map(|v| -v)
                    .collect()
            }
        };
        self.poisson.solve(&rhs, source)
    }
}

/// Diagnostics of a full pipeline run.
#[derive(Debug, Clone, Serialize)]
pub struct RunDiagnostics {
    pub iterations: usize,
    pub coverage: f64,
    pub incomplete_coverage: bool,
    pub epsilon_c: f64,
    pub epsilon_exponent: f64,
    pub divergence_backend: DivergenceBackend,
    pub timings: StageTimings,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct StageTimings {
    pub assembly_s: f64,
    pub factorization_s: f64,
    pub propagation_s: f64,
    pub poisson_s: f64,
}

/// A distance field together with how it was produced.
#[derive(Debug, Clone)]
pub struct GeodesicRun {
    pub distances: DistanceField,
    pub diagnostics: RunDiagnostics,
    pub trace: Vec<wave::TraceSample>,
}

/// The full pipeline: operators, threshold calibration, propagation,
/// gradient integration. Incomplete coverage is tolerated (the filled
/// field is integrated) and surfaced through the diagnostics.
pub fn wave_geodesics(
    mesh: &TriangleMesh,
    source: usize,
    config: &WaveConfig,
    backend: DivergenceBackend,
) -> Result<GeodesicRun, GeodesicError> {
    config.validate()?;
    mesh.check_vertex(source)?;
    let mut timings = StageTimings::default();

    let t = std::time::Instant::now();
    let geometry = compute_face_geometry(mesh)?;
    let fem_ops = FemOperators::build(mesh, &geometry)?;
    let diff = fem::differential_operators(mesh, &geometry)?;
    let system = wave::wave_system(&fem_ops, config)?;
    timings.assembly_s = t.elapsed().as_secs_f64();

    let t = std::time::Instant::now();
    let factor = system.factorize()?;
    let integrator = GradientIntegrator::from_parts(mesh, geometry, diff)?;
    timings.factorization_s = t.elapsed().as_secs_f64();

    let t = std::time::Instant::now();
    let schedule = wave::calibrate_epsilon(mesh, &fem_ops, &factor, source, config)?;
    let (propagation, incomplete) =
        match wave::propagate(mesh, &fem_ops, &factor, source, config, &schedule) {
            Ok(p) => (p, false),
            Err(WaveError::IncompleteCoverage { propagation, .. }) => (*propagation, true),
            Err(e) => return Err(e.into()),
        };
    timings.propagation_s = t.elapsed().as_secs_f64();

    let t = std::time::Instant::now();
    let distances = integrator.integrate(&propagation.field.time, source, backend)?;
    timings.poisson_s = t.elapsed().as_secs_f64();

    Ok(GeodesicRun {
        distances,
        diagnostics: RunDiagnostics {
            iterations: propagation.iterations,
            coverage: propagation.field.coverage,
            incomplete_coverage: incomplete,
            epsilon_c: schedule.c,
            epsilon_exponent: schedule.a,
            divergence_backend: backend,
            timings,
        },
        trace: propagation.trace,
    })
}

/// Pipeline entry that reuses an existing schedule (delta sweeps).
pub fn wave_geodesics_with_schedule(
    mesh: &TriangleMesh,
    source: usize,
    config: &WaveConfig,
    schedule: &EpsilonSchedule,
    backend: DivergenceBackend,
) -> Result<GeodesicRun, GeodesicError> {
    config.validate()?;
    let geometry = compute_face_geometry(mesh)?;
    let fem_ops = FemOperators::build(mesh, &geometry)?;
    let diff = fem::differential_operators(mesh, &geometry)?;
    let factor = wave::wave_system(&fem_ops, config)?.factorize()?;
    let integrator = GradientIntegrator::from_parts(mesh, geometry, diff)?;
    let (propagation, incomplete) =
        match wave::propagate(mesh, &fem_ops, &factor, source, config, schedule) {
            Ok(p) => (p, false),
            Err(WaveError::IncompleteCoverage { propagation, .. }) => (*propagation, true),
            Err(e) => return Err(e.into()),
        };
    let distances = integrator.integrate(&propagation.field.time, source, backend)?;
    Ok(GeodesicRun {
        distances,
        diagnostics: RunDiagnostics {
            iterations: propagation.iterations,
            coverage: propagation.field.coverage,
            incomplete_coverage: incomplete,
            epsilon_c: schedule.c,
            epsilon_exponent: schedule.a,
            divergence_backend: backend,
            timings: StageTimings::default(),
        },
        trace: propagation.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::TriangleMesh;
    use crate::shapes;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn planar_triangle(rng: &mut StdRng) -> TriangleMesh {
        loop {
            let mut pts = Vec::new();
            for _ in 0..3 {
                pts.push(Vec3::new(
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                    0.0,
                ));
            }
            if crate::mesh::triangle_area(&pts[0], &pts[1], &pts[2]) > 1e-3 {
                if let Ok(m) = TriangleMesh::new(pts, vec![[0, 1, 2]]) {
                    return m;
                }
            }
        }
    }

    #[test]
    fn axis_aligned_linear_field() {
        let mesh = TriangleMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let geom = crate::mesh::compute_face_geometry(&mesh).unwrap();
        let raw = face_gradient_raw(&geom[0], 0.0, 1.0, 0.0);
        assert_relative_eq!(raw.x, 1.0, epsilon = 1e-12);
        assert_relative_eq!(raw.y, 0.0, epsilon = 1e-12);
        let field = face_gradients(&mesh, &geom, &[0.0, 1.0, 0.0]).unwrap();
        assert_relative_eq!(field.vectors[0].x, 1.0, epsilon = 1e-12);
        assert!(!field.flagged[0]);
    }

    #[test]
    fn constant_data_is_flagged() {
        let mesh = shapes::grid(3, 3, 1.0, 1.0);
        let geom = crate::mesh::compute_face_geometry(&mesh).unwrap();
        let field = face_gradients(&mesh, &geom, &vec![2.0; mesh.vertex_count()]).unwrap();
        assert!(field.flagged.iter().all(|&f| f));
        assert!(field.vectors.iter().all(|v| v.norm() == 0.0));
    }

    /// Linear reproduction: data sampled from 3x - 2y gives the exact
    /// gradient on any planar triangle.
    #[test]
    fn linear_reproduction_oracle() {
        let mut rng = StdRng::seed_from_u64(21);
        for _ in 0..100 {
            let mesh = planar_triangle(&mut rng);
            let geom = crate::mesh::compute_face_geometry(&mesh).unwrap();
            let d: Vec<f64> = mesh.vertices().iter().map(|p| 3.0 * p.x - 2.0 * p.y).collect();
            let raw = face_gradient_raw(&geom[0], d[0], d[1], d[2]);
            assert_relative_eq!(raw.x, 3.0, epsilon = 1e-9);
            assert_relative_eq!(raw.y, -2.0, epsilon = 1e-9);
            assert_relative_eq!(raw.z, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn gradient_satisfies_edge_constraints() {
        let mut rng = StdRng::seed_from_u64(22);
        for _ in 0..50 {
            let mesh = planar_triangle(&mut rng);
            let geom = crate::mesh::compute_face_geometry(&mesh).unwrap();
            let d: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let raw = face_gradient_raw(&geom[0], d[0], d[1], d[2]);
            assert_relative_eq!(raw.dot(&geom[0].edge_vectors[0]), d[1] - d[0], epsilon = 1e-9);
            assert_relative_eq!(raw.dot(&geom[0].edge_vectors[1]), d[2] - d[0], epsilon = 1e-9);
        }
    }

    #[test]
    fn normalized_gradients_have_unit_length() {
        let mesh = shapes::icosphere(1.0, 2);
        let geom = crate::mesh::compute_face_geometry(&mesh).unwrap();
        let d: Vec<f64> = mesh.vertices().iter().map(|p| p.x + 0.3 * p.y * p.z).collect();
        let field = face_gradients(&mesh, &geom, &d).unwrap();
        for (v, &flag) in field.vectors.iter().zip(&field.flagged) {
            if !flag {
                assert_relative_eq!(v.norm(), 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn edge_divergence_of_shared_gradient() {
        // Two coplanar triangles sharing edge (0, 1); both carry the
        // same gradient, so the mean projection is just <e, g>.
        let mesh = TriangleMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.5, 1.0, 0.0),
                Vec3::new(0.5, -1.0, 0.0),
            ],
            vec![[0, 1, 2], [0, 3, 1]],
        )
        .unwrap();
        let geom = crate::mesh::compute_face_geometry(&mesh).unwrap();
        // d = x restricted to vertices: gradient (1, 0, 0) on both faces.
        let d: Vec<f64> = mesh.vertices().iter().map(|p| p.x).collect();
        let field = face_gradients(&mesh, &geom, &d).unwrap();
        let div = edge_divergence(&mesh, &field);
        let e01 = mesh.edge_between(0, 1).unwrap();
        assert_relative_eq!(div.values[e01], 1.0, epsilon = 1e-12);

        // Antisymmetry under orientation flip.
        assert_relative_eq!(
            div.oriented_value(&mesh, 0, 1).unwrap(),
            -div.oriented_value(&mesh, 1, 0).unwrap(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn opposite_gradients_cancel_on_shared_edge() {
        let mesh = TriangleMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.5, 1.0, 0.0),
                Vec3::new(0.5, -1.0, 0.0),
            ],
            vec![[0, 1, 2], [0, 3, 1]],
        )
        .unwrap();
        let grads = FaceGradientField {
            vectors: vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(-1.0, 0.0, 0.0)],
            coeffs: vec![[0.0, 0.0]; 2],
            flagged: vec![false; 2],
            normalized: true,
        };
        let div = edge_divergence(&mesh, &grads);
        let e01 = mesh.edge_between(0, 1).unwrap();
        assert_relative_eq!(div.values[e01], 0.0, epsilon = 1e-15);
    }

    /// Hand-computed single-triangle face divergence: hat gradients of
    /// the right triangle are (-1,-1), (1,0), (0,1); with G = (1, 0)
    /// and area 1/2 the entries are -<grad h_i, G> |f| = (1/2, -1/2, 0).
    #[test]
    fn face_divergence_hand_computed() {
        let mesh = TriangleMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let geom = crate::mesh::compute_face_geometry(&mesh).unwrap();
        let grads = FaceGradientField {
            vectors: vec![Vec3::new(1.0, 0.0, 0.0)],
            coeffs: vec![[1.0, 0.0]],
            flagged: vec![false],
            normalized: true,
        };
        let div = face_divergence(&mesh, &geom, &grads);
        assert_relative_eq!(div[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(div[1], -0.5, epsilon = 1e-12);
        assert_relative_eq!(div[2], 0.0, epsilon = 1e-12);
    }

    /// Hat gradients per face sum to zero, so the total divergence of
    /// any face field vanishes on a closed mesh.
    #[test]
    fn face_divergence_sums_to_zero_on_closed_mesh() {
        let mesh = shapes::icosphere(1.0, 2);
        let geom = crate::mesh::compute_face_geometry(&mesh).unwrap();
        let d: Vec<f64> = mesh.vertices().iter().map(|p| p.x * p.y + p.z).collect();
        let field = face_gradients(&mesh, &geom, &d).unwrap();
        let div = face_divergence(&mesh, &geom, &field);
        let total: f64 = div.iter().sum();
        assert!(total.abs() < 1e-9, "total divergence {total}");
    }

    /// Stiffness-consistency oracle: for gradients arising as grad(d),
    /// the face divergence equals -S d.
    #[test]
    fn face_divergence_matches_stiffness() {
        let mut rng = StdRng::seed_from_u64(5);
        for mesh in [shapes::icosphere(1.0, 2), shapes::grid(7, 5, 1.0, 1.0)] {
            let geom = crate::mesh::compute_face_geometry(&mesh).unwrap();
            let s = crate::fem::stiffness_matrix(&mesh, &geom).unwrap();
            let d: Vec<f64> = (0..mesh.vertex_count())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            // Raw (unnormalized) gradients of d.
            let vectors: Vec<Vec3> = mesh
                .faces()
                .iter()
                .zip(&geom)
                .map(|(f, g)| face_gradient_raw(g, d[f[0]], d[f[1]], d[f[2]]))
                .collect();
            let grads = FaceGradientField {
                coeffs: vec![[0.0, 0.0]; vectors.len()],
                flagged: vec![false; vectors.len()],
                vectors,
                normalized: false,
            };
            let div = face_divergence(&mesh, &geom, &grads);
            let sd = s.matvec(&d);
            for (a, b) in div.iter().zip(&sd) {
                assert_relative_eq!(*a, -b, epsilon = 1e-9, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn poisson_zero_rhs_gives_zero_field() {
        let mesh = shapes::icosphere(1.0, 2);
        let geom = crate::mesh::compute_face_geometry(&mesh).unwrap();
        let diff = crate::fem::differential_operators(&mesh, &geom).unwrap();
        let field = solve_poisson(
            &diff.laplacian,
            mesh.is_closed(),
            &vec![0.0; mesh.vertex_count()],
            0,
            0,
        )
        .unwrap();
        assert!(field.values.iter().all(|&v| v == 0.0));
    }

    /// Manufactured Poisson solution: rhs = L u recovers u - min(u).
    #[test]
    fn poisson_manufactured_solution() {
        let mesh = shapes::icosphere(1.0, 2);
        let geom = crate::mesh::compute_face_geometry(&mesh).unwrap();
        let diff = crate::fem::differential_operators(&mesh, &geom).unwrap();
        let u: Vec<f64> = mesh.vertices().iter().map(|p| p.x + 0.5 * p.y).collect();
        let rhs = diff.laplacian.matvec(&u);
        let field = solve_poisson(&diff.laplacian, mesh.is_closed(), &rhs, 0, 0).unwrap();
        let min_u = u.iter().cloned().fold(f64::INFINITY, f64::min);
        for (w, ui) in field.values.iter().zip(&u) {
            assert_relative_eq!(*w, ui - min_u, epsilon = 1e-8);
        }
    }

    /// End-to-end linear-field oracle on a flat strip. The integrator
    /// normalizes gradients, so a unit-slope field is reproduced
    /// verbatim up to the min shift.
    #[test]
    fn linear_field_reconstruction_on_strip() {
        let mesh = shapes::grid(12, 3, 2.0, 0.4);
        let integrator = GradientIntegrator::new(&mesh).unwrap();
        let d: Vec<f64> = mesh.vertices().iter().map(|p| p.x + 0.1).collect();
        for backend in [DivergenceBackend::Edge, DivergenceBackend::Face] {
            let got = integrator.integrate(&d, 0, backend).unwrap();
            let min_d = d.iter().cloned().fold(f64::INFINITY, f64::min);
            for (w, di) in got.values.iter().zip(&d) {
                assert_relative_eq!(*w, di - min_d, epsilon = 1e-8);
            }
        }
    }

    /// Arbitrary-slope linear fields are recovered when the raw
    /// gradients are fed through the divergence and Poisson stages.
    #[test]
    fn raw_gradient_reconstruction_on_strip() {
        let mesh = shapes::grid(12, 3, 2.0, 0.4);
        let geom = crate::mesh::compute_face_geometry(&mesh).unwrap();
        let diff = crate::fem::differential_operators(&mesh, &geom).unwrap();
        let d: Vec<f64> = mesh.vertices().iter().map(|p| 0.75 * p.x - 0.2 * p.y).collect();
        let vectors: Vec<Vec3> = mesh
            .faces()
            .iter()
            .zip(&geom)
            .map(|(f, g)| face_gradient_raw(g, d[f[0]], d[f[1]], d[f[2]]))
            .collect();
        let grads = FaceGradientField {
            coeffs: vec![[0.0, 0.0]; vectors.len()],
            flagged: vec![false; vectors.len()],
            vectors,
            normalized: false,
        };
        let min_d = d.iter().cloned().fold(f64::INFINITY, f64::min);

        let edge_field = edge_divergence(&mesh, &grads);
        let rhs = diff.apply_d_transpose_lambda(&edge_field.values);
        let got = solve_poisson(&diff.laplacian, mesh.is_closed(), &rhs, 0, 0).unwrap();
        for (w, di) in got.values.iter().zip(&d) {
            assert_relative_eq!(*w, di - min_d, epsilon = 1e-8);
        }

        let rhs: Vec<f64> = face_divergence(&mesh, &geom, &grads)
            .into_iter()
            .map(|v| -v)
            .collect();
        let got = solve_poisson(&diff.laplacian, mesh.is_closed(), &rhs, 0, 0).unwrap();
        for (w, di) in got.values.iter().zip(&d) {
            assert_relative_eq!(*w, di - min_d, epsilon = 1e-8);
        }
    }

    #[test]
    fn shared_stages_are_deterministic() {
        let mesh = shapes::icosphere(1.0, 2);
        let integrator = GradientIntegrator::new(&mesh).unwrap();
        let d: Vec<f64> = mesh.vertices().iter().map(|p| (p.x + 1.1).sqrt()).collect();
        let a = integrator.integrate(&d, 0, DivergenceBackend::Edge).unwrap();
        let b = integrator.integrate(&d, 0, DivergenceBackend::Edge).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn min_shift_puts_minimum_at_zero() {
        let f = DistanceField::from_unshifted(vec![3.0, 1.5, 9.0], 1);
        assert_eq!(f.values[1], 0.0);
        assert_eq!(f.argmin(), 1);
    }
}
