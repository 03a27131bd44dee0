//! Reference distances and error metrics: the heat-method baseline,
//! a Dijkstra edge-graph bound, analytic oracles, and the raw/relative
//! error report used for every comparison.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;
use thiserror::Error;

use crate::fem::{FemError, FemOperators};
use crate::geodesic::{DistanceField, DivergenceBackend, GeodesicError, GradientIntegrator};
use crate::linalg::{LinAlgError, SparseSymMatrix};
use crate::mesh::{compute_face_geometry, MeshError, TriangleMesh};

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
    #[error(transparent)]
    Geodesic(#[from] GeodesicError),
    #[error("mesh is disconnected: {unreachable} vertices unreachable from vertex {from_vertex}")]
    DisconnectedMesh { from_vertex: usize, unreachable: usize },
    #[error("vertices do not lie on a common sphere (max radius deviation {deviation:.3e})")]
    NotASphere { deviation: f64 },
    #[error("distance fields use different sources ({0} vs {1})")]
    SourceMismatch(usize, usize),
}

/// Heat diffusion step: solve (M + t S) u = impulse at the source with
/// t = t_coef * (mean edge length)^2. Returns u.
pub fn heat_diffusion(
    mesh: &TriangleMesh,
    ops: &FemOperators,
    source: usize,
    t_coef: f64,
) -> Result<Vec<f64>, BaselineError> {
    mesh.check_vertex(source)?;
    let h = mesh.mean_edge_length();
    let t = t_coef * h * h;
    let system = SparseSymMatrix::linear_combination(1.0, &ops.mass, t, &ops.stiffness)?;
    let factor = system.factorize()?;
    let mut rhs = vec![0.0; mesh.vertex_count()];
    rhs[source] = 1.0;
    Ok(factor.solve(&rhs)?)
}

/// Heat-method baseline: a short-time heat solve provides the
/// pseudo-distance (negated so it grows away from the source), then the
/// same gradient/divergence/Poisson stages as the wave pipeline.
pub fn heat_geodesics(
    mesh: &TriangleMesh,
    source: usize,
    t_coef: f64,
    backend: DivergenceBackend,
) -> Result<DistanceField, BaselineError> {
    let geometry = compute_face_geometry(mesh)?;
    let ops = FemOperators::build(mesh, &geometry)?;
    let diff = crate::fem::differential_operators(mesh, &geometry)?;
    let u = heat_diffusion(mesh, &ops, source, t_coef)?;
    let d: Vec<f64> = u.iter().map(|&v| -v).collect();
    let integrator = GradientIntegrator::from_parts(mesh, geometry, diff)?;
    Ok(integrator.integrate(&d, source, backend)?)
}

/// Shortest-path distances over the edge graph with Euclidean weights;
/// an upper bound on the surface geodesic distance.
pub fn dijkstra_distances(
    mesh: &TriangleMesh,
    source: usize,
) -> Result<DistanceField, BaselineError> {
    mesh.check_vertex(source)?;
    let n = mesh.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    dist[source] = 0.0;

    #[derive(PartialEq)]
    struct Entry(f64, usize);
    impl Eq for Entry {}
    impl Ord for Entry {
        fn cmp(&self, other: &Self) -> Ordering {
            // min-heap on distance
            other.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal)
        }
    }
    impl PartialOrd for Entry {
        fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
            Some(self.cmp(other))
        }
    }

    let mut heap = BinaryHeap::new();
    heap.push(Entry(0.0, source));
    while let Some(Entry(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &u in mesh.vertex_neighbors(v) {
            let w = (mesh.vertices()[u] - mesh.vertices()[v]).norm();
            let cand = d + w;
            if cand < dist[u] {
                dist[u] = cand;
                heap.push(Entry(cand, u));
            }
        }
    }

    let unreachable = dist.iter().filter(|d| !d.is_finite()).count();
    if unreachable > 0 {
        return Err(BaselineError::DisconnectedMesh {
            from_vertex: source,
            unreachable,
        });
    }
    Ok(DistanceField {
        values: dist,
        source,
    })
}

/// Great-circle distances for meshes whose vertices lie on a common
/// sphere (within 1e-6 relative radius deviation).
///
/// The center comes from the algebraic least-squares sphere fit
/// (|x|^2 linear in x), which is exact for true spheres under any
/// sampling; a plain vertex centroid drifts with nonuniform sampling.
pub fn analytic_sphere_distances(
    mesh: &TriangleMesh,
    source: usize,
) -> Result<DistanceField, BaselineError> {
    mesh.check_vertex(source)?;
    let n = mesh.vertex_count() as f64;
    let mean = mesh.vertices().iter().sum::<crate::mesh::Vec3>() / n;
    let mut cov = nalgebra::Matrix3::<f64>::zeros();
    let mut rhs = crate::mesh::Vec3::zeros();
    for p in mesh.vertices() {
        let u = p - mean;
        cov += u * u.transpose();
        rhs += u * (u.norm_squared() / 2.0);
    }
    let center = match cov.try_inverse() {
        Some(inv) => mean + inv * rhs,
        None => mean, // degenerate point cloud; the deviation check decides
    };
    let radius = mesh.vertices().iter().map(|p| (p - center).norm()).sum::<f64>() / n;
    let deviation = mesh
        .vertices()
        .iter()
        .map(|p| ((p - center).norm() - radius).abs() / radius)
        .fold(0.0, f64::max);
    if deviation > 1e-6 {
        return Err(BaselineError::NotASphere { deviation });
    }

    let s_hat = (mesh.vertices()[source] - center) / (mesh.vertices()[source] - center).norm();
    let values = mesh
        .vertices()
        .iter()
        .map(|p| {
            let p_hat = (p - center) / (p - center).norm();
            radius * s_hat.dot(&p_hat).clamp(-1.0, 1.0).acos()
        })
        .collect();
    Ok(DistanceField { values, source })
}

/// Euclidean distances from the source, valid as ground truth for flat
/// convex meshes such as the planar grids used in testing.
pub fn euclidean_distances(mesh: &TriangleMesh, source: usize) -> Result<DistanceField, BaselineError> {
    mesh.check_vertex(source)?;
    let s = mesh.vertices()[source];
    let values = mesh.vertices().iter().map(|p| (p - s).norm()).collect();
    Ok(DistanceField { values, source })
}

/// Raw and relative error metrics against a reference field. Relative
/// errors exclude the source (the reference is zero there).
#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub mean_raw: f64,
    pub mean_relative: f64,
    pub max_raw: f64,
    pub per_vertex_raw: Vec<f64>,
    pub per_vertex_relative: Vec<f64>,
    pub runtime_seconds: f64,
}

pub fn error_report(
    approx: &DistanceField,
    exact: &DistanceField,
) -> Result<ErrorReport, BaselineError> {
    if approx.source != exact.source {
        return Err(BaselineError::SourceMismatch(approx.source, exact.source));
    }
    assert_eq!(approx.values.len(), exact.values.len());
    let n = approx.values.len();
    let per_vertex_raw: Vec<f64> = approx
        .values
        .iter()
        .zip(&exact.values)
        .map(|(a, e)| (a - e).abs())
        .collect();
    let mut per_vertex_relative = Vec::with_capacity(n.saturating_sub(1));
    for (v, (&raw, &e)) in per_vertex_raw.iter().zip(&exact.values).enumerate() {
        if v != exact.source && e != 0.0 {
            per_vertex_relative.push(raw / e);
        }
    }
    let mean_raw = per_vertex_raw.iter().sum::<f64>() / n as f64;
    let max_raw = per_vertex_raw.iter().cloned().fold(0.0, f64::max);
    let mean_relative = if per_vertex_relative.is_empty() {
        0.0
    } else {
        per_vertex_relative.iter().sum::<f64>() / per_vertex_relative.len() as f64
    };
    Ok(ErrorReport {
        mean_raw,
        mean_relative,
        max_raw,
        per_vertex_raw,
        per_vertex_relative,
        runtime_seconds: 0.0,
    })
}
