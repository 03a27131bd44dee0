//! Mesh perturbations for robustness studies: seeded vertex noise,
//! umbrella smoothing, and unsharp-mask sharpening. All three preserve
//! connectivity exactly; only positions change.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};

use crate::mesh::{median_incident_edge_length, TriangleMesh, Vec3};

/// Parameters of the perturbation suite.
#[derive(Debug, Clone)]
pub struct PerturbConfig {
    /// Noise scale s in [0, 1]; displacement magnitude per vertex is
    /// uniform in [0, s * median incident edge length].
    pub noise_scale: f64,
    /// Umbrella smoothing iterations.
    pub smoothing_iterations: usize,
    /// Sharpen kernel scale s; the Gaussian radius is s * median
    /// incident edge length.
    pub sharpen_scale: f64,
    pub rng_seed: u64,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        Self {
            noise_scale: 0.0,
            smoothing_iterations: 0,
            sharpen_scale: 0.0,
            rng_seed: 0,
        }
    }
}

/// Median incident edge length per vertex, from the unperturbed mesh.
fn per_vertex_scale(mesh: &TriangleMesh) -> Vec<f64> {
    (0..mesh.vertex_count())
        .map(|v| median_incident_edge_length(mesh, v).unwrap_or(0.0))
        .collect()
}

/// Displace each vertex along a uniformly random direction by a
/// magnitude uniform in [0, s * l_v]. Seeded, hence reproducible.
pub fn add_noise(mesh: &TriangleMesh, s: f64, seed: u64) -> TriangleMesh {
    assert!(s >= 0.0);
    let scales = per_vertex_scale(mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let moved: Vec<Vec3> = mesh
        .vertices()
        .iter()
        .zip(&scales)
        .map(|(p, &l)| {
            let dir: [f64; 3] = UnitSphere.sample(&mut rng);
            let magnitude: f64 = rand::Rng::random_range(&mut rng, 0.0..=1.0) * s * l;
            p + Vec3::new(dir[0], dir[1], dir[2]) * magnitude
        })
        .collect();
    mesh.with_positions(moved)
}

/// `m` iterations of umbrella smoothing: each interior vertex moves to
/// the mean of its 1-ring; boundary vertices stay fixed so holes do not
/// shrink.
pub fn umbrella_smooth(mesh: &TriangleMesh, m: usize) -> TriangleMesh {
    let mut current = mesh.vertices().to_vec();
    for _ in 0..m {
        let next: Vec<Vec3> = (0..current.len())
            .map(|v| {
                let nbrs = mesh.vertex_neighbors(v);
                if nbrs.is_empty() || mesh.is_boundary_vertex(v) {
                    return current[v];
                }
                nbrs.iter().map(|&u| current[u]).sum::<Vec3>() / nbrs.len() as f64
            })
            .collect();
        current = next;
    }
    mesh.with_positions(current)
}

/// Gaussian-weighted 1-ring smoothing (radius sigma = s * l_v) followed
/// by the unsharp step: result = original + 2 (original - smoothed).
pub fn sharpen(mesh: &TriangleMesh, s: f64) -> TriangleMesh {
    assert!(s > 0.0);
    let scales = per_vertex_scale(mesh);
    let original = mesh.vertices();
    let smoothed: Vec<Vec3> = (0..original.len())
        .map(|v| {
            let sigma = s * scales[v];
            if sigma <= 0.0 {
                return original[v];
            }
            let inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
            let mut acc = original[v]; // self weight exp(0) = 1
            let mut total = 1.0;
            for &u in mesh.vertex_neighbors(v) {
                let w = (-(original[u] - original[v]).norm_squared() * inv_two_sigma_sq).exp();
                acc += original[u] * w;
                total += w;
            }
            acc / total
        })
        .collect();
    let result = original
        .iter()
        .zip(&smoothed)
        .map(|(orig, sm)| orig + (orig - sm) * 2.0)
        .collect();
    mesh.with_positions(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use approx::assert_relative_eq;

    #[test]
    fn zero_noise_is_identity() {
        let mesh = shapes::icosphere(1.0, 2);
        let noisy = add_noise(&mesh, 0.0, 42);
        for (a, b) in noisy.vertices().iter().zip(mesh.vertices()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn noise_respects_magnitude_bound() {
        let mesh = shapes::icosphere(1.0, 3);
        let s = 0.4;
        let noisy = add_noise(&mesh, s, 7);
        for (v, (a, b)) in noisy.vertices().iter().zip(mesh.vertices()).enumerate() {
            let l = median_incident_edge_length(&mesh, v).unwrap();
            assert!(
                (a - b).norm() <= s * l + 1e-12,
                "displacement exceeds bound at {v}"
            );
        }
    }

    #[test]
    fn noise_is_seeded_and_reproducible() {
        let mesh = shapes::torus(1.0, 0.3, 16, 8);
        let a = add_noise(&mesh, 0.25, 99);
        let b = add_noise(&mesh, 0.25, 99);
        for (p, q) in a.vertices().iter().zip(b.vertices()) {
            assert_eq!(p.x.to_bits(), q.x.to_bits());
            assert_eq!(p.y.to_bits(), q.y.to_bits());
            assert_eq!(p.z.to_bits(), q.z.to_bits());
        }
        let c = add_noise(&mesh, 0.25, 100);
        assert!(c.vertices().iter().zip(a.vertices()).any(|(p, q)| p != q));
    }

    #[test]
    fn perturbations_preserve_connectivity() {
        let mesh = shapes::icosphere(1.0, 2);
        for out in [
            add_noise(&mesh, 0.3, 1),
            umbrella_smooth(&mesh, 5),
            sharpen(&mesh, 0.5),
        ] {
            assert_eq!(out.vertex_count(), mesh.vertex_count());
            assert_eq!(out.edge_count(), mesh.edge_count());
            assert_eq!(out.face_count(), mesh.face_count());
            assert_eq!(out.faces(), mesh.faces());
        }
    }

    #[test]
    fn smooth_zero_iterations_is_identity() {
        let mesh = shapes::icosphere(1.0, 2);
        let out = umbrella_smooth(&mesh, 0);
        for (a, b) in out.vertices().iter().zip(mesh.vertices()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn centroid_vertex_is_smoothing_fixed_point() {
        // Regular hexagon fan: the interior vertex already sits at the
        // centroid of its 1-ring.
        let mut verts = vec![Vec3::zeros()];
        for k in 0..6 {
            let t = std::f64::consts::TAU * k as f64 / 6.0;
            verts.push(Vec3::new(t.cos(), t.sin(), 0.0));
        }
        let faces: Vec<[usize; 3]> = (0..6).map(|k| [0, 1 + k, 1 + (k + 1) % 6]).collect();
        let mesh = crate::mesh::TriangleMesh::new(verts, faces).unwrap();
        let out = umbrella_smooth(&mesh, 1);
        assert_relative_eq!(out.vertices()[0].norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn smoothing_shrinks_sphere_area_monotonically() {
        let mesh = shapes::icosphere(1.0, 2);
        let mut prev = mesh.total_area();
        let mut current = mesh.clone();
        for _ in 0..50 {
            current = umbrella_smooth(&current, 1);
            let area = current.total_area();
            assert!(area < prev, "area did not shrink");
            prev = area;
        }
    }

    #[test]
    fn smoothing_commutes_with_rigid_motion() {
        let mesh = shapes::bumpy_sphere(1.0, 2, 0.05);
        let axis = nalgebra::Unit::new_normalize(nalgebra::Vector3::new(0.3, 1.0, -0.2));
        let rot = nalgebra::Rotation3::from_axis_angle(&axis, 1.1);
        let shift = Vec3::new(2.0, -1.0, 0.5);

        let smoothed_then_moved: Vec<Vec3> = umbrella_smooth(&mesh, 10)
            .vertices()
            .iter()
            .map(|p| rot * p + shift)
            .collect();
        let moved = mesh.with_positions(mesh.vertices().iter().map(|p| rot * p + shift).collect());
        let moved_then_smoothed = umbrella_smooth(&moved, 10);
        for (a, b) in smoothed_then_moved.iter().zip(moved_then_smoothed.vertices()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn sharpen_is_unsharp_mask() {
        // Pull one interior grid vertex below the plane; sharpening must
        // push it away from the smoothed position by exactly twice the
        // smoothing correction.
        let mesh = shapes::grid(5, 5, 1.0, 1.0);
        let mut verts = mesh.vertices().to_vec();
        let center = 12; // interior vertex
        verts[center].z = -0.2;
        let dented = mesh.with_positions(verts);

        let s = 0.8;
        let sharpened = sharpen(&dented, s);
        // Recompute the smoothed position independently.
        let sigma = s * median_incident_edge_length(&dented, center).unwrap();
        let inv = 1.0 / (2.0 * sigma * sigma);
        let p = dented.vertices()[center];
        let mut acc = p;
        let mut total = 1.0;
        for &u in dented.vertex_neighbors(center) {
            let w = (-(dented.vertices()[u] - p).norm_squared() * inv).exp();
            acc += dented.vertices()[u] * w;
            total += w;
        }
        let smoothed = acc / total;
        let expected = p + (p - smoothed) * 2.0;
        assert!((sharpened.vertices()[center] - expected).norm() < 1e-12);
    }

    #[test]
    fn sharpen_degenerate_kernel_limit() {
        // As s -> 0 the kernel collapses onto the vertex itself, so the
        // smoothed mesh approaches the original and sharpening is
        // near-identity.
        let mesh = shapes::bumpy_sphere(1.0, 2, 0.03);
        let out = sharpen(&mesh, 1e-3);
        for (a, b) in out.vertices().iter().zip(mesh.vertices()) {
            assert!((a - b).norm() < 1e-9);
        }
    }
}
