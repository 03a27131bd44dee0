// Scratch probe: exponent basin edges and candidate calibration rules.

use wavegeo::baseline;
use wavegeo::fem::FemOperators;
use wavegeo::geodesic::{wave_geodesics, DivergenceBackend};
use wavegeo::mesh::compute_face_geometry;
use wavegeo::shapes;
use wavegeo::wave::*;

fn error_at(mesh: &wavegeo::TriangleMesh, exact: &wavegeo::DistanceField, a: f64, delta: f64) -> (usize, f64) {
    let mut config = WaveConfig::with_delta(delta);
    config.epsilon_exponent = EpsilonExponent::Fixed(a);
    let run = wave_geodesics(mesh, 0, &config, DivergenceBackend::Edge).unwrap();
    let report = baseline::error_report(&run.distances, exact).unwrap();
    (run.diagnostics.iterations, report.mean_relative)
}

fn rules(mesh: &wavegeo::TriangleMesh, delta: f64) -> (f64, f64) {
    let config = WaveConfig::with_delta(delta);
    let geom = compute_face_geometry(mesh).unwrap();
    let ops = FemOperators::build(mesh, &geom).unwrap();
    let factor = wave_system(&ops, &config).unwrap().factorize().unwrap();
    let heights = record_wave_heights(mesh, &ops, &factor, 0, 50, &config).unwrap();
    let clean = clean_decay_end(&heights);
    // mean of normalized slopes over the clean phase
    let h1 = heights[0];
    let mut sum = 0.0;
    let mut count = 0;
    let mut steepest = f64::INFINITY;
    for i in 2..=clean.min(heights.len()) {
        let s = (heights[i - 1] / h1).ln() / (i as f64).ln();
        sum += s;
        count += 1;
        steepest = steepest.min(s);
    }
    (sum / count as f64, steepest)
}

fn main() {
    let sphere = shapes::icosphere(1.0, 4);
    let exact_s = baseline::analytic_sphere_distances(&sphere, 0).unwrap();
    println!("sphere basin edges (delta=0.05):");
    for a in [-1.60, -1.65, -1.70, -1.75, -1.80, -2.10, -2.20, -2.30, -2.40] {
        let (iters, rel) = error_at(&sphere, &exact_s, a, 0.05);
        println!("  a={a}: iters {iters} mean_rel {:.4}", rel);
    }
    let (mean_a, steep_a) = rules(&sphere, 0.05);
    println!("  rules: mean {:.3} steepest {:.3} midpoint {:.3}", mean_a, steep_a, 0.5 * (mean_a + steep_a));

    let grid = shapes::grid(50, 50, 4.0, 4.0);
    let exact_g = baseline::euclidean_distances(&grid, 0).unwrap();
    println!("grid extent 4 (delta=0.05):");
    for a in [-1.8, -2.0, -2.1, -2.2, -2.4, -2.6] {
        let (iters, rel) = error_at(&grid, &exact_g, a, 0.05);
        println!("  a={a}: iters {iters} mean_rel {:.4}", rel);
    }
    let (mean_a, steep_a) = rules(&grid, 0.05);
    println!("  rules: mean {:.3} steepest {:.3} midpoint {:.3}", mean_a, steep_a, 0.5 * (mean_a + steep_a));

    // Small deltas: make sure the midpoint rule stays accurate.
    for delta in [0.01, 0.02] {
        let (mean_a, steep_a) = rules(&sphere, delta);
        let mid = 0.5 * (mean_a + steep_a);
        let (iters, rel) = error_at(&sphere, &exact_s, mid, delta);
        println!("sphere delta={delta}: mid {:.3} -> iters {iters} rel {:.4}", mid, rel);
    }
}
