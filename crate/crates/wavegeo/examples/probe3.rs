// Scratch probe: where does the error live at delta = 0.05?

use wavegeo::baseline;
use wavegeo::fem::FemOperators;
use wavegeo::geodesic::*;
use wavegeo::mesh::compute_face_geometry;
use wavegeo::shapes;
use wavegeo::wave::*;

fn stats(mesh: &wavegeo::TriangleMesh, config: &WaveConfig, exact: &[f64], label: &str) {
    let geom = compute_face_geometry(mesh).unwrap();
    let ops = FemOperators::build(mesh, &geom).unwrap();
    let factor = wave_system(&ops, config).unwrap().factorize().unwrap();
    let schedule = calibrate_epsilon(mesh, &ops, &factor, 0, config).unwrap();
    let prop = match propagate(mesh, &ops, &factor, 0, config, &schedule) {
        Ok(p) => p,
        Err(WaveError::IncompleteCoverage { propagation, .. }) => *propagation,
        Err(e) => panic!("{e}"),
    };
    let times = &prop.field.time;

    // Gradient field of the raw time data.
    let grads = face_gradients(mesh, &geom, times).unwrap();
    let flagged = grads.flagged.iter().filter(|&&f| f).count();

    // Simple per-bin summary of time vs exact distance.
    let dmax = exact.iter().cloned().fold(0.0, f64::max);
    let bins = 8;
    let mut sums = vec![(0.0f64, 0.0f64, 0usize); bins];
    for (t, e) in times.iter().zip(exact) {
        let b = ((e / dmax) * bins as f64).min(bins as f64 - 1.0) as usize;
        sums[b].0 += t;
        sums[b].1 += e;
        sums[b].2 += 1;
    }
    println!("{label}: schedule a={:.3}, iters {}, flagged {}/{}", schedule.a, prop.iterations, flagged, mesh.face_count());
    for (b, (st, se, n)) in sums.iter().enumerate() {
        if *n > 0 {
            println!(
                "  bin {b}: mean_exact {:.3} mean_time {:.3} time/exact {:.3}",
                se / *n as f64,
                st / *n as f64,
                (st / *n as f64) / (se / *n as f64).max(1e-12)
            );
        }
    }

    // Final distances per bin.
    let integrator = GradientIntegrator::new(mesh).unwrap();
    let w = integrator.integrate(times, 0, DivergenceBackend::Edge).unwrap();
    let mut sums = vec![(0.0f64, 0.0f64, 0usize); bins];
    for (wi, e) in w.values.iter().zip(exact) {
        let b = ((e / dmax) * bins as f64).min(bins as f64 - 1.0) as usize;
        sums[b].0 += wi;
        sums[b].1 += e;
        sums[b].2 += 1;
    }
    for (b, (sw, se, n)) in sums.iter().enumerate() {
        if *n > 0 {
            println!(
                "  bin {b}: mean_exact {:.3} mean_w {:.3} w/exact {:.3}",
                se / *n as f64,
                sw / *n as f64,
                (sw / *n as f64) / (se / *n as f64).max(1e-12)
            );
        }
    }
}

fn main() {
    let mesh = shapes::grid(50, 50, 1.0, 1.0);
    let exact = baseline::euclidean_distances(&mesh, 0).unwrap();
    stats(&mesh, &WaveConfig::with_delta(0.05), &exact.values, "grid d=0.05");

    let mesh = shapes::icosphere(1.0, 4);
    let exact = baseline::analytic_sphere_distances(&mesh, 0).unwrap();
    stats(&mesh, &WaveConfig::with_delta(0.05), &exact.values, "sphere d=0.05");
    stats(&mesh, &WaveConfig::with_delta(0.01), &exact.values, "sphere d=0.01");
}
