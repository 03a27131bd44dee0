// Scratch probe: configuration matrix for the delta = 0.05 regime.

use wavegeo::baseline;
use wavegeo::geodesic::{wave_geodesics, DivergenceBackend};
use wavegeo::shapes;
use wavegeo::wave::*;

fn run(mesh: &wavegeo::TriangleMesh, exact: &wavegeo::DistanceField, config: &WaveConfig, backend: DivergenceBackend, label: &str) {
    match wave_geodesics(mesh, 0, config, backend) {
        Ok(run) => {
            let report = baseline::error_report(&run.distances, exact).unwrap();
            println!(
                "{label}: iters {} eps_a {:.3} mean_rel {:.4} mean_raw {:.4} max_raw {:.4}",
                run.diagnostics.iterations,
                run.diagnostics.epsilon_exponent,
                report.mean_relative,
                report.mean_raw,
                report.max_raw
            );
        }
        Err(e) => println!("{label}: ERROR {e}"),
    }
}

fn main() {
    // Grid extent study at fixed 50x50 vertices, delta = 0.05.
    for extent in [1.0f64, 2.0, 3.0, 4.0] {
        let mesh = shapes::grid(50, 50, extent, extent);
        let exact = baseline::euclidean_distances(&mesh, 0).unwrap();
        let config = WaveConfig::with_delta(0.05);
        run(&mesh, &exact, &config, DivergenceBackend::Edge, &format!("grid extent {extent} galerkin"));
        let mut lumped = config.clone();
        lumped.use_lumped_mass = true;
        run(&mesh, &exact, &lumped, DivergenceBackend::Edge, &format!("grid extent {extent} lumped  "));
    }

    // Sphere at delta = 0.05: mass lumping and backend matrix.
    let mesh = shapes::icosphere(1.0, 4);
    let exact = baseline::analytic_sphere_distances(&mesh, 0).unwrap();
    for lumped in [false, true] {
        for backend in [DivergenceBackend::Edge, DivergenceBackend::Face] {
            let mut config = WaveConfig::with_delta(0.05);
            config.use_lumped_mass = lumped;
            run(&mesh, &exact, &config, backend, &format!("sphere lumped={lumped} {backend}"));
        }
    }

    // Sphere coverage iterations at defaults (criterion: low hundreds).
    for delta in [0.02, 0.05] {
        let config = WaveConfig::with_delta(delta);
        let r = wave_geodesics(&mesh, 0, &config, DivergenceBackend::Edge).unwrap();
        println!("sphere delta={delta}: iterations {}", r.diagnostics.iterations);
    }
}
