// Scratch probe for propagation behavior; not part of the test suite.

use wavegeo::baseline;
use wavegeo::fem::FemOperators;
use wavegeo::geodesic::{wave_geodesics, DivergenceBackend};
use wavegeo::mesh::compute_face_geometry;
use wavegeo::shapes;
use wavegeo::wave::*;

fn main() {
    // Grid behavior at the default (Auto) configuration.
    let mesh = shapes::grid(30, 30, 1.0, 1.0);
    let config = WaveConfig::with_delta(0.05);
    let geom = compute_face_geometry(&mesh).unwrap();
    let ops = FemOperators::build(&mesh, &geom).unwrap();
    let factor = wave_system(&ops, &config).unwrap().factorize().unwrap();
    let schedule = calibrate_epsilon(&mesh, &ops, &factor, 0, &config).unwrap();
    println!("grid 30x30 d=0.05: schedule c={:.4e} a={:.3}", schedule.c, schedule.a);
    match propagate(&mesh, &ops, &factor, 0, &config, &schedule) {
        Ok(prop) => {
            println!("  iterations {}, coverage {}", prop.iterations, prop.field.coverage);
            let mono = (0..29).all(|i| prop.field.time[i + 1] >= prop.field.time[i]);
            println!("  bottom row monotone: {mono}");
            if !mono {
                for i in 0..30 {
                    print!(" {:.3}", prop.field.time[i]);
                }
                println!();
            }
        }
        Err(WaveError::IncompleteCoverage { coverage, iterations, .. }) => {
            println!("  INCOMPLETE {coverage} after {iterations}");
        }
        Err(e) => println!("  error: {e}"),
    }

    // Grid criterion shape: 50x50, corner source, edge divergence.
    let mesh = shapes::grid(50, 50, 1.0, 1.0);
    let run = wave_geodesics(&mesh, 0, &WaveConfig::default(), DivergenceBackend::Edge).unwrap();
    let exact = baseline::euclidean_distances(&mesh, 0).unwrap();
    let report = baseline::error_report(&run.distances, &exact).unwrap();
    println!(
        "grid 50x50: iters {} cov {:.3} eps_a {:.3} mean_rel {:.4} mean_raw {:.4} max_raw {:.4}",
        run.diagnostics.iterations,
        run.diagnostics.coverage,
        run.diagnostics.epsilon_exponent,
        report.mean_relative,
        report.mean_raw,
        report.max_raw
    );

    // Sphere: fitted slopes (paper convention) per window end and delta.
    let mesh = shapes::icosphere(1.0, 4);
    let geom = compute_face_geometry(&mesh).unwrap();
    let ops = FemOperators::build(&mesh, &geom).unwrap();
    for delta in [0.02, 0.05, 0.1] {
        let config = WaveConfig::with_delta(delta);
        let factor = wave_system(&ops, &config).unwrap().factorize().unwrap();
        let heights = record_wave_heights(&mesh, &ops, &factor, 0, 50, &config).unwrap();
        print!("sphere delta={delta}: h1={:.4e} reported-fit by fit_end:", heights[0]);
        for end in [10, 12, 14, 16, 18, 20, 25] {
            print!(" [2,{}]={:.3}", end, fit_decay_exponent(&heights, 2, end).unwrap());
        }
        println!();
        println!(
            "  schedule-fit [2,50]={:.3}",
            fit_schedule_exponent(&heights, 2, 50).unwrap()
        );
    }

    // Sphere pipeline accuracy, both backends, defaults.
    for backend in [DivergenceBackend::Edge, DivergenceBackend::Face] {
        let run = wave_geodesics(&mesh, 0, &WaveConfig::default(), backend).unwrap();
        let exact = baseline::analytic_sphere_distances(&mesh, 0).unwrap();
        let report = baseline::error_report(&run.distances, &exact).unwrap();
        println!(
            "sphere {backend}: iters {} cov {:.3} eps_a {:.3} mean_rel {:.4} mean_raw {:.4} max_raw {:.4}",
            run.diagnostics.iterations,
            run.diagnostics.coverage,
            run.diagnostics.epsilon_exponent,
            report.mean_relative,
            report.mean_raw,
            report.max_raw
        );
    }

    // Delta sweep on the sphere: errors should grow with delta.
    for delta in [0.005, 0.01, 0.02, 0.05, 0.1] {
        let config = WaveConfig::with_delta(delta);
        let run = wave_geodesics(&mesh, 0, &config, DivergenceBackend::Edge).unwrap();
        let exact = baseline::analytic_sphere_distances(&mesh, 0).unwrap();
        let report = baseline::error_report(&run.distances, &exact).unwrap();
        println!(
            "sweep delta={delta}: iters {} mean_rel {:.4}",
            run.diagnostics.iterations, report.mean_relative
        );
    }

    // Heat baseline on the sphere.
    let heat = baseline::heat_geodesics(&mesh, 0, 1.0, DivergenceBackend::Edge).unwrap();
    let exact = baseline::analytic_sphere_distances(&mesh, 0).unwrap();
    let report = baseline::error_report(&heat, &exact).unwrap();
    println!(
        "sphere heat: mean_rel {:.4} mean_raw {:.4} max_raw {:.4}",
        report.mean_relative, report.mean_raw, report.max_raw
    );
}
