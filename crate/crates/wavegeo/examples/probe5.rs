// Scratch probe: crossing-branch usage and gradient direction jitter.

use wavegeo::fem::FemOperators;
use wavegeo::geodesic::*;
use wavegeo::mesh::compute_face_geometry;
use wavegeo::shapes;
use wavegeo::wave::*;

fn main() {
    let mesh = shapes::icosphere(1.0, 4);
    let geom = compute_face_geometry(&mesh).unwrap();
    let ops = FemOperators::build(&mesh, &geom).unwrap();

    for delta in [0.02, 0.05] {
        let config = WaveConfig::with_delta(delta);
        let factor = wave_system(&ops, &config).unwrap().factorize().unwrap();
        let schedule = calibrate_epsilon(&mesh, &ops, &factor, 0, &config).unwrap();

        // Re-run propagation manually, counting branch usage.
        let mut state = WaveState::initial(initial_signal(&mesh, 0).unwrap());
        let n = mesh.vertex_count();
        let mut recorded = vec![false; n];
        recorded[0] = true;
        let mut rising = 0usize;
        let mut falling = 0usize;
        let mut nrec = 1usize;
        while nrec < n && state.iteration < config.max_iterations {
            state = step(state, &ops, &factor, &config).unwrap();
            let eps = schedule.value(state.iteration);
            for v in 0..n {
                if recorded[v] {
                    continue;
                }
                let lo = state.xi_prev[v];
                let hi = state.xi_curr[v];
                if hi >= eps {
                    if lo < eps {
                        rising += 1;
                    } else {
                        falling += 1;
                    }
                    recorded[v] = true;
                    nrec += 1;
                }
            }
        }
        println!("delta={delta}: rising {rising} falling {falling}");

        // Direction jitter of grad(time) vs the true tangent direction.
        let prop = propagate(&mesh, &ops, &factor, 0, &config, &schedule).unwrap();
        let grads = face_gradients(&mesh, &geom, &prop.field.time).unwrap();
        let src = mesh.vertices()[0];
        let mut angle_sum = 0.0;
        let mut count = 0usize;
        for (f, g) in mesh.faces().iter().zip(&grads.vectors) {
            if g.norm() == 0.0 {
                continue;
            }
            let centroid = (mesh.vertices()[f[0]] + mesh.vertices()[f[1]] + mesh.vertices()[f[2]]) / 3.0;
            // True geodesic direction away from the source, tangent to the sphere.
            let radial = centroid.normalize();
            let toward = (centroid - src) - radial * (centroid - src).dot(&radial);
            if toward.norm() < 1e-9 {
                continue;
            }
            let t = toward.normalize();
            let cosang = g.dot(&t).clamp(-1.0, 1.0);
            angle_sum += cosang.acos();
            count += 1;
        }
        println!("  mean direction error: {:.4} rad over {count} faces", angle_sum / count as f64);
    }
}
