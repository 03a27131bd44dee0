// Scratch probe: per-vertex wave evolution vs threshold on the grid.

use wavegeo::fem::FemOperators;
use wavegeo::mesh::compute_face_geometry;
use wavegeo::shapes;
use wavegeo::wave::*;

fn main() {
    let mesh = shapes::grid(30, 30, 1.0, 1.0);
    let config = WaveConfig::with_delta(0.05);
    let geom = compute_face_geometry(&mesh).unwrap();
    let ops = FemOperators::build(&mesh, &geom).unwrap();
    let factor = wave_system(&ops, &config).unwrap().factorize().unwrap();
    let schedule = calibrate_epsilon(&mesh, &ops, &factor, 0, &config).unwrap();
    println!("schedule c={:.4e} a={:.3}", schedule.c, schedule.a);

    // Track bottom-row vertices 5, 10, 15, 20 and interior (15,15).
    let track = [5usize, 10, 15, 20, 15 * 30 + 15];
    let mut state = WaveState::initial(initial_signal(&mesh, 0).unwrap());
    println!("iter | eps      | h_max    | v5       v10      v15      v20      int(15,15)");
    for i in 1..=40 {
        state = step(state, &ops, &factor, &config).unwrap();
        let eps = schedule.value(i);
        let h = state.xi_curr.iter().cloned().fold(f64::MIN, f64::max);
        let hv: Vec<f64> = track.iter().map(|&v| state.xi_curr[v]).collect();
        println!(
            "{:4} | {:.2e} | {:.2e} | {:+.2e} {:+.2e} {:+.2e} {:+.2e} {:+.2e}",
            i, eps, h, hv[0], hv[1], hv[2], hv[3], hv[4]
        );
    }

    // Where does the max sit over time? Distance of argmax vertex from source.
    let mut state = WaveState::initial(initial_signal(&mesh, 0).unwrap());
    println!("\niter | argmax distance from source (front tracking?)");
    for i in 1..=40 {
        state = step(state, &ops, &factor, &config).unwrap();
        let (vmax, _) = state
            .xi_curr
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        let d = (mesh.vertices()[vmax] - mesh.vertices()[0]).norm();
        if i % 2 == 0 {
            println!("{:4} | {:.3} (t={:.2})", i, d, i as f64 * 0.05);
        }
    }
}
