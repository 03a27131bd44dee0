//! Black-box tests against the built binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_wavegeo")
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(dir: &Path, args: &[&str]) -> serde_json::Value {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON block")
}

fn generate_sphere(dir: &Path) -> PathBuf {
    run_ok(
        dir,
        &["generate", "sphere", "--subdivisions", "3", "-o", "sphere.off"],
    );
    dir.join("sphere.off")
}

#[test]
fn compute_smoke_run() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = generate_sphere(dir.path());

    let block = run_ok(
        dir.path(),
        &[
            "compute",
            "--method",
            "wave",
            "--delta",
            "0.05",
            "--source",
            "0",
            mesh.to_str().unwrap(),
            "-o",
            "dist.csv",
        ],
    );
    assert_eq!(block["coverage"], 1.0);
    assert_eq!(block["method"], "wave");
    assert!(block["iterations"].as_u64().unwrap() > 0);

    let csv = std::fs::read_to_string(dir.path().join("dist.csv")).unwrap();
    let rows = csv.lines().count();
    assert_eq!(rows, 642 + 1); // header + one row per vertex
    assert!(csv.starts_with("vertex_id,distance\n"));
}

#[test]
fn divergence_flag_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = generate_sphere(dir.path());
    let block = run_ok(
        dir.path(),
        &[
            "compute",
            "--divergence",
            "face",
            mesh.to_str().unwrap(),
            "-o",
            "dist.csv",
        ],
    );
    assert_eq!(block["divergence"], "face");
}

#[test]
fn compute_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = generate_sphere(dir.path());
    run_ok(
        dir.path(),
        &[
            "compute",
            mesh.to_str().unwrap(),
            "-o",
            "dist.csv",
            "--ply",
            "dist.ply",
            "--isocontours",
            "iso.obj",
            "--levels",
            "6",
            "--trace",
            "trace.csv",
        ],
    );
    let ply = std::fs::read_to_string(dir.path().join("dist.ply")).unwrap();
    assert!(ply.starts_with("ply\n"));
    assert!(ply.contains("property double quality"));
    let iso = std::fs::read_to_string(dir.path().join("iso.obj")).unwrap();
    assert!(iso.lines().any(|l| l.starts_with("l ")));
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("iteration,max_height,epsilon,coverage\n"));
    assert!(trace.lines().count() > 10);
}

#[test]
fn distance_csv_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = generate_sphere(dir.path());
    let args = [
        "compute",
        mesh.to_str().unwrap(),
        "-o",
        "a.csv",
    ];
    run_ok(dir.path(), &args);
    run_ok(
        dir.path(),
        &["compute", mesh.to_str().unwrap(), "-o", "b.csv"],
    );
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn compare_selects_sphere_oracle_and_writes_row() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = generate_sphere(dir.path());
    let block = run_ok(
        dir.path(),
        &[
            "compare",
            mesh.to_str().unwrap(),
            "-o",
            "row.csv",
            "--report",
            "report.json",
        ],
    );
    assert_eq!(block["reference"], "sphere");
    let row = std::fs::read_to_string(dir.path().join("row.csv")).unwrap();
    let mut lines = row.lines();
    assert_eq!(
        lines.next().unwrap(),
        "model,method,faces,delta,mean_raw_error,mean_relative_error,max_raw_error,time_s"
    );
    let data: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(data[0], "sphere");
    assert_eq!(data[1], "wave");
    assert_eq!(data[2], "1280");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert!(report["mean_relative"].as_f64().unwrap() < 0.05);
}

#[test]
fn compare_accepts_external_reference_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = generate_sphere(dir.path());
    // Use a dijkstra run's output as the external reference file.
    run_ok(
        dir.path(),
        &[
            "compute",
            "--method",
            "dijkstra",
            mesh.to_str().unwrap(),
            "-o",
            "ref.csv",
        ],
    );
    let block = run_ok(
        dir.path(),
        &[
            "compare",
            mesh.to_str().unwrap(),
            "--reference",
            "ref.csv",
            "-o",
            "row.csv",
        ],
    );
    assert_eq!(block["reference"], "csv");
}

#[test]
fn delta_sweep_trends() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = generate_sphere(dir.path());
    let mut errors = Vec::new();
    let mut iterations = Vec::new();
    for delta in ["0.02", "0.05", "0.1"] {
        let block = run_ok(
            dir.path(),
            &[
                "compare",
                mesh.to_str().unwrap(),
                "--delta",
                delta,
                "-o",
                "row.csv",
            ],
        );
        errors.push(block["mean_relative_error"].as_f64().unwrap());
        iterations.push(block["iterations"].as_u64().unwrap());
    }
    assert!(errors[0] < errors[1] && errors[1] < errors[2], "{errors:?}");
    assert!(
        iterations[0] > iterations[1] && iterations[1] > iterations[2],
        "{iterations:?}"
    );
}

#[test]
fn calibrate_csv_follows_schedule_formula() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = generate_sphere(dir.path());
    let block = run_ok(
        dir.path(),
        &[
            "calibrate",
            mesh.to_str().unwrap(),
            "--delta",
            "0.05",
            "-o",
            "cal.csv",
        ],
    );
    let c = block["epsilon_c"].as_f64().unwrap();
    let a = block["schedule_exponent"].as_f64().unwrap();
    let reported = block["reported_exponent"].as_f64().unwrap();
    assert!((-3.5..=-2.5).contains(&reported), "reported {reported}");

    let csv = std::fs::read_to_string(dir.path().join("cal.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let i: f64 = cols[0].parse().unwrap();
        let h: f64 = cols[1].parse().unwrap();
        let eps: f64 = cols[2].parse().unwrap();
        assert!((eps - c * i.powf(a)).abs() <= 1e-15 * c.max(1.0));
        assert!(h > 0.0);
    }
}

#[test]
fn calibrate_slope_decreases_with_delta() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = generate_sphere(dir.path());
    let mut slopes = Vec::new();
    for delta in ["0.02", "0.05", "0.1"] {
        let block = run_ok(
            dir.path(),
            &[
                "calibrate",
                mesh.to_str().unwrap(),
                "--delta",
                delta,
                "-o",
                "cal.csv",
            ],
        );
        slopes.push(block["reported_exponent"].as_f64().unwrap());
    }
    assert!(slopes[0] > slopes[1] && slopes[1] > slopes[2], "{slopes:?}");
}

#[test]
fn perturb_is_seeded_and_preserves_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = generate_sphere(dir.path());

    run_ok(
        dir.path(),
        &[
            "perturb",
            mesh.to_str().unwrap(),
            "--noise",
            "0.25",
            "--seed",
            "7",
            "-o",
            "n1.off",
        ],
    );
    run_ok(
        dir.path(),
        &[
            "perturb",
            mesh.to_str().unwrap(),
            "--noise",
            "0.25",
            "--seed",
            "7",
            "-o",
            "n2.off",
        ],
    );
    let a = std::fs::read(dir.path().join("n1.off")).unwrap();
    let b = std::fs::read(dir.path().join("n2.off")).unwrap();
    assert_eq!(a, b);

    let block = run_ok(
        dir.path(),
        &[
            "perturb",
            mesh.to_str().unwrap(),
            "--smooth",
            "50",
            "-o",
            "smooth.off",
        ],
    );
    assert_eq!(block["vertices"], 642);
    assert_eq!(block["faces"], 1280);
    let header: String = std::fs::read_to_string(dir.path().join("smooth.off"))
        .unwrap()
        .lines()
        .nth(1)
        .unwrap()
        .to_string();
    assert_eq!(header, "642 1280 1920");
}

#[test]
fn noise_sweep_feeds_compare() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = generate_sphere(dir.path());
    let mut rows = Vec::new();
    for s in ["0.05", "0.25", "0.5"] {
        run_ok(
            dir.path(),
            &[
                "perturb",
                mesh.to_str().unwrap(),
                "--noise",
                s,
                "--seed",
                "7",
                "-o",
                "noisy.off",
            ],
        );
        let block = run_ok(
            dir.path(),
            &["compare", "noisy.off", "--delta", "0.02", "-o", "row.csv"],
        );
        // Noisy vertices no longer sit on a sphere; the fallback
        // reference is the edge graph.
        assert_eq!(block["reference"], "dijkstra");
        rows.push(block["mean_relative_error"].as_f64().unwrap());
    }
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|e| e.is_finite() && *e > 0.0));
}

#[test]
fn missing_input_reports_error_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["compute", "missing.off", "-o", "x.csv"]);
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"]["kind"].is_string());
    assert!(err["error"]["message"].is_string());
}

#[test]
fn invalid_epsilon_flag_reports_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = generate_sphere(dir.path());
    let out = run(
        dir.path(),
        &[
            "compute",
            mesh.to_str().unwrap(),
            "--epsilon",
            "exponent:2.0",
            "-o",
            "x.csv",
        ],
    );
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "config");
}

#[test]
fn normalize_unit_diagonal_rescales() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = generate_sphere(dir.path());
    let block = run_ok(
        dir.path(),
        &[
            "compute",
            mesh.to_str().unwrap(),
            "--normalize-unit-diagonal",
            "-o",
            "d.csv",
        ],
    );
    assert_eq!(block["normalize_unit_diagonal"], true);
    // Unit-diagonal sphere has diameter ~0.577; distances must shrink
    // accordingly (max geodesic ~ pi / (2 sqrt(3)) ~ 0.9).
    let csv = std::fs::read_to_string(dir.path().join("d.csv")).unwrap();
    let max: f64 = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .fold(0.0, f64::max);
    assert!(max < 1.2, "distances not rescaled: max {max}");
}
