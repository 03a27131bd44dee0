//! Subcommand implementations. Results land in files; a JSON block per
//! run goes to stdout, and failures print an error JSON on stderr.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde_json::json;

use wavegeo::baseline::{self, BaselineError};
use wavegeo::geodesic::{wave_geodesics, DistanceField, DivergenceBackend, GeodesicError};
use wavegeo::isocontour;
use wavegeo::mesh::{self, MeshFormat, TriangleMesh};
use wavegeo::perturb;
use wavegeo::shapes;
use wavegeo::wave::{self, EpsilonExponent, WaveConfig};
use wavegeo::{fem, MeshError};

use crate::args::*;

/// Error payload rendered as JSON on stderr.
pub struct CliError {
    pub kind: String,
    pub message: String,
}

impl CliError {
    fn new(kind: &str, message: impl ToString) -> Self {
        Self {
            kind: kind.into(),
            message: message.to_string(),
        }
    }
}

macro_rules! from_error {
    ($ty:ty, $kind:expr) => {
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::new($kind, e)
            }
        }
    };
}

from_error!(MeshError, "mesh");
from_error!(wavegeo::linalg::LinAlgError, "linalg");
from_error!(wave::WaveError, "wave");
from_error!(GeodesicError, "geodesic");
from_error!(BaselineError, "baseline");
from_error!(fem::FemError, "fem");
from_error!(std::io::Error, "io");

fn config_error(message: impl ToString) -> CliError {
    CliError::new("config", message)
}

fn parse_epsilon(text: &str) -> Result<EpsilonExponent, CliError> {
    if text == "auto" {
        return Ok(EpsilonExponent::Auto);
    }
    if let Some(rest) = text.strip_prefix("exponent:") {
        let a: f64 = rest
            .parse()
            .map_err(|_| config_error(format!("bad exponent value {rest:?}")))?;
        if a >= 0.0 {
            return Err(config_error("epsilon exponent must be negative"));
        }
        return Ok(EpsilonExponent::Fixed(a));
    }
    Err(config_error(format!(
        "epsilon must be \"auto\" or \"exponent:<a>\", got {text:?}"
    )))
}

fn wave_config(solver: &SolverArgs) -> Result<WaveConfig, CliError> {
    let mut config = WaveConfig::with_delta(solver.delta);
    config.mu = solver.mu;
    config.epsilon_exponent = parse_epsilon(&solver.epsilon)?;
    config.coverage_target = solver.coverage_target;
    if let Some(cap) = solver.max_iterations {
        config.max_iterations = cap;
    }
    config.validate().map_err(CliError::from)?;
    Ok(config)
}

fn load_input(path: &Path, normalize: bool) -> Result<TriangleMesh, CliError> {
    let mesh = mesh::load_mesh_auto(path)?;
    Ok(if normalize {
        mesh.normalized_to_unit_diagonal()
    } else {
        mesh
    })
}

fn backend(divergence: Divergence) -> DivergenceBackend {
    match divergence {
        Divergence::Edge => DivergenceBackend::Edge,
        Divergence::Face => DivergenceBackend::Face,
    }
}

fn write_distance_csv(path: &Path, field: &DistanceField) -> Result<(), CliError> {
    let mut out = String::from("vertex_id,distance\n");
    for (v, d) in field.values.iter().enumerate() {
        let _ = writeln!(out, "{v},{d}");
    }
    fs::write(path, out)?;
    Ok(())
}

fn read_distance_csv(path: &Path, source: usize) -> Result<DistanceField, CliError> {
    let text = fs::read_to_string(path)?;
    let mut rows: Vec<(usize, f64)> = Vec::new();
    for (lno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with("vertex_id") {
            continue;
        }
        let mut parts = line.split(',');
        let mut parse = || -> Option<(usize, f64)> {
            let v = parts.next()?.trim().parse().ok()?;
            let d = parts.next()?.trim().parse().ok()?;
            Some((v, d))
        };
        let (v, d) = parse().ok_or_else(|| {
            config_error(format!("bad reference CSV row at line {}", lno + 1))
        })?;
        rows.push((v, d));
    }
    let n = rows.iter().map(|&(v, _)| v + 1).max().unwrap_or(0);
    let mut values = vec![f64::NAN; n];
    for (v, d) in rows {
        values[v] = d;
    }
    if values.iter().any(|d| d.is_nan()) {
        return Err(config_error("reference CSV has missing vertex ids"));
    }
    Ok(DistanceField { values, source })
}

/// True when every vertex lies in the plane of the first face.
fn is_planar(mesh: &TriangleMesh) -> bool {
    let f = match mesh.faces().first() {
        Some(f) => f,
        None => return false,
    };
    let p0 = mesh.vertices()[f[0]];
    let n = (mesh.vertices()[f[1]] - p0).cross(&(mesh.vertices()[f[2]] - p0));
    if n.norm() == 0.0 {
        return false;
    }
    let n = n.normalize();
    let tol = 1e-9 * mesh.bbox_diagonal().max(1.0);
    mesh.vertices().iter().all(|p| (p - p0).dot(&n).abs() <= tol)
}

struct ComputedField {
    distances: DistanceField,
    diagnostics: serde_json::Value,
    trace: Vec<wave::TraceSample>,
    elapsed_s: f64,
}

fn compute_field(
    mesh: &TriangleMesh,
    solver: &SolverArgs,
) -> Result<ComputedField, CliError> {
    let start = Instant::now();
    match solver.method {
        Method::Wave => {
            let config = wave_config(solver)?;
            let run = wave_geodesics(mesh, solver.source, &config, backend(solver.divergence))?;
            let elapsed_s = start.elapsed().as_secs_f64();
            let d = &run.diagnostics;
            let diagnostics = json!({
                "method": "wave",
                "delta": solver.delta,
                "mu": solver.mu,
                "divergence": d.divergence_backend.to_string(),
                "epsilon": {
                    "mode": if matches!(config.epsilon_exponent, EpsilonExponent::Auto) { "auto" } else { "fixed" },
                    "c": d.epsilon_c,
                    "exponent": d.epsilon_exponent,
                },
                "iterations": d.iterations,
                "coverage": d.coverage,
                "incomplete_coverage": d.incomplete_coverage,
                "timings": {
                    "assembly_s": d.timings.assembly_s,
                    "factorization_s": d.timings.factorization_s,
                    "propagation_s": d.timings.propagation_s,
                    "poisson_s": d.timings.poisson_s,
                    "total_s": elapsed_s,
                },
            });
            Ok(ComputedField {
                distances: run.distances,
                diagnostics,
                trace: run.trace,
                elapsed_s,
            })
        }
        Method::Heat => {
            let distances = baseline::heat_geodesics(
                mesh,
                solver.source,
                solver.t_coef,
                backend(solver.divergence),
            )?;
            let elapsed_s = start.elapsed().as_secs_f64();
            let diagnostics = json!({
                "method": "heat",
                "t_coef": solver.t_coef,
                "divergence": backend(solver.divergence).to_string(),
                "timings": { "total_s": elapsed_s },
            });
            Ok(ComputedField {
                distances,
                diagnostics,
                trace: Vec::new(),
                elapsed_s,
            })
        }
        Method::Dijkstra => {
            let distances = baseline::dijkstra_distances(mesh, solver.source)?;
            let elapsed_s = start.elapsed().as_secs_f64();
            let diagnostics = json!({
                "method": "dijkstra",
                "timings": { "total_s": elapsed_s },
            });
            Ok(ComputedField {
                distances,
                diagnostics,
                trace: Vec::new(),
                elapsed_s,
            })
        }
    }
}

pub fn cmd_compute(args: &ComputeArgs) -> Result<(), CliError> {
    let mesh = load_input(&args.mesh, args.solver.normalize_unit_diagonal)?;
    let computed = compute_field(&mesh, &args.solver)?;

    write_distance_csv(&args.output, &computed.distances)?;
    if let Some(ply) = &args.ply {
        mesh::write_ply_with_scalar(&mesh, &computed.distances.values, ply)?;
    }
    if let Some(iso) = &args.isocontours {
        let contours = isocontour::extract_isocontours(&mesh, &computed.distances.values, args.levels);
        fs::write(iso, isocontour::contours_to_obj(&contours))?;
    }
    if let Some(trace_path) = &args.trace {
        let mut out = String::from("iteration,max_height,epsilon,coverage\n");
        for row in &computed.trace {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                row.iteration, row.max_height, row.epsilon, row.coverage
            );
        }
        fs::write(trace_path, out)?;
    }

    let mut block = computed.diagnostics;
    merge(&mut block, json!({
        "command": "compute",
        "mesh": args.mesh.display().to_string(),
        "vertices": mesh.vertex_count(),
        "faces": mesh.face_count(),
        "source": args.solver.source,
        "normalize_unit_diagonal": args.solver.normalize_unit_diagonal,
        "output": args.output.display().to_string(),
    }));
    println!("{}", serde_json::to_string_pretty(&block).unwrap());
    Ok(())
}

pub fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    let mesh = load_input(&args.mesh, args.solver.normalize_unit_diagonal)?;
    let computed = compute_field(&mesh, &args.solver)?;

    let (reference, reference_kind) = match &args.reference {
        Some(path) => (read_distance_csv(path, args.solver.source)?, "csv"),
        None => match baseline::analytic_sphere_distances(&mesh, args.solver.source) {
            Ok(d) => (d, "sphere"),
            Err(BaselineError::NotASphere { .. }) if is_planar(&mesh) => (
                baseline::euclidean_distances(&mesh, args.solver.source)?,
                "euclidean",
            ),
            Err(BaselineError::NotASphere { .. }) => (
                baseline::dijkstra_distances(&mesh, args.solver.source)?,
                "dijkstra",
            ),
            Err(e) => return Err(e.into()),
        },
    };
    if reference.values.len() != mesh.vertex_count() {
        return Err(config_error(format!(
            "reference has {} entries, mesh has {} vertices",
            reference.values.len(),
            mesh.vertex_count()
        )));
    }

    let mut report = baseline::error_report(&computed.distances, &reference)?;
    report.runtime_seconds = computed.elapsed_s;

    let model = args
        .mesh
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let method = match args.solver.method {
        Method::Wave => "wave",
        Method::Heat => "heat",
        Method::Dijkstra => "dijkstra",
    };
    let mut row = String::from(
        "model,method,faces,delta,mean_raw_error,mean_relative_error,max_raw_error,time_s\n",
    );
    let _ = writeln!(
        row,
        "{},{},{},{},{},{},{},{}",
        model,
        method,
        mesh.face_count(),
        args.solver.delta,
        report.mean_raw,
        report.mean_relative,
        report.max_raw,
        report.runtime_seconds
    );
    fs::write(&args.output, row)?;

    if let Some(report_path) = &args.report {
        fs::write(report_path, serde_json::to_string_pretty(&report).unwrap())?;
    }

    let mut block = computed.diagnostics;
    merge(&mut block, json!({
        "command": "compare",
        "mesh": args.mesh.display().to_string(),
        "model": model,
        "faces": mesh.face_count(),
        "reference": reference_kind,
        "mean_raw_error": report.mean_raw,
        "mean_relative_error": report.mean_relative,
        "max_raw_error": report.max_raw,
        "time_s": report.runtime_seconds,
        "output": args.output.display().to_string(),
    }));
    println!("{}", serde_json::to_string_pretty(&block).unwrap());
    Ok(())
}

pub fn cmd_calibrate(args: &CalibrateArgs) -> Result<(), CliError> {
    let mesh = load_input(&args.mesh, args.solver.normalize_unit_diagonal)?;
    let config = wave_config(&args.solver)?;
    let geometry = mesh::compute_face_geometry(&mesh)?;
    let ops = fem::FemOperators::build(&mesh, &geometry)?;
    let factor = wave::wave_system(&ops, &config)?.factorize()?;

    let heights = wave::record_wave_heights(
        &mesh,
        &ops,
        &factor,
        args.solver.source,
        args.iterations,
        &config,
    )?;
    let clean_end = wave::clean_decay_end(&heights);
    let window = config.calibration;
    let reported = wave::fit_decay_exponent(&heights, window.fit_start, window.fit_end);
    let schedule_a = match config.epsilon_exponent {
        EpsilonExponent::Fixed(a) => a,
        EpsilonExponent::Auto => wave::fit_schedule_exponent(
            &heights,
            window.fit_start,
            clean_end.max(window.fit_start + 2),
        )
        .ok_or_else(|| config_error("no usable calibration samples"))?,
    };
    let schedule = wave::EpsilonSchedule {
        c: heights[0] / 2.0,
        a: schedule_a,
    };

    let mut out = String::from("iteration,height,epsilon\n");
    for (idx, h) in heights.iter().enumerate() {
        let _ = writeln!(out, "{},{},{}", idx + 1, h, schedule.value(idx + 1));
    }
    fs::write(&args.output, out)?;

    let block = json!({
        "command": "calibrate",
        "mesh": args.mesh.display().to_string(),
        "source": args.solver.source,
        "delta": args.solver.delta,
        "iterations": args.iterations,
        "clean_decay_end": clean_end,
        "epsilon_c": schedule.c,
        "schedule_exponent": schedule.a,
        "reported_exponent": reported,
        "fit_window": [window.fit_start, window.fit_end],
        "output": args.output.display().to_string(),
    });
    println!("{}", serde_json::to_string_pretty(&block).unwrap());
    Ok(())
}

pub fn cmd_perturb(args: &PerturbArgs) -> Result<(), CliError> {
    if args.noise.is_none() && args.smooth.is_none() && args.sharpen.is_none() {
        return Err(config_error(
            "perturb needs at least one of --noise, --smooth, --sharpen",
        ));
    }
    let mut mesh = mesh::load_mesh_auto(&args.mesh)?;
    let mut applied = Vec::new();
    if let Some(s) = args.noise {
        if s < 0.0 {
            return Err(config_error("--noise must be >= 0"));
        }
        mesh = perturb::add_noise(&mesh, s, args.seed);
        applied.push(json!({"noise": s, "seed": args.seed}));
    }
    if let Some(m) = args.smooth {
        mesh = perturb::umbrella_smooth(&mesh, m);
        applied.push(json!({"smooth": m}));
    }
    if let Some(s) = args.sharpen {
        if s <= 0.0 {
            return Err(config_error("--sharpen must be > 0"));
        }
        mesh = perturb::sharpen(&mesh, s);
        applied.push(json!({"sharpen": s}));
    }
    write_mesh(&mesh, &args.output)?;

    let block = json!({
        "command": "perturb",
        "mesh": args.mesh.display().to_string(),
        "applied": applied,
        "vertices": mesh.vertex_count(),
        "faces": mesh.face_count(),
        "output": args.output.display().to_string(),
    });
    println!("{}", serde_json::to_string_pretty(&block).unwrap());
    Ok(())
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<(), CliError> {
    let mesh = match args.shape {
        Shape::Sphere => shapes::icosphere(args.radius, args.subdivisions),
        Shape::Grid => shapes::grid(args.nx, args.ny, args.width, args.height),
        Shape::Torus => shapes::torus(args.major, args.minor, args.nu, args.nv),
        Shape::Bumpy => shapes::bumpy_sphere(args.radius, args.subdivisions, args.bump),
    };
    write_mesh(&mesh, &args.output)?;
    let block = json!({
        "command": "generate",
        "vertices": mesh.vertex_count(),
        "faces": mesh.face_count(),
        "edges": mesh.edge_count(),
        "output": args.output.display().to_string(),
    });
    println!("{}", serde_json::to_string_pretty(&block).unwrap());
    Ok(())
}

fn write_mesh(mesh: &TriangleMesh, path: &Path) -> Result<(), CliError> {
    match MeshFormat::from_path(path) {
        Some(MeshFormat::Off) => mesh::write_off(mesh, path)?,
        Some(MeshFormat::Obj) => mesh::write_obj(mesh, path)?,
        None => return Err(config_error("output extension must be .off or .obj")),
    }
    Ok(())
}

fn merge(base: &mut serde_json::Value, extra: serde_json::Value) {
    if let (Some(b), Some(e)) = (base.as_object_mut(), extra.as_object()) {
        for (k, v) in e {
            b.insert(k.clone(), v.clone());
        }
    }
}
