//! Command-line interface definition.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "wavegeo",
    about = "Approximate geodesic distances on triangle meshes via wave propagation",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Compute per-vertex distances from a source vertex.
    Compute(ComputeArgs),
    /// Compare a method against a reference; emit a table row and report.
    Compare(CompareArgs),
    /// Record wave heights per iteration and fit the decay exponent.
    Calibrate(CalibrateArgs),
    /// Apply noise, smoothing, or sharpening to a mesh.
    Perturb(PerturbArgs),
    /// Write a procedural test mesh.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Wave,
    Heat,
    Dijkstra,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Divergence {
    Edge,
    Face,
}

/// Shared solver flags.
#[derive(Args)]
pub struct SolverArgs {
    /// Distance method.
    #[arg(long, value_enum, default_value = "wave")]
    pub method: Method,

    /// Divergence backend for the Poisson right-hand side.
    #[arg(long, value_enum, default_value = "edge")]
    pub divergence: Divergence,

    /// Source vertex id.
    #[arg(long, default_value_t = 0)]
    pub source: usize,

    /// Wave time step.
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,

    /// Wave speed coefficient.
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,

    /// Threshold decay exponent: "auto" or "exponent:<a>" with a < 0.
    #[arg(long, default_value = "auto")]
    pub epsilon: String,

    /// Fraction of vertices that must record a crossing.
    #[arg(long, default_value_t = 1.0)]
    pub coverage_target: f64,

    /// Iteration cap (default: 50 / delta).
    #[arg(long)]
    pub max_iterations: Option<usize>,

    /// Heat-method time-step coefficient (t = t_coef * mean_edge^2).
    #[arg(long, default_value_t = 1.0)]
    pub t_coef: f64,

    /// Rescale the mesh so its bounding-box diagonal is 1 before
    /// computing anything.
    #[arg(long)]
    pub normalize_unit_diagonal: bool,
}

#[derive(Args)]
pub struct ComputeArgs {
    /// Input mesh (.off or .obj).
    pub mesh: PathBuf,

    #[command(flatten)]
    pub solver: SolverArgs,

    /// Distance CSV output path (vertex_id,distance).
    #[arg(long, short, default_value = "distances.csv")]
    pub output: PathBuf,

    /// Optional ASCII PLY with the distance stored per vertex.
    #[arg(long)]
    pub ply: Option<PathBuf>,

    /// Optional isocontour OBJ line soup.
    #[arg(long)]
    pub isocontours: Option<PathBuf>,

    /// Number of isocontour levels.
    #[arg(long, default_value_t = 12)]
    pub levels: usize,

    /// Optional per-iteration trace CSV (iteration, max height,
    /// epsilon, coverage).
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Args)]
pub struct CompareArgs {
    /// Input mesh (.off or .obj).
    pub mesh: PathBuf,

    #[command(flatten)]
    pub solver: SolverArgs,

    /// Reference distances CSV (vertex_id,distance). When absent, an
    /// analytic oracle is used for spheres and flat grids, and edge
    /// Dijkstra otherwise.
    #[arg(long)]
    pub reference: Option<PathBuf>,

    /// Table row CSV output (model, faces, delta, errors, time).
    #[arg(long, short, default_value = "compare.csv")]
    pub output: PathBuf,

    /// Full error report JSON output.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args)]
pub struct CalibrateArgs {
    /// Input mesh (.off or .obj).
    pub mesh: PathBuf,

    #[command(flatten)]
    pub solver: SolverArgs,

    /// Number of recorded iterations.
    #[arg(long, default_value_t = 50)]
    pub iterations: usize,

    /// Per-iteration CSV output (iteration, height, epsilon).
    #[arg(long, short, default_value = "calibration.csv")]
    pub output: PathBuf,
}

#[derive(Args)]
pub struct PerturbArgs {
    /// Input mesh (.off or .obj).
    pub mesh: PathBuf,

    /// Noise scale s (displacement up to s * median incident edge
    /// length per vertex).
    #[arg(long)]
    pub noise: Option<f64>,

    /// RNG seed for noise.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Umbrella smoothing iterations.
    #[arg(long)]
    pub smooth: Option<usize>,

    /// Sharpen kernel scale s (Gaussian radius s * median incident
    /// edge length).
    #[arg(long)]
    pub sharpen: Option<f64>,

    /// Output mesh path (.off or .obj).
    #[arg(long, short, default_value = "perturbed.off")]
    pub output: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Sphere,
    Grid,
    Torus,
    Bumpy,
}

#[derive(Args)]
pub struct GenerateArgs {
    /// Shape kind.
    #[arg(value_enum)]
    pub shape: Shape,

    /// Output mesh path (.off or .obj).
    #[arg(long, short, default_value = "mesh.off")]
    pub output: PathBuf,

    /// Sphere/bumpy radius.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,

    /// Sphere/bumpy subdivision level.
    #[arg(long, default_value_t = 4)]
    pub subdivisions: u32,

    /// Grid vertex counts.
    #[arg(long, default_value_t = 50)]
    pub nx: usize,
    #[arg(long, default_value_t = 50)]
    pub ny: usize,

    /// Grid extents.
    #[arg(long, default_value_t = 4.0)]
    pub width: f64,
    #[arg(long, default_value_t = 4.0)]
    pub height: f64,

    /// Torus radii and resolution.
    #[arg(long, default_value_t = 1.0)]
    pub major: f64,
    #[arg(long, default_value_t = 0.35)]
    pub minor: f64,
    #[arg(long, default_value_t = 48)]
    pub nu: usize,
    #[arg(long, default_value_t = 24)]
    pub nv: usize,

    /// Bumpy-sphere displacement amplitude.
    #[arg(long, default_value_t = 0.08)]
    pub bump: f64,
}
