//! Approximate single-source geodesic distances on manifold triangle
//! meshes by propagating a discretized wave from the source, recording
//! when the wavefront first crosses a decaying threshold at each vertex,
//! and integrating the normalized gradient of that pseudo-distance with
//! a single Poisson solve.
//!
//! Both linear systems involved (the implicit time step and the Poisson
//! solve) are factored once per mesh and reused, so the per-iteration
//! cost is a pair of sparse triangular solves.
//!
//! ```
//! use wavegeo::{shapes, wave::WaveConfig, geodesic::{wave_geodesics, DivergenceBackend}};
//!
//! let mesh = shapes::icosphere(1.0, 3);
//! let run = wave_geodesics(&mesh, 0, &WaveConfig::default(), DivergenceBackend::Edge).unwrap();
//! assert_eq!(run.distances.values[0], 0.0);
//! ```

pub mod baseline;
pub mod fem;
pub mod geodesic;
pub mod isocontour;
pub mod linalg;
pub mod mesh;
pub mod perturb;
pub mod shapes;
pub mod wave;

pub use geodesic::{wave_geodesics, DistanceField, DivergenceBackend, GeodesicRun};
pub use mesh::{load_mesh, load_mesh_auto, MeshError, TriangleMesh, Vec3};
pub use wave::WaveConfig;
