//! Level-set polylines of a per-vertex scalar field, as a segment soup
//! per level. Each face contributes at most one segment per level, by
//! linear interpolation along the crossed edges.

use std::fmt::Write as _;

use crate::mesh::{TriangleMesh, Vec3};

/// Segments (pairs of points) of one isolevel.
#[derive(Debug, Clone)]
pub struct IsoContour {
    pub level: f64,
    pub segments: Vec<(Vec3, Vec3)>,
}

/// Extract `count` evenly spaced levels strictly between the field's
/// min and max.
pub fn extract_isocontours(mesh: &TriangleMesh, values: &[f64], count: usize) -> Vec<IsoContour> {
    assert_eq!(values.len(), mesh.vertex_count());
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(max > min) || count == 0 {
        return Vec::new();
    }
    (1..=count)
        .map(|k| {
            let level = min + (max - min) * k as f64 / (count + 1) as f64;
            IsoContour {
                level,
                segments: contour_at(mesh, values, level),
            }
        })
        .collect()
}

fn contour_at(mesh: &TriangleMesh, values: &[f64], level: f64) -> Vec<(Vec3, Vec3)> {
    let mut segments = Vec::new();
    for f in mesh.faces() {
        let mut hits: Vec<Vec3> = Vec::with_capacity(2);
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            let (va, vb) = (values[a], values[b]);
            if (va < level) != (vb < level) {
                let t = (level - va) / (vb - va);
                hits.push(mesh.vertices()[a] + (mesh.vertices()[b] - mesh.vertices()[a]) * t);
            }
        }
        if hits.len() == 2 {
            segments.push((hits[0], hits[1]));
        }
    }
    segments
}

/// OBJ line-soup text: vertices plus `l` elements per segment.
pub fn contours_to_obj(contours: &[IsoContour]) -> String {
    let mut out = String::new();
    let mut index = 1usize;
    for c in contours {
        let _ = writeln!(out, "# level {}", c.level);
        for (a, b) in &c.segments {
            let _ = writeln!(out, "v {} {} {}", a.x, a.y, a.z);
            let _ = writeln!(out, "v {} {} {}", b.x, b.y, b.z);
            let _ = writeln!(out, "l {} {}", index, index + 1);
            index += 2;
        }
    }
    out
}
