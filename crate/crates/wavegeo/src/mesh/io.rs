//! ASCII OFF and OBJ readers and writers. Triangles only; quads and
//! higher polygons are rejected rather than triangulated.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{MeshError, TriangleMesh, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "off" => Some(MeshFormat::Off),
            "obj" => Some(MeshFormat::Obj),
            _ => None,
        }
    }
}

pub fn load_mesh(path: &Path, format: MeshFormat) -> Result<TriangleMesh, MeshError> {
    let text = fs::read_to_string(path)?;
    match format {
        MeshFormat::Off => parse_off(&text),
        MeshFormat::Obj => parse_obj(&text),
    }
}

/// Load with the format inferred from the file extension.
pub fn load_mesh_auto(path: &Path) -> Result<TriangleMesh, MeshError> {
    let format = MeshFormat::from_path(path).ok_or_else(|| MeshError::Parse {
        line: 0,
        message: format!("cannot infer mesh format from path {}", path.display()),
    })?;
    load_mesh(path, format)
}

fn parse_err(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse {
        line,
        message: message.into(),
    }
}

/// Lines with comments stripped, paired with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

pub fn parse_off(text: &str) -> Result<TriangleMesh, MeshError> {
    let mut lines = content_lines(text);

    let (lno, header) = lines.next().ok_or_else(|| parse_err(0, "empty file"))?;
    let mut header_tokens = header.split_whitespace();
    if header_tokens.next() != Some("OFF") {
        return Err(parse_err(lno, "missing OFF header"));
    }
    // Counts may share the header line or sit on the next one.
    let rest: Vec<&str> = header_tokens.collect();
    let (counts_line, counts): (usize, Vec<&str>) = if rest.is_empty() {
        let (lno, l) = lines
            .next()
            .ok_or_else(|| parse_err(lno, "missing element counts"))?;
        (lno, l.split_whitespace().collect())
    } else {
        (lno, rest)
    };
    if counts.len() < 2 {
        return Err(parse_err(counts_line, "expected vertex and face counts"));
    }
    let nv: usize = counts[0]
        .parse()
        .map_err(|_| parse_err(counts_line, "bad vertex count"))?;
    let nf: usize = counts[1]
        .parse()
        .map_err(|_| parse_err(counts_line, "bad face count"))?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (lno, l) = lines
            .next()
            .ok_or_else(|| parse_err(counts_line, "unexpected end of vertex list"))?;
        let mut it = l.split_whitespace();
        let mut coord = [0.0f64; 3];
        for c in &mut coord {
            *c = it
                .next()
                .ok_or_else(|| parse_err(lno, "vertex needs 3 coordinates"))?
                .parse()
                .map_err(|_| parse_err(lno, "bad vertex coordinate"))?;
        }
        vertices.push(Vec3::new(coord[0], coord[1], coord[2]));
    }

    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (lno, l) = lines
            .next()
            .ok_or_else(|| parse_err(counts_line, "unexpected end of face list"))?;
        let mut it = l.split_whitespace();
        let arity: usize = it
            .next()
            .ok_or_else(|| parse_err(lno, "empty face line"))?
            .parse()
            .map_err(|_| parse_err(lno, "bad face vertex count"))?;
        if arity != 3 {
            return Err(MeshError::NonTriangle { line: lno, arity });
        }
        let mut f = [0usize; 3];
        for v in &mut f {
            *v = it
                .next()
                .ok_or_else(|| parse_err(lno, "face needs 3 indices"))?
                .parse()
                .map_err(|_| parse_err(lno, "bad face index"))?;
        }
        // Trailing tokens (face colors) are ignored.
        faces.push(f);
    }

    TriangleMesh::new(vertices, faces)
}

pub fn parse_obj(text: &str) -> Result<TriangleMesh, MeshError> {
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();

    for (lno, line) in content_lines(text) {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let mut coord = [0.0f64; 3];
                for c in &mut coord {
                    *c = it
                        .next()
                        .ok_or_else(|| parse_err(lno, "vertex needs 3 coordinates"))?
                        .parse()
                        .map_err(|_| parse_err(lno, "bad vertex coordinate"))?;
                }
                vertices.push(Vec3::new(coord[0], coord[1], coord[2]));
            }
            Some("f") => {
                let refs: Vec<&str> = it.collect();
                if refs.len() != 3 {
                    return Err(MeshError::NonTriangle {
                        line: lno,
                        arity: refs.len(),
                    });
                }
                let mut f = [0usize; 3];
                for (k, r) in refs.iter().enumerate() {
                    // "i", "i/t", "i//n", "i/t/n" -> vertex index before the first slash
                    let idx_str = r.split('/').next().unwrap_or("");
                    let idx: i64 = idx_str
                        .parse()
                        .map_err(|_| parse_err(lno, "bad face index"))?;
                    let resolved = if idx > 0 {
                        (idx - 1) as usize
                    } else if idx < 0 {
                        let n = vertices.len() as i64 + idx;
                        if n < 0 {
                            return Err(parse_err(lno, "negative index out of range"));
                        }
                        n as usize
                    } else {
                        return Err(parse_err(lno, "OBJ indices are 1-based"));
                    };
                    f[k] = resolved;
                }
                faces.push(f);
            }
            // Normals, texcoords, groups, materials: ignored.
            _ => {}
        }
    }

    TriangleMesh::new(vertices, faces)
}

/// OFF text for a mesh. Coordinates use Rust's shortest round-trip float
/// formatting so a save/load cycle reproduces positions bit-for-bit.
pub fn off_string(mesh: &TriangleMesh) -> String {
    let mut out = String::new();
    out.push_str("OFF\n");
    let _ = writeln!(
        out,
        "{} {} {}",
        mesh.vertex_count(),
        mesh.face_count(),
        mesh.edge_count()
    );
    for p in mesh.vertices() {
        let _ = writeln!(out, "{} {} {}", p.x, p.y, p.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(out, "3 {} {} {}", f[0], f[1], f[2]);
    }
    out
}

pub fn write_off(mesh: &TriangleMesh, path: &Path) -> Result<(), MeshError> {
    fs::write(path, off_string(mesh))?;
    Ok(())
}

pub fn obj_string(mesh: &TriangleMesh) -> String {
    let mut out = String::new();
    for p in mesh.vertices() {
        let _ = writeln!(out, "v {} {} {}", p.x, p.y, p.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    out
}

pub fn write_obj(mesh: &TriangleMesh, path: &Path) -> Result<(), MeshError> {
    fs::write(path, obj_string(mesh))?;
    Ok(())
}

/// ASCII PLY with one scalar property (`quality`) per vertex.
pub fn write_ply_with_scalar(
    mesh: &TriangleMesh,
    values: &[f64],
    path: &Path,
) -> Result<(), MeshError> {
    assert_eq!(values.len(), mesh.vertex_count());
    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(out, "element vertex {}", mesh.vertex_count());
    out.push_str(
        "property double x\nproperty double y\nproperty double z\nproperty double quality\n",
    );
    let _ = writeln!(out, "element face {}", mesh.face_count());
    out.push_str("property list uchar int vertex_indices\nend_header\n");
    for (p, q) in mesh.vertices().iter().zip(values) {
        let _ = writeln!(out, "{} {} {} {}", p.x, p.y, p.z, q);
    }
    for f in mesh.faces() {
        let _ = writeln!(out, "3 {} {} {}", f[0], f[1], f[2]);
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn off_single_triangle() {
        let text = "OFF\n3 1 3\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";
        let m = parse_off(text).unwrap();
        assert_eq!(m.vertex_count(), 3);
        assert_eq!(m.face_count(), 1);
        assert_eq!(m.edge_count(), 3);
    }

    #[test]
    fn off_with_comments_and_blank_lines() {
        let text = "OFF\n# a comment\n\n3 1 3\n0 0 0 # inline\n1 0 0\n0 1 0\n3 0 1 2\n";
        let m = parse_off(text).unwrap();
        assert_eq!(m.vertex_count(), 3);
    }

    #[test]
    fn off_rejects_quads() {
        let text = "OFF\n4 1 4\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        assert!(matches!(
            parse_off(text),
            Err(MeshError::NonTriangle { arity: 4, .. })
        ));
    }

    #[test]
    fn off_rejects_non_manifold() {
        let text = "OFF\n5 3 0\n0 0 0\n1 0 0\n0 1 0\n0 -1 0\n0 0 1\n3 0 1 2\n3 0 1 3\n3 0 1 4\n";
        assert!(matches!(parse_off(text), Err(MeshError::NonManifold { .. })));
    }

    #[test]
    fn off_missing_header() {
        assert!(matches!(parse_off("3 1 3\n"), Err(MeshError::Parse { .. })));
    }

    #[test]
    fn obj_round_trip_with_slash_forms() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1/1/1 2//1 3\n";
        let m = parse_obj(text).unwrap();
        assert_eq!(m.face_count(), 1);
        assert_eq!(m.faces()[0], [0, 1, 2]);
    }

    #[test]
    fn obj_negative_indices() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n";
        let m = parse_obj(text).unwrap();
        assert_eq!(m.faces()[0], [0, 1, 2]);
    }

    #[test]
    fn off_save_load_is_bit_exact() {
        let m = crate::shapes::icosphere(0.731, 2);
        let text = off_string(&m);
        let re = parse_off(&text).unwrap();
        assert_eq!(re.faces(), m.faces());
        for (a, b) in re.vertices().iter().zip(m.vertices()) {
            assert_eq!(a.x.to_bits(), b.x.to_bits());
            assert_eq!(a.y.to_bits(), b.y.to_bits());
            assert_eq!(a.z.to_bits(), b.z.to_bits());
        }
    }
}
