use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point3;
use crate::mesh::{SurfaceMesh, Tag};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MeshFormat {
    Obj,
    /// Binary little-endian STL.
    Stl,
    /// ASCII PLY.
    Ply,
}

impl MeshFormat {
    pub fn extension(self) -> &'static str {
        match self {
            MeshFormat::Obj => "obj",
            MeshFormat::Stl => "stl",
            MeshFormat::Ply => "ply",
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("obj") => Ok(MeshFormat::Obj),
            Some("stl") => Ok(MeshFormat::Stl),
            Some("ply") => Ok(MeshFormat::Ply),
            _ => Err(Error::Io(format!("unknown mesh format of {}", path.display()))),
        }
    }
}

/// Nine significant digits in positional notation; negative zero prints as zero.
pub fn format_real(x: f64) -> String {
    let x = x + 0.0;
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Coordinates as they read back from a text export.
pub fn snap_to_export_precision(mesh: &mut SurfaceMesh<f64>) {
    let snap = |x: f64| format_real(x).parse().unwrap_or(x);
    for v in &mut mesh.vertices {
        *v = Point3::new(snap(v.x), snap(v.y), snap(v.z));
    }
}

pub fn obj_string(mesh: &SurfaceMesh<f64>) -> String {
    let mut s = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(s, "v {} {} {}", format_real(v.x), format_real(v.y), format_real(v.z));
    }
    for t in &mesh.triangles {
        let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    s
}

pub fn ply_string(mesh: &SurfaceMesh<f64>) -> String {
    let mut s = String::new();
    s.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(s, "element vertex {}", mesh.vertices.len());
    s.push_str("property double x\nproperty double y\nproperty double z\n");
    let _ = writeln!(s, "element face {}", mesh.triangles.len());
    s.push_str("property list uchar int vertex_indices\nend_header\n");
    for v in &mesh.vertices {
        let _ = writeln!(s, "{} {} {}", format_real(v.x), format_real(v.y), format_real(v.z));
    }
    for t in &mesh.triangles {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    s
}

const STL_HEADER: &[u8] = b"defectforge binary STL";

pub fn stl_bytes(mesh: &SurfaceMesh<f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(84 + 50 * mesh.triangles.len());
    let mut header = [0u8; 80];
    header[..STL_HEADER.len()].copy_from_slice(STL_HEADER);
    out.extend_from_slice(&header);
    out.extend_from_slice(&(mesh.triangles.len() as u32).to_le_bytes());
    for t in &mesh.triangles {
        let [a, b, c] = t.map(|i| mesh.vertices[i]);
        let n = (b - a).cross(c - a);
        let len = n.norm();
        let n = if len > 0.0 { n * (1.0 / len) } else { n };
        for p in [n, a, b, c] {
            for x in [p.x, p.y, p.z] {
                out.extend_from_slice(&(x as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    out
}

pub fn mesh_bytes(mesh: &SurfaceMesh<f64>, format: MeshFormat) -> Vec<u8> {
    match format {
        MeshFormat::Obj => obj_string(mesh).into_bytes(),
        MeshFormat::Stl => stl_bytes(mesh),
        MeshFormat::Ply => ply_string(mesh).into_bytes(),
    }
}

pub fn export_mesh(mesh: &SurfaceMesh<f64>, format: MeshFormat, path: &Path) -> Result<()> {
    std::fs::write(path, mesh_bytes(mesh, format)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn parse_err(source: &str, line: usize, message: impl std::fmt::Display) -> Error {
    Error::Parse {
        source_name: source.to_string(),
        message: format!("line {line}: {message}"),
    }
}

fn real(source: &str, line: usize, tok: Option<&str>) -> Result<f64> {
    tok.ok_or_else(|| parse_err(source, line, "missing coordinate"))?
        .parse()
        .map_err(|e| parse_err(source, line, e))
}

/// Vertices and triangular faces of an OBJ text. Polygonal faces are fanned;
/// texture and normal references are ignored.
pub fn parse_obj(text: &str, source: &str) -> Result<SurfaceMesh<f64>> {
    let mut m = SurfaceMesh::new();
    let mut faces = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let no = no + 1;
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let p = Point3::new(real(source, no, it.next())?, real(source, no, it.next())?, real(source, no, it.next())?);
                m.add_vertex(p);
            }
            Some("f") => {
                let idx = it
                    .map(|t| {
                        let i: i64 = t
                            .split('/')
                            .next()
                            .unwrap_or("")
                            .parse()
                            .map_err(|e| parse_err(source, no, e))?;
                        Ok((no, i))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if idx.len() < 3 {
                    return Err(parse_err(source, no, "face with fewer than three vertices"));
                }
                faces.push(idx);
            }
            _ => {}
        }
    }
    let n = m.vertices.len() as i64;
    for f in faces {
        let resolve = |(no, i): (usize, i64)| {
            let k = if i < 0 { n + i } else { i - 1 };
            if (0..n).contains(&k) {
                Ok(k as usize)
            } else {
                Err(parse_err(source, no, format!("vertex index {i} out of range")))
            }
        };
        let ids = f.into_iter().map(resolve).collect::<Result<Vec<_>>>()?;
        for k in 1..ids.len() - 1 {
            m.add_triangle([ids[0], ids[k], ids[k + 1]], Tag::Surface);
        }
    }
    Ok(m)
}

/// ASCII PLY with a vertex element (x, y, z first) and a face list element.
pub fn parse_ply(text: &str, source: &str) -> Result<SurfaceMesh<f64>> {
    let mut lines = text.lines().enumerate();
    let (mut nv, mut nf) = (None, None);
    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(parse_err(source, 1, "missing ply magic")),
    }
    for (no, line) in lines.by_ref() {
        let t: Vec<&str> = line.split_whitespace().collect();
        match t.as_slice() {
            ["format", f, ..] if *f != "ascii" => return Err(parse_err(source, no + 1, "only ascii PLY is read")),
            ["element", "vertex", n] => nv = Some(n.parse::<usize>().map_err(|e| parse_err(source, no + 1, e))?),
            ["element", "face", n] => nf = Some(n.parse::<usize>().map_err(|e| parse_err(source, no + 1, e))?),
            ["end_header"] => break,
            _ => {}
        }
    }
    let (nv, nf) = (
        nv.ok_or_else(|| parse_err(source, 0, "no vertex element"))?,
        nf.unwrap_or(0),
    );
    let mut m = SurfaceMesh::new();
    for _ in 0..nv {
        let (no, line) = lines.next().ok_or_else(|| parse_err(source, 0, "truncated vertex list"))?;
        let mut it = line.split_whitespace();
        let p = Point3::new(real(source, no + 1, it.next())?, real(source, no + 1, it.next())?, real(source, no + 1, it.next())?);
        m.add_vertex(p);
    }
    for _ in 0..nf {
        let (no, line) = lines.next().ok_or_else(|| parse_err(source, 0, "truncated face list"))?;
        let v: Vec<usize> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|e| parse_err(source, no + 1, e)))
            .collect::<Result<_>>()?;
        let Some((&k, ids)) = v.split_first() else {
            return Err(parse_err(source, no + 1, "empty face"));
        };
        if k < 3 || ids.len() != k || ids.iter().any(|&i| i >= nv) {
            return Err(parse_err(source, no + 1, "malformed face"));
        }
        for j in 1..k - 1 {
            m.add_triangle([ids[0], ids[j], ids[j + 1]], Tag::Surface);
        }
    }
    Ok(m)
}

/// Binary STL; facet corners with identical coordinates share a vertex.
pub fn parse_stl(bytes: &[u8], source: &str) -> Result<SurfaceMesh<f64>> {
    if bytes.len() < 84 {
        return Err(parse_err(source, 0, "shorter than the STL header"));
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    if bytes.len() != 84 + 50 * count {
        return Err(parse_err(source, 0, format!("{count} facets need {} bytes, got {}", 84 + 50 * count, bytes.len())));
    }
    let mut m = SurfaceMesh::new();
    let mut ids: HashMap<[u32; 3], usize> = HashMap::new();
    for f in 0..count {
        let base = 84 + 50 * f + 12;
        let mut tri = [0usize; 3];
        for (k, slot) in tri.iter_mut().enumerate() {
            let o = base + 12 * k;
            let c: [f32; 3] = std::array::from_fn(|a| f32::from_le_bytes(bytes[o + 4 * a..o + 4 * a + 4].try_into().unwrap()));
            *slot = *ids.entry(c.map(f32::to_bits)).or_insert_with(|| {
                m.add_vertex(Point3::new(c[0] as f64, c[1] as f64, c[2] as f64))
            });
        }
        m.add_triangle(tri, Tag::Surface);
    }
    Ok(m)
}

pub fn parse_mesh(bytes: &[u8], format: MeshFormat, source: &str) -> Result<SurfaceMesh<f64>> {
    let text = || std::str::from_utf8(bytes).map_err(|e| parse_err(source, 0, e));
    match format {
        MeshFormat::Obj => parse_obj(text()?, source),
        MeshFormat::Ply => parse_ply(text()?, source),
        MeshFormat::Stl => parse_stl(bytes, source),
    }
}

pub fn import_mesh(path: &Path) -> Result<SurfaceMesh<f64>> {
    let format = MeshFormat::from_path(path)?;
    let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_mesh(&bytes, format, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetra() -> SurfaceMesh<f64> {
        let mut m = SurfaceMesh::new();
        for p in [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
            m.add_vertex(Point3::new(p[0], p[1], p[2]));
        }
        for t in [[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]] {
            m.add_triangle(t, Tag::Surface);
        }
        m
    }

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_real(1.0), "1.00000000");
        assert_eq!(format_real(-0.0), "0");
        assert_eq!(format_real(0.0123456789123), "0.0123456789");
        assert_eq!(format_real(12345.678912), "12345.6789");
        assert_eq!(format_real(-2.5e-7), "-0.000000250000000");
    }

    #[test]
    fn tetrahedron_sizes() {
        let obj = obj_string(&tetra());
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 4);
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 4);
        assert_eq!(stl_bytes(&tetra()).len(), 284);
    }

    #[test]
    fn formats_round_trip() {
        let m = tetra();
        for f in [MeshFormat::Obj, MeshFormat::Stl, MeshFormat::Ply] {
            let back = parse_mesh(&mesh_bytes(&m, f), f, "test").unwrap();
            let corners = |m: &SurfaceMesh<f64>| -> Vec<[Point3<f64>; 3]> {
                m.triangles.iter().map(|t| t.map(|i| m.vertices[i])).collect()
            };
            assert_eq!(corners(&back), corners(&m), "{f:?}");
            assert_eq!(back.vertices.len(), 4, "{f:?}");
        }
    }

    #[test]
    fn obj_errors_carry_the_line() {
        let e = parse_obj("v 0 0 0\nv 1 x 0\n", "bad.obj").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        assert!(parse_obj("v 0 0 0\nf 1 2 3\n", "bad.obj").is_err());
    }
}
