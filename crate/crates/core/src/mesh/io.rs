//! Mesh file formats.
//!
//! Native text format (`.mesh`), whitespace separated, `#` starts a comment
//! line, blank lines are ignored:
//!
//! ```text
//! <vertex count> <element count>
//! <x> <y>          one line per vertex
//! <a> <b> <c>      one line per element, 0-based ids, counter-clockwise
//! <tag>            one line per vertex: boundary segment bit set, 0 = interior
//! ```
//!
//! Only alive entities are written; ids are compacted on output.
//!
//! The VTK export is legacy ASCII `UNSTRUCTURED_GRID` with optional per-cell
//! scalars, meant for visual inspection only.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::{BoundaryTag, Mesh};
use crate::error::{AdaptError, Result};

fn compacted(mesh: &Mesh) -> std::borrow::Cow<'_, Mesh> {
    if mesh.alive_vertex_count() == mesh.vertex_count() && mesh.alive_element_count() == mesh.element_count() {
        std::borrow::Cow::Borrowed(mesh)
    } else {
        let mut m = mesh.clone();
        m.compact();
        std::borrow::Cow::Owned(m)
    }
}

pub fn to_native_string(mesh: &Mesh) -> String {
    let mesh = compacted(mesh);
    let mut s = String::with_capacity(mesh.vertex_count() * 48 + mesh.element_count() * 24);
    let _ = writeln!(s, "# adaptix mesh");
    let _ = writeln!(s, "{} {}", mesh.vertex_count(), mesh.element_count());
    for p in mesh.coords() {
        let _ = writeln!(s, "{} {}", p[0], p[1]);
    }
    for t in mesh.elements() {
        let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
    }
    for b in mesh.boundary_tags() {
        let _ = writeln!(s, "{}", b.0);
    }
    s
}

pub fn write_native(mesh: &Mesh, path: &Path) -> Result<()> {
    write_atomic(path, to_native_string(mesh).as_bytes())
}

pub fn parse_native(text: &str, path: &Path) -> Result<Mesh> {
    let err = |line: usize, message: String| AdaptError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    fn fields<T: std::str::FromStr>(line: &str, n: usize) -> std::result::Result<Vec<T>, String>
    where
        T::Err: std::fmt::Display,
    {
        let v: Vec<T> = line
            .split_whitespace()
            .map(|t| t.parse::<T>().map_err(|e| format!("{t:?}: {e}")))
            .collect::<std::result::Result<_, _>>()?;
        if v.len() != n {
            return Err(format!("expected {n} fields, found {}", v.len()));
        }
        Ok(v)
    }

    let (hl, header) = lines.next().ok_or_else(|| err(1, "missing header".into()))?;
    let counts = fields::<usize>(header, 2).map_err(|m| err(hl, m))?;
    let (nv, ne) = (counts[0], counts[1]);

    let mut coords = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or_else(|| err(hl, "truncated vertex section".into()))?;
        let v = fields::<f64>(l, 2).map_err(|m| err(ln, m))?;
        coords.push([v[0], v[1]]);
    }
    let mut elements = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (ln, l) = lines.next().ok_or_else(|| err(hl, "truncated element section".into()))?;
        let v = fields::<u32>(l, 3).map_err(|m| err(ln, m))?;
        elements.push([v[0], v[1], v[2]]);
    }
    let mut boundary = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or_else(|| err(hl, "truncated boundary section".into()))?;
        let v = fields::<u8>(l, 1).map_err(|m| err(ln, m))?;
        boundary.push(BoundaryTag(v[0]));
    }
    if let Some((ln, _)) = lines.next() {
        return Err(err(ln, "trailing data after boundary section".into()));
    }
    Mesh::new(coords, elements, boundary)
}

pub fn read_native(path: &Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path).map_err(|e| AdaptError::io(path, e))?;
    parse_native(&text, path)
}

/// Legacy VTK unstructured grid; `cell_scalars` are `(name, values)` pairs
/// indexed by compacted element order.
pub fn to_vtk_string(mesh: &Mesh, cell_scalars: &[(&str, &[f64])]) -> String {
    let mesh = compacted(mesh);
    let nv = mesh.vertex_count();
    let ne = mesh.element_count();
    let mut s = String::with_capacity(nv * 40 + ne * 30);
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "adaptix mesh");
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {nv} double");
    for p in mesh.coords() {
        let _ = writeln!(s, "{} {} 0", p[0], p[1]);
    }
    let _ = writeln!(s, "CELLS {ne} {}", 4 * ne);
    for t in mesh.elements() {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {ne}");
    for _ in 0..ne {
        s.push_str("5\n");
    }
    if !cell_scalars.is_empty() {
        let _ = writeln!(s, "CELL_DATA {ne}");
        for (name, values) in cell_scalars {
            let _ = writeln!(s, "SCALARS {name} double 1");
            let _ = writeln!(s, "LOOKUP_TABLE default");
            for v in values.iter() {
                let _ = writeln!(s, "{v}");
            }
        }
    }
    s
}

pub fn write_vtk(mesh: &Mesh, cell_scalars: &[(&str, &[f64])], path: &Path) -> Result<()> {
    write_atomic(path, to_vtk_string(mesh, cell_scalars).as_bytes())
}

/// Writes to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| AdaptError::Config(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", file_name.to_string_lossy()));
    std::fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(bytes)?;
            f.sync_all()
        })
        .map_err(|e| AdaptError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| AdaptError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::structured_square_mesh;

    #[test]
    fn native_round_trip() {
        let m = structured_square_mesh(3);
        let text = to_native_string(&m);
        let back = parse_native(&text, Path::new("mem")).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn dead_entities_are_compacted_on_write() {
        let mut m = structured_square_mesh(1);
        m.element_alive[0] = false;
        m.vertex_alive[1] = false;
        let back = parse_native(&to_native_string(&m), Path::new("mem")).unwrap();
        assert_eq!(back.vertex_count(), 3);
        assert_eq!(back.element_count(), 1);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "# c\n2 1\n0 0\n1 x\n";
        match parse_native(bad, Path::new("bad.mesh")).unwrap_err() {
            AdaptError::Parse { line, .. } => assert_eq!(line, 4),
            e => panic!("unexpected {e}"),
        }
        assert!(parse_native("3 1\n0 0\n1 0\n0 1\n0 1 5\n0\n0\n0\n", Path::new("m")).is_err());
    }

    #[test]
    fn vtk_layout() {
        let m = structured_square_mesh(1);
        let q = [0.5, 0.75];
        let s = to_vtk_string(&m, &[("quality", &q)]);
        assert!(s.starts_with("# vtk DataFile Version 3.0\n"));
        assert!(s.contains("POINTS 4 double\n"));
        assert!(s.contains("CELLS 2 8\n3 0 1 3\n3 0 3 2\n"));
        assert!(s.contains("CELL_TYPES 2\n5\n5\n"));
        assert!(s.contains("SCALARS quality double 1\nLOOKUP_TABLE default\n0.5\n0.75\n"));
    }
}
