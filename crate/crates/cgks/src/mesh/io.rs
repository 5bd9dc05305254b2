//! ASCII mesh format.
//!
//! ```text
//! cgksmesh 1
//! vertices N
//! x y z                 (N lines)
//! cells M
//! kind v0 v1 ...        (M lines, kind in {tet, pyr, pri, hex})
//! boundary K
//! v0 v1 v2 [v3] tag     (K lines)
//! periodic tagA tagB axis
//! ```

use super::{build_mesh, CellKind, Mesh, MeshInput, Neighbor};
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

pub fn parse_mesh(text: &str) -> Result<Mesh> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let bad = |msg: &str| Error::MeshFormat(msg.to_string());

    let header = lines.next().ok_or_else(|| bad("empty mesh file"))?;
    if header != "cgksmesh 1" {
        return Err(bad("expected header 'cgksmesh 1'"));
    }

    let expect_count = |line: Option<&str>, word: &str| -> Result<usize> {
        let line = line.ok_or_else(|| bad("unexpected end of file"))?;
        let mut it = line.split_whitespace();
        if it.next() != Some(word) {
            return Err(bad(&format!("expected '{word} N', got '{line}'")));
        }
        it.next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(&format!("malformed {word} count")))
    };

    let nv = expect_count(lines.next(), "vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let line = lines.next().ok_or_else(|| bad("missing vertex line"))?;
        let mut it = line.split_whitespace();
        let mut v = [0.0; 3];
        for x in v.iter_mut() {
            *x = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("malformed vertex line"))?;
        }
        vertices.push(v);
    }

    let nc = expect_count(lines.next(), "cells")?;
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let line = lines.next().ok_or_else(|| bad("missing cell line"))?;
        let mut it = line.split_whitespace();
        let kind = it
            .next()
            .and_then(CellKind::from_name)
            .ok_or_else(|| bad("unknown cell kind"))?;
        let ids: Vec<usize> = it
            .map(|s| s.parse().map_err(|_| bad("malformed cell vertex id")))
            .collect::<Result<_>>()?;
        if ids.len() != kind.n_vertices() {
            return Err(bad(&format!(
                "{} cell needs {} vertices, got {}",
                kind.name(),
                kind.n_vertices(),
                ids.len()
            )));
        }
        if ids.iter().any(|&v| v >= nv) {
            return Err(bad("cell vertex id out of range"));
        }
        cells.push((kind, ids));
    }

    let mut boundary = Vec::new();
    let mut periodic = Vec::new();
    if let Some(line) = lines.next() {
        let nb = expect_count(Some(line), "boundary")?;
        for _ in 0..nb {
            let line = lines.next().ok_or_else(|| bad("missing boundary line"))?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() < 4 {
                return Err(bad("boundary line needs at least 3 vertex ids and a tag"));
            }
            let (ids, tag) = toks.split_at(toks.len() - 1);
            let ids: Vec<usize> = ids
                .iter()
                .map(|s| s.parse().map_err(|_| bad("malformed boundary vertex id")))
                .collect::<Result<_>>()?;
            if ids.len() > 4 || ids.iter().any(|&v| v >= nv) {
                return Err(bad("malformed boundary face"));
            }
            boundary.push((ids, tag[0].to_string()));
        }
        for line in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 4 || toks[0] != "periodic" {
                return Err(bad(&format!("expected periodic declaration, got '{line}'")));
            }
            let axis = match toks[3] {
                "x" | "0" => 0,
                "y" | "1" => 1,
                "z" | "2" => 2,
                other => return Err(bad(&format!("unknown periodic axis '{other}'"))),
            };
            periodic.push((toks[1].to_string(), toks[2].to_string(), axis));
        }
    }

    build_mesh(
        MeshInput {
            vertices,
            cells,
            boundary,
            periodic,
        },
        None,
    )
}

pub fn format_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    out.push_str("cgksmesh 1\n");
    let _ = writeln!(out, "vertices {}", mesh.vertices.len());
    for v in &mesh.vertices {
        let _ = writeln!(out, "{} {} {}", v[0], v[1], v[2]);
    }
    let _ = writeln!(out, "cells {}", mesh.cells.len());
    for c in &mesh.cells {
        let _ = write!(out, "{}", c.kind.name());
        for v in &c.vertices {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    let bfaces: Vec<_> = mesh.faces.iter().filter(|f| f.is_boundary()).collect();
    let _ = writeln!(out, "boundary {}", bfaces.len());
    for f in bfaces {
        for v in &f.vertices {
            let _ = write!(out, "{v} ");
        }
        if let Neighbor::Boundary { tag, .. } = f.neighbor {
            let _ = writeln!(out, "{}", mesh.boundary_tags[tag]);
        }
    }
    for (a, b, axis) in &mesh.periodic_decls {
        let _ = writeln!(out, "periodic {a} {b} {}", ["x", "y", "z"][*axis]);
    }
    out
}

pub fn read_mesh_ascii(path: &Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading mesh {}", path.display()), e))?;
    parse_mesh(&text)
}

pub fn write_mesh_ascii(mesh: &Mesh, path: &Path) -> Result<()> {
    std::fs::write(path, format_mesh(mesh))
        .map_err(|e| Error::io(format!("writing mesh {}", path.display()), e))
}
