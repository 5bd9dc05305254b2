//! Built-in generators for the accuracy-test meshes: structured hexahedral
//! boxes and the deterministic hex/prism hybrid cube.

use super::{build_mesh, CellKind, Mesh, MeshInput, VertexId};
use crate::error::{Error, Result};
use crate::math::Vec3;

const TAGS: [&str; 6] = ["xmin", "xmax", "ymin", "ymax", "zmin", "zmax"];

fn box_tagger(lo: Vec3, hi: Vec3) -> impl Fn(Vec3) -> String {
    move |c: Vec3| {
        let tol: Vec3 = std::array::from_fn(|d| 1e-9 * (hi[d] - lo[d]));
        for d in 0..3 {
            if (c[d] - lo[d]).abs() < tol[d] {
                return TAGS[2 * d].to_string();
            }
            if (c[d] - hi[d]).abs() < tol[d] {
                return TAGS[2 * d + 1].to_string();
            }
        }
        "untagged".to_string()
    }
}

fn periodic_decls(periodic: [bool; 3]) -> Vec<(String, String, usize)> {
    (0..3)
        .filter(|&d| periodic[d])
        .map(|d| (TAGS[2 * d].to_string(), TAGS[2 * d + 1].to_string(), d))
        .collect()
}

fn grid_vertices(n: [usize; 3], lo: Vec3, hi: Vec3) -> Vec<Vec3> {
    let mut vertices = Vec::with_capacity((n[0] + 1) * (n[1] + 1) * (n[2] + 1));
    for k in 0..=n[2] {
        for j in 0..=n[1] {
            for i in 0..=n[0] {
                vertices.push([
                    lo[0] + (hi[0] - lo[0]) * i as f64 / n[0] as f64,
                    lo[1] + (hi[1] - lo[1]) * j as f64 / n[1] as f64,
                    lo[2] + (hi[2] - lo[2]) * k as f64 / n[2] as f64,
                ]);
            }
        }
    }
    vertices
}

fn check_box(n: [usize; 3], lo: Vec3, hi: Vec3) -> Result<()> {
    for d in 0..3 {
        if hi[d] - lo[d] <= 0.0 {
            return Err(Error::MeshFormat(format!(
                "domain extent along axis {d} is not positive"
            )));
        }
        if n[d] < 2 {
            return Err(Error::MeshFormat("need at least 2 cells per axis".into()));
        }
    }
    Ok(())
}

/// Uniform hexahedral box mesh with n[d] cells along each axis.
pub fn build_structured_hex(
    n: [usize; 3],
    lo: Vec3,
    hi: Vec3,
    periodic: [bool; 3],
) -> Result<Mesh> {
    check_box(n, lo, hi)?;
    let vid = |i: usize, j: usize, k: usize| -> VertexId {
        i + (n[0] + 1) * (j + (n[1] + 1) * k)
    };
    let mut cells = Vec::with_capacity(n[0] * n[1] * n[2]);
    for k in 0..n[2] {
        for j in 0..n[1] {
            for i in 0..n[0] {
                cells.push((
                    CellKind::Hex,
                    vec![
                        vid(i, j, k),
                        vid(i + 1, j, k),
                        vid(i + 1, j + 1, k),
                        vid(i, j + 1, k),
                        vid(i, j, k + 1),
                        vid(i + 1, j, k + 1),
                        vid(i + 1, j + 1, k + 1),
                        vid(i, j + 1, k + 1),
                    ],
                ));
            }
        }
    }
    build_mesh(
        MeshInput {
            vertices: grid_vertices(n, lo, hi),
            cells,
            boundary: vec![],
            periodic: periodic_decls(periodic),
        },
        Some(&box_tagger(lo, hi)),
    )
}

/// Hybrid cube of n^3 base resolution with the 60% of hex layers nearest
/// z-max each split into two triangular prisms (axis along y) on alternating
/// xz diagonals, for 1.6 n^3 cells total.
pub fn build_hybrid_cube(n: usize, lo: Vec3, hi: Vec3, periodic: [bool; 3]) -> Result<Mesh> {
    if n % 2 != 0 {
        return Err(Error::MeshFormat(
            "hybrid mesh needs even n (alternating diagonal split)".into(),
        ));
    }
    if (3 * n) % 5 != 0 {
        return Err(Error::MeshFormat(
            "hybrid mesh needs 0.6*n split layers to be integral (n multiple of 10)".into(),
        ));
    }
    check_box([n, n, n], lo, hi)?;
    let n_split = 3 * n / 5;
    let first_split_layer = n - n_split;
    let vid = |i: usize, j: usize, k: usize| -> VertexId { i + (n + 1) * (j + (n + 1) * k) };
    let mut cells = Vec::with_capacity(16 * n * n * n / 10);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                // hex corners: bottom a,b,c,d at z_k, top a',b',c',d'
                let a = vid(i, j, k);
                let b = vid(i + 1, j, k);
                let c = vid(i + 1, j + 1, k);
                let d = vid(i, j + 1, k);
                let a1 = vid(i, j, k + 1);
                let b1 = vid(i + 1, j, k + 1);
                let c1 = vid(i + 1, j + 1, k + 1);
                let d1 = vid(i, j + 1, k + 1);
                if k < first_split_layer {
                    cells.push((CellKind::Hex, vec![a, b, c, d, a1, b1, c1, d1]));
                } else if (i + k) % 2 == 0 {
                    // rising diagonal in the xz cross-section
                    cells.push((CellKind::Prism, vec![a, b1, b, d, c1, c]));
                    cells.push((CellKind::Prism, vec![a, a1, b1, d, d1, c1]));
                } else {
                    // falling diagonal
                    cells.push((CellKind::Prism, vec![a, a1, b, d, d1, c]));
                    cells.push((CellKind::Prism, vec![b, a1, b1, c, d1, c1]));
                }
            }
        }
    }
    build_mesh(
        MeshInput {
            vertices: grid_vertices([n, n, n], lo, hi),
            cells,
            boundary: vec![],
            periodic: periodic_decls(periodic),
        },
        Some(&box_tagger(lo, hi)),
    )
}
