//! Field output: legacy ASCII VTK, line CSV, convergence tables and the
//! ASCII field checkpoint (`cgksfield 1` header, one line of 5 averages and
//! 15 gradient entries per cell).

use super::cases::{convergence_orders, ErrorReport, LineSample};
use crate::error::{Error, Result};
use crate::evolution::{FieldState, Solver};
use crate::mesh::{CellKind, Mesh};
use crate::state::CellSolution;
use std::fmt::Write as _;
use std::path::Path;

fn vtk_cell_type(kind: CellKind) -> u8 {
    match kind {
        CellKind::Tet => 10,
        CellKind::Pyramid => 14,
        CellKind::Prism => 13,
        CellKind::Hex => 12,
    }
}

pub fn format_vtk(solver: &Solver, field: &FieldState) -> String {
    let mesh = &solver.mesh;
    let gas = solver.gas();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(s, "cgks t={} step={}", field.time, field.step);
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", mesh.vertices.len());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{} {} {}", v[0], v[1], v[2]);
    }
    let total: usize = mesh.cells.iter().map(|c| c.vertices.len() + 1).sum();
    let _ = writeln!(s, "CELLS {} {}", mesh.n_cells, total);
    for c in &mesh.cells {
        let _ = write!(s, "{}", c.vertices.len());
        for v in &c.vertices {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {}", mesh.n_cells);
    for c in &mesh.cells {
        let _ = writeln!(s, "{}", vtk_cell_type(c.kind));
    }
    let _ = writeln!(s, "CELL_DATA {}", mesh.n_cells);
    s.push_str("SCALARS density double 1\nLOOKUP_TABLE default\n");
    for c in 0..mesh.n_cells {
        let _ = writeln!(s, "{}", field.sol[c].avg[0]);
    }
    s.push_str("VECTORS velocity double\n");
    for c in 0..mesh.n_cells {
        let u = crate::state::velocity(&field.sol[c].avg);
        let _ = writeln!(s, "{} {} {}", u[0], u[1], u[2]);
    }
    s.push_str("SCALARS pressure double 1\nLOOKUP_TABLE default\n");
    for c in 0..mesh.n_cells {
        let _ = writeln!(s, "{}", crate::state::pressure(&field.sol[c].avg, gas));
    }
    s.push_str("SCALARS alpha_c double 1\nLOOKUP_TABLE default\n");
    for c in 0..mesh.n_cells {
        let _ = writeln!(s, "{}", field.alpha[c]);
    }
    s
}

pub fn write_vtk(solver: &Solver, field: &FieldState, path: &Path) -> Result<()> {
    std::fs::write(path, format_vtk(solver, field))
        .map_err(|e| Error::io(format!("writing VTK {}", path.display()), e))
}

pub fn format_csv_line(samples: &[LineSample]) -> String {
    let mut s = String::from("x,rho,ux,uy,uz,p,alpha_c\n");
    for l in samples {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            l.x, l.rho, l.u[0], l.u[1], l.u[2], l.p, l.alpha
        );
    }
    s
}

pub fn write_csv_line(samples: &[LineSample], path: &Path) -> Result<()> {
    std::fs::write(path, format_csv_line(samples))
        .map_err(|e| Error::io(format!("writing CSV {}", path.display()), e))
}

/// Convergence table in the layout of the accuracy-test tables: mesh label,
/// then error and measured order per norm.
pub fn format_convergence_table(reports: &[ErrorReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<12} {:<13} {:<6} {:<13} {:<6} {:<13} {:<6}",
        "mesh", "L1 error", "order", "L2 error", "order", "Linf error", "order"
    );
    let orders = convergence_orders(reports);
    for (r, o) in reports.iter().zip(orders.iter()) {
        let fmt_o = |v: Option<f64>| match v {
            Some(x) => format!("{x:.2}"),
            None => "-".to_string(),
        };
        let _ = writeln!(
            s,
            "{:<12} {:<13.6e} {:<6} {:<13.6e} {:<6} {:<13.6e} {:<6}",
            r.label,
            r.norms.l1,
            fmt_o(o.0),
            r.norms.l2,
            fmt_o(o.1),
            r.norms.linf,
            fmt_o(o.2),
        );
    }
    s
}

pub fn write_convergence_table(reports: &[ErrorReport], path: &Path) -> Result<()> {
    std::fs::write(path, format_convergence_table(reports))
        .map_err(|e| Error::io(format!("writing table {}", path.display()), e))
}

/// Versioned ASCII checkpoint of the interior solution.
pub fn format_checkpoint(mesh: &Mesh, field: &FieldState) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "cgksfield 1");
    let _ = writeln!(s, "time {} step {} cells {}", field.time, field.step, mesh.n_cells);
    for c in 0..mesh.n_cells {
        let sol = &field.sol[c];
        for v in &sol.avg {
            let _ = write!(s, "{v} ");
        }
        for d in 0..3 {
            for v in &sol.grad[d] {
                let _ = write!(s, "{v} ");
            }
        }
        s.push('\n');
    }
    s
}

pub fn write_checkpoint(mesh: &Mesh, field: &FieldState, path: &Path) -> Result<()> {
    std::fs::write(path, format_checkpoint(mesh, field))
        .map_err(|e| Error::io(format!("writing checkpoint {}", path.display()), e))
}

pub fn read_checkpoint(mesh: &Mesh, path: &Path) -> Result<FieldState> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading checkpoint {}", path.display()), e))?;
    parse_checkpoint(mesh, &text)
}

pub fn parse_checkpoint(mesh: &Mesh, text: &str) -> Result<FieldState> {
    let bad = |m: &str| Error::MeshFormat(format!("checkpoint: {m}"));
    let mut lines = text.lines();
    if lines.next() != Some("cgksfield 1") {
        return Err(bad("expected header 'cgksfield 1'"));
    }
    let meta = lines.next().ok_or_else(|| bad("missing metadata line"))?;
    let toks: Vec<&str> = meta.split_whitespace().collect();
    if toks.len() != 6 || toks[0] != "time" || toks[2] != "step" || toks[4] != "cells" {
        return Err(bad("malformed metadata line"));
    }
    let time: f64 = toks[1].parse().map_err(|_| bad("bad time"))?;
    let step: u64 = toks[3].parse().map_err(|_| bad("bad step"))?;
    let n: usize = toks[5].parse().map_err(|_| bad("bad cell count"))?;
    if n != mesh.n_cells {
        return Err(bad("cell count does not match the mesh"));
    }
    let mut field = FieldState::new(mesh);
    field.time = time;
    field.step = step;
    for c in 0..n {
        let line = lines.next().ok_or_else(|| bad("missing cell line"))?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("bad value")))
            .collect::<Result<_>>()?;
        if vals.len() != 20 {
            return Err(bad("cell line needs 20 values"));
        }
        let mut sol = CellSolution::default();
        sol.avg.copy_from_slice(&vals[0..5]);
        for d in 0..3 {
            sol.grad[d].copy_from_slice(&vals[5 + 5 * d..10 + 5 * d]);
        }
        field.sol[c] = sol;
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::cases::ErrorNorms;
    use crate::harness::config::{CaseConfig, CaseName};

    #[test]
    fn convergence_table_golden_format() {
        let reports = vec![
            ErrorReport {
                label: "5^3".into(),
                norms: ErrorNorms {
                    l1: 8.5728e-2,
                    l2: 9.50877e-2,
                    linf: 1.324228e-1,
                },
            },
            ErrorReport {
                label: "10^3".into(),
                norms: ErrorNorms {
                    l1: 2.199962e-2,
                    l2: 2.441038e-2,
                    linf: 3.420145e-2,
                },
            },
        ];
        let got = format_convergence_table(&reports);
        let want = "\
mesh         L1 error      order  L2 error      order  Linf error    order \n\
5^3          8.572800e-2   -      9.508770e-2   -      1.324228e-1   -     \n\
10^3         2.199962e-2   1.96   2.441038e-2   1.96   3.420145e-2   1.95  \n";
        assert_eq!(got, want);
    }

    #[test]
    fn vtk_and_csv_shapes() {
        let cfg = CaseConfig {
            name: CaseName::Uniform,
            n: 2,
            ..CaseConfig::default()
        };
        let solver = crate::harness::cases::build_uniform_solver(&cfg).unwrap();
        let field = crate::harness::cases::init_uniform(&solver);
        let vtk = format_vtk(&solver, &field);
        // parse back the declared cell count
        let cells_line = vtk
            .lines()
            .find(|l| l.starts_with("CELLS "))
            .expect("CELLS header");
        let n: usize = cells_line.split_whitespace().nth(1).unwrap().parse().unwrap();
        assert_eq!(n, solver.mesh.n_cells);
        assert_eq!(
            vtk.lines().filter(|l| l.trim() == "12").count(),
            solver.mesh.n_cells // all hexes
        );
        let line = crate::harness::cases::centerline(&solver, &field);
        let csv = format_csv_line(&line);
        let rows: Vec<&str> = csv.lines().collect();
        assert_eq!(rows[0], "x,rho,ux,uy,uz,p,alpha_c");
        assert_eq!(rows.len(), 1 + line.len());
        for row in &rows[1..] {
            let cols: Vec<&str> = row.split(',').collect();
            assert_eq!(cols.len(), 7);
            assert_eq!(cols[1], "1"); // uniform density
        }
    }

    #[test]
    fn checkpoint_roundtrip() {
        let cfg = CaseConfig {
            name: CaseName::Uniform,
            n: 2,
            ..CaseConfig::default()
        };
        let solver = crate::harness::cases::build_uniform_solver(&cfg).unwrap();
        let mut field = crate::harness::cases::init_uniform(&solver);
        field.time = 0.37;
        field.step = 12;
        field.sol[3].grad[1][2] = -0.25;
        let text = format_checkpoint(&solver.mesh, &field);
        let back = parse_checkpoint(&solver.mesh, &text).unwrap();
        assert_eq!(back.time, field.time);
        assert_eq!(back.step, field.step);
        for c in 0..solver.mesh.n_cells {
            assert_eq!(back.sol[c].avg, field.sol[c].avg);
            assert_eq!(back.sol[c].grad, field.sol[c].grad);
        }
        assert!(parse_checkpoint(&solver.mesh, "nope").is_err());
    }
}
