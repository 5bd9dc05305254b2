//! Built-in verification cases: sinusoidal density wave on hex and hybrid
//! meshes, the Shu-Osher shock/acoustic interaction, the Sod tube against
//! the exact Riemann solution, and a trivial uniform-flow case.

use super::config::{CaseConfig, CaseName, MeshGenerator};
use super::riemann;
use crate::boundary::{BoundaryKind, BoundarySpec};
use crate::error::{Error, Result};
use crate::evolution::{FieldState, Solver, SolverOptions};
use crate::math::Vec3;
use crate::mesh::{build_hybrid_cube, build_structured_hex, Mesh};
use crate::state::{conserved, GasModel};

#[derive(Debug, Clone, Copy)]
pub struct ErrorNorms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// One row of a convergence study.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub label: String,
    pub norms: ErrorNorms,
}

pub struct CaseOutput {
    pub solver: Solver,
    pub field: FieldState,
    pub norms: Option<ErrorNorms>,
}

const PI: f64 = std::f64::consts::PI;

fn sinwave_density(x: Vec3, t: f64) -> f64 {
    1.0 + 0.2 * (PI * (x[0] + x[1] + x[2] - t)).sin()
}

fn shu_osher_right_density(x: f64) -> f64 {
    1.0 + 0.2 * (5.0 * x).sin()
}

fn all_periodic(mesh: &Mesh) -> BoundarySpec {
    BoundarySpec {
        kinds: vec![BoundaryKind::Periodic; mesh.boundary_tags.len()],
    }
}

fn spec_by_tag(
    mesh: &Mesh,
    f: impl Fn(&str) -> BoundaryKind,
) -> BoundarySpec {
    BoundarySpec {
        kinds: mesh.boundary_tags.iter().map(|t| f(t)).collect(),
    }
}

fn solver_options(cfg: &CaseConfig) -> SolverOptions {
    SolverOptions {
        gas: GasModel::new(cfg.gamma),
        mu: cfg.mu,
        cfl: cfg.cfl,
        flux_mode: cfg.flux,
        recon_mode: cfg.recon,
        cf_enabled: cfg.cf_enabled,
    }
}

/// Initialize a field from pointwise primitive callbacks with exact cell
/// averages (by the geometric quadrature) and exact average gradients.
fn init_from_primitives(
    solver: &Solver,
    field: &mut FieldState,
    rho: &dyn Fn(Vec3) -> f64,
    grad_rho: &dyn Fn(Vec3) -> Vec3,
    u: Vec3,
    p: f64,
) {
    let gas = *solver.gas();
    let q2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    for c in 0..solver.mesh.n_cells {
        let rho_avg = solver.mesh.cell_average(c, rho);
        field.sol[c].avg = [
            rho_avg,
            rho_avg * u[0],
            rho_avg * u[1],
            rho_avg * u[2],
            p / (gas.gamma - 1.0) + 0.5 * rho_avg * q2,
        ];
        for d in 0..3 {
            let g = solver.mesh.cell_average(c, &|x| grad_rho(x)[d]);
            field.sol[c].grad[d] = [g, g * u[0], g * u[1], g * u[2], 0.5 * g * q2];
        }
    }
}

pub fn build_sinwave_solver(cfg: &CaseConfig) -> Result<Solver> {
    let lo = [0.0; 3];
    let hi = [2.0, 2.0, 2.0];
    let mesh = match cfg.generator {
        MeshGenerator::Hex => build_structured_hex([cfg.n; 3], lo, hi, [true; 3])?,
        MeshGenerator::Hybrid => build_hybrid_cube(cfg.n, lo, hi, [true; 3])?,
    };
    let spec = all_periodic(&mesh);
    Solver::new(mesh, spec, solver_options(cfg))
}

pub fn init_sinwave(solver: &Solver) -> FieldState {
    let mut field = FieldState::new(&solver.mesh);
    init_from_primitives(
        solver,
        &mut field,
        &|x| sinwave_density(x, 0.0),
        &|x| {
            let c = 0.2 * PI * (PI * (x[0] + x[1] + x[2])).cos();
            [c, c, c]
        },
        [1.0, 1.0, 1.0],
        1.0,
    );
    field
}

/// Volume-weighted density error norms against an exact pointwise field,
/// compared through exact cell averages of the same quadrature.
pub fn density_norms(solver: &Solver, field: &FieldState, exact: &dyn Fn(Vec3) -> f64) -> ErrorNorms {
    let mesh = &solver.mesh;
    let mut l1 = 0.0;
    let mut l2 = 0.0;
    let mut linf = 0.0f64;
    let mut vol = 0.0;
    for c in 0..mesh.n_cells {
        let v = mesh.geometry[c].volume;
        let exact_avg = mesh.cell_average(c, exact);
        let e = (field.sol[c].avg[0] - exact_avg).abs();
        l1 += e * v;
        l2 += e * e * v;
        linf = linf.max(e);
        vol += v;
    }
    ErrorNorms {
        l1: l1 / vol,
        l2: (l2 / vol).sqrt(),
        linf,
    }
}

fn channel_mesh(nx: usize, length: f64, x0: f64) -> Result<Mesh> {
    let h = length / nx as f64;
    build_structured_hex(
        [nx, 2, 2],
        [x0, 0.0, 0.0],
        [x0 + length, 2.0 * h, 2.0 * h],
        [false, false, false],
    )
}

pub fn build_shu_osher_solver(cfg: &CaseConfig) -> Result<Solver> {
    let gas = GasModel::new(cfg.gamma);
    let mesh = channel_mesh(cfg.nx, 10.0, 0.0)?;
    let w_left = conserved(3.857134, [2.629369, 0.0, 0.0], 10.33333, &gas);
    let w_right = conserved(shu_osher_right_density(10.0), [0.0; 3], 1.0, &gas);
    let spec = spec_by_tag(&mesh, |tag| match tag {
        "xmin" => BoundaryKind::Farfield(w_left),
        "xmax" => BoundaryKind::Farfield(w_right),
        _ => BoundaryKind::SlipWall,
    });
    Solver::new(mesh, spec, solver_options(cfg))
}

pub fn init_shu_osher(solver: &Solver) -> FieldState {
    let gas = *solver.gas();
    let mut field = FieldState::new(&solver.mesh);
    for c in 0..solver.mesh.n_cells {
        let xc = solver.mesh.geometry[c].centroid[0];
        if xc <= 1.0 {
            field.sol[c].avg = conserved(3.857134, [2.629369, 0.0, 0.0], 10.33333, &gas);
        } else {
            let rho_avg = solver
                .mesh
                .cell_average(c, &|x| shu_osher_right_density(x[0]));
            field.sol[c].avg = [rho_avg, 0.0, 0.0, 0.0, 1.0 / (gas.gamma - 1.0)];
            let g = solver.mesh.cell_average(c, &|x| (5.0 * x[0]).cos());
            field.sol[c].grad[0] = [g, 0.0, 0.0, 0.0, 0.0];
        }
    }
    field
}

pub fn build_sod_solver(cfg: &CaseConfig) -> Result<Solver> {
    let gas = GasModel::new(cfg.gamma);
    let mesh = channel_mesh(cfg.nx, 1.0, 0.0)?;
    let w_left = conserved(1.0, [0.0; 3], 1.0, &gas);
    let w_right = conserved(0.125, [0.0; 3], 0.1, &gas);
    let spec = spec_by_tag(&mesh, |tag| match tag {
        "xmin" => BoundaryKind::Farfield(w_left),
        "xmax" => BoundaryKind::Farfield(w_right),
        _ => BoundaryKind::SlipWall,
    });
    Solver::new(mesh, spec, solver_options(cfg))
}

pub fn init_sod(solver: &Solver) -> FieldState {
    let gas = *solver.gas();
    let mut field = FieldState::new(&solver.mesh);
    for c in 0..solver.mesh.n_cells {
        let xc = solver.mesh.geometry[c].centroid[0];
        field.sol[c].avg = if xc < 0.5 {
            conserved(1.0, [0.0; 3], 1.0, &gas)
        } else {
            conserved(0.125, [0.0; 3], 0.1, &gas)
        };
    }
    field
}

pub fn build_uniform_solver(cfg: &CaseConfig) -> Result<Solver> {
    let mesh = match cfg.generator {
        MeshGenerator::Hex => {
            build_structured_hex([cfg.n; 3], [0.0; 3], [2.0; 3], [true; 3])?
        }
        MeshGenerator::Hybrid => build_hybrid_cube(cfg.n, [0.0; 3], [2.0; 3], [true; 3])?,
    };
    let spec = all_periodic(&mesh);
    Solver::new(mesh, spec, solver_options(cfg))
}

pub fn init_uniform(solver: &Solver) -> FieldState {
    let gas = *solver.gas();
    let mut field = FieldState::new(&solver.mesh);
    let w = conserved(1.0, [1.0, 1.0, 1.0], 1.0, &gas);
    for c in 0..solver.mesh.n_cells {
        field.sol[c].avg = w;
    }
    field
}

/// Run a configured case to its end time. Density error norms are attached
/// for the cases with a usable reference (sinwave: exact solution; sod:
/// exact Riemann solution).
pub fn run_case(cfg: &CaseConfig) -> Result<CaseOutput> {
    let t_end = cfg.end_time_or_default();
    let fixed_dt = (cfg.fixed_dt > 0.0).then_some(cfg.fixed_dt);
    let (solver, mut field) = match cfg.name {
        CaseName::Sinwave => {
            let solver = build_sinwave_solver(cfg)?;
            let field = init_sinwave(&solver);
            (solver, field)
        }
        CaseName::ShuOsher => {
            let solver = build_shu_osher_solver(cfg)?;
            let field = init_shu_osher(&solver);
            (solver, field)
        }
        CaseName::Sod => {
            let solver = build_sod_solver(cfg)?;
            let field = init_sod(&solver);
            (solver, field)
        }
        CaseName::Uniform => {
            let solver = build_uniform_solver(cfg)?;
            let field = init_uniform(&solver);
            (solver, field)
        }
    };
    if let Err(e) = solver.run_until(&mut field, t_end, fixed_dt) {
        // leave a diagnostic state dump next to the outputs before bailing
        if matches!(e, Error::SolverAbort { .. }) {
            let dir = std::path::Path::new(&cfg.output_dir);
            let _ = std::fs::create_dir_all(dir);
            let _ = super::output::write_checkpoint(
                &solver.mesh,
                &field,
                &dir.join("abort_dump.cgksfield"),
            );
        }
        return Err(e);
    }
    let norms = match cfg.name {
        CaseName::Sinwave => Some(density_norms(&solver, &field, &|x| {
            sinwave_density(x, t_end)
        })),
        CaseName::Sod => {
            let gamma = solver.gas().gamma;
            let star = riemann::solve_star(
                &riemann::PrimState {
                    rho: 1.0,
                    u: 0.0,
                    p: 1.0,
                },
                &riemann::PrimState {
                    rho: 0.125,
                    u: 0.0,
                    p: 0.1,
                },
                gamma,
            );
            let left = riemann::PrimState {
                rho: 1.0,
                u: 0.0,
                p: 1.0,
            };
            let right = riemann::PrimState {
                rho: 0.125,
                u: 0.0,
                p: 0.1,
            };
            Some(density_norms(&solver, &field, &|x| {
                riemann::sample(&star, &left, &right, gamma, (x[0] - 0.5) / t_end).rho
            }))
        }
        _ => None,
    };
    Ok(CaseOutput {
        solver,
        field,
        norms,
    })
}

/// Cross-section-averaged line profile along x: (x, rho, u, p, alpha_c).
#[derive(Debug, Clone, Copy)]
pub struct LineSample {
    pub x: f64,
    pub rho: f64,
    pub u: [f64; 3],
    pub p: f64,
    pub alpha: f64,
}

pub fn centerline(solver: &Solver, field: &FieldState) -> Vec<LineSample> {
    let mesh = &solver.mesh;
    let gas = solver.gas();
    let mut buckets: std::collections::BTreeMap<i64, (f64, [f64; 3], f64, f64, f64, usize)> =
        std::collections::BTreeMap::new();
    for c in 0..mesh.n_cells {
        let x = mesh.geometry[c].centroid[0];
        let key = (x * 1e9).round() as i64;
        let w = &field.sol[c].avg;
        let u = crate::state::velocity(w);
        let p = crate::state::pressure(w, gas);
        let e = buckets.entry(key).or_insert((0.0, [0.0; 3], 0.0, 0.0, 0.0, 0));
        e.0 += w[0];
        for d in 0..3 {
            e.1[d] += u[d];
        }
        e.2 += p;
        e.3 += field.alpha[c];
        e.4 += x;
        e.5 += 1;
    }
    buckets
        .into_values()
        .map(|(rho, u, p, alpha, xs, n)| {
            let n = n as f64;
            LineSample {
                x: xs / n,
                rho: rho / n,
                u: [u[0] / n, u[1] / n, u[2] / n],
                p: p / n,
                alpha: alpha / n,
            }
        })
        .collect()
}

/// Shu-Osher density profile at t = 1.8 on an nx x 2 x 2 channel.
pub fn shu_osher_case(nx: usize, cf_enabled: bool) -> Result<(CaseOutput, Vec<LineSample>)> {
    let mut cfg = CaseConfig {
        name: CaseName::ShuOsher,
        nx,
        cf_enabled,
        ..CaseConfig::default()
    };
    cfg.recon = crate::recon::ReconMode::Weno;
    let out = run_case(&cfg)?;
    let line = centerline(&out.solver, &out.field);
    Ok((out, line))
}

/// Sod tube at t = 0.2; returns the L1 density error against the exact
/// Riemann solution.
pub fn sod_case(nx: usize) -> Result<(CaseOutput, f64)> {
    let cfg = CaseConfig {
        name: CaseName::Sod,
        nx,
        cf_enabled: true,
        ..CaseConfig::default()
    };
    let out = run_case(&cfg)?;
    let l1 = out.norms.as_ref().unwrap().l1;
    Ok((out, l1))
}

/// Measured order between two refinements differing by a factor of two.
pub fn convergence_orders(reports: &[ErrorReport]) -> Vec<(Option<f64>, Option<f64>, Option<f64>)> {
    let mut out = Vec::with_capacity(reports.len());
    for (i, r) in reports.iter().enumerate() {
        if i == 0 {
            out.push((None, None, None));
        } else {
            let prev = &reports[i - 1].norms;
            out.push((
                Some((prev.l1 / r.norms.l1).log2()),
                Some((prev.l2 / r.norms.l2).log2()),
                Some((prev.linf / r.norms.linf).log2()),
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinwave_initialization_is_exact() {
        let cfg = CaseConfig {
            name: CaseName::Sinwave,
            n: 5,
            ..CaseConfig::default()
        };
        let solver = build_sinwave_solver(&cfg).unwrap();
        let field = init_sinwave(&solver);
        // initial norms against the t = 0 exact field vanish
        let norms = density_norms(&solver, &field, &|x| sinwave_density(x, 0.0));
        assert!(norms.l1 < 1e-13);
        assert!(norms.linf < 1e-13);
        // total mass matches the analytic integral (8 over the [0,2]^3 box)
        let mass: f64 = (0..solver.mesh.n_cells)
            .map(|c| field.sol[c].avg[0] * solver.mesh.geometry[c].volume)
            .sum();
        assert!((mass - 8.0).abs() < 1e-10);
    }

    #[test]
    fn uniform_case_runs_and_stays_put() {
        let cfg = CaseConfig {
            name: CaseName::Uniform,
            n: 3,
            end_time: Some(0.3),
            ..CaseConfig::default()
        };
        let out = run_case(&cfg).unwrap();
        let gas = out.solver.gas();
        for c in 0..out.solver.mesh.n_cells {
            let w = &out.field.sol[c].avg;
            assert!((w[0] - 1.0).abs() < 1e-12);
            assert!((crate::state::pressure(w, gas) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn centerline_of_uniform_field_is_constant() {
        let cfg = CaseConfig {
            name: CaseName::Sod,
            nx: 16,
            ..CaseConfig::default()
        };
        let solver = build_sod_solver(&cfg).unwrap();
        let mut field = init_sod(&solver);
        for c in 0..solver.mesh.n_cells {
            field.sol[c].avg = conserved(1.0, [0.5, 0.0, 0.0], 1.0, solver.gas());
        }
        let line = centerline(&solver, &field);
        assert_eq!(line.len(), 16);
        for s in &line {
            assert!((s.rho - 1.0).abs() < 1e-14);
            assert!((s.u[0] - 0.5).abs() < 1e-14);
            assert!((s.p - 1.0).abs() < 1e-14);
        }
        // x strictly increasing
        for w in line.windows(2) {
            assert!(w[1].x > w[0].x);
        }
    }
}
