//! Ghost-cell construction and boundary closures: periodic, characteristic
//! far field, slip and non-slip walls, and the Maxwell slip isothermal wall.

use crate::error::{Error, Result};
use crate::flux::FluxResult;
use crate::kinetic::{
    maxwellian_from_conserved, micro_slope, moment_table, temporal_slope, Maxwellian, MicroSlope,
    Range,
};
use crate::math::{dot, Vec3};
use crate::mesh::{element::mean_normal, GhostSource, Mesh};
use crate::state::{CellSolution, Conserved, GasModel, Gradient};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryKind {
    Periodic,
    /// Non-reflecting far field with the given free-stream state.
    Farfield(Conserved),
    SlipWall,
    NoslipAdiabatic,
    /// Maxwell slip wall with fixed temperature (lambda = 1/(2 T_wall) in
    /// the nondimensional form).
    MaxwellIsothermal { t_wall: f64 },
}

/// Boundary kind per mesh tag.
#[derive(Debug, Clone)]
pub struct BoundarySpec {
    pub kinds: Vec<BoundaryKind>,
}

impl BoundarySpec {
    /// Every boundary face must have a spec; periodic tags must carry
    /// periodic links in the mesh.
    pub fn validate(&self, mesh: &Mesh) -> Result<()> {
        if self.kinds.len() != mesh.boundary_tags.len() {
            return Err(Error::Config(format!(
                "boundary spec covers {} tags, mesh has {}",
                self.kinds.len(),
                mesh.boundary_tags.len()
            )));
        }
        for f in &mesh.faces {
            if let crate::mesh::Neighbor::Boundary { tag, .. } = f.neighbor {
                let periodic_kind = self.kinds[tag] == BoundaryKind::Periodic;
                if periodic_kind != f.periodic.is_some() {
                    return Err(Error::Config(format!(
                        "tag '{}' periodicity mismatch between spec and mesh",
                        mesh.boundary_tags[tag]
                    )));
                }
            }
        }
        Ok(())
    }
}

fn mirror_state(w: &Conserved, n: Vec3, negate_all: bool) -> Conserved {
    let m = [w[1], w[2], w[3]];
    if negate_all {
        return [w[0], -m[0], -m[1], -m[2], w[4]];
    }
    let mn = dot(m, n);
    [
        w[0],
        m[0] - 2.0 * mn * n[0],
        m[1] - 2.0 * mn * n[1],
        m[2] - 2.0 * mn * n[2],
        w[4],
    ]
}

fn mirror_gradient(g: &Gradient, n: Vec3, negate_all: bool) -> Gradient {
    // reflect the derivative directions with R = I - 2 n n^T and transform
    // the component vector of each direction
    let refl: [Conserved; 3] = [
        mirror_state(&g[0], n, negate_all),
        mirror_state(&g[1], n, negate_all),
        mirror_state(&g[2], n, negate_all),
    ];
    let mut out = [[0.0; 5]; 3];
    for d in 0..3 {
        for e in 0..3 {
            let r = (if d == e { 1.0 } else { 0.0 }) - 2.0 * n[d] * n[e];
            if r == 0.0 {
                continue;
            }
            for i in 0..5 {
                out[d][i] += r * refl[e][i];
            }
        }
    }
    out
}

/// Fill the ghost slots of the solution vector from the interior snapshot.
pub fn fill_ghosts(spec: &BoundarySpec, mesh: &Mesh, sol: &mut [CellSolution]) {
    for (k, ghost) in mesh.ghosts.iter().enumerate() {
        let gid = mesh.n_cells + k;
        let face = &mesh.faces[ghost.face];
        let tag = match face.neighbor {
            crate::mesh::Neighbor::Boundary { tag, .. } => tag,
            _ => unreachable!("ghost attached to interior face"),
        };
        sol[gid] = match (&spec.kinds[tag], ghost.source) {
            (BoundaryKind::Periodic, GhostSource::Periodic { cell }) => sol[cell],
            (BoundaryKind::Farfield(w_inf), _) => CellSolution {
                avg: *w_inf,
                grad: [[0.0; 5]; 3],
            },
            (BoundaryKind::SlipWall, _) => {
                let n = mean_normal(&face.quad);
                let inner = &sol[ghost.inner];
                CellSolution {
                    avg: mirror_state(&inner.avg, n, false),
                    grad: mirror_gradient(&inner.grad, n, false),
                }
            }
            (BoundaryKind::NoslipAdiabatic, _) => {
                let n = mean_normal(&face.quad);
                let inner = &sol[ghost.inner];
                CellSolution {
                    avg: mirror_state(&inner.avg, n, true),
                    grad: mirror_gradient(&inner.grad, n, true),
                }
            }
            (BoundaryKind::MaxwellIsothermal { .. }, _) => {
                let inner = &sol[ghost.inner];
                CellSolution {
                    avg: mirror_state(&inner.avg, [0.0; 3], true),
                    grad: [[0.0; 5]; 3],
                }
            }
            (BoundaryKind::Periodic, _) => unreachable!("periodic ghost without source"),
        };
    }
}

/// Ghost-side trace for a boundary Gaussian point, in the face-local frame
/// (axis 1 = outward normal). Periodic and Maxwell faces are handled
/// elsewhere.
pub fn ghost_trace_local(
    kind: &BoundaryKind,
    w_in: &Conserved,
    grad_in: &Gradient,
    gas: &GasModel,
) -> (Conserved, Gradient) {
    let n_local = [1.0, 0.0, 0.0];
    match kind {
        BoundaryKind::SlipWall => (
            mirror_state(w_in, n_local, false),
            mirror_gradient(grad_in, n_local, false),
        ),
        BoundaryKind::NoslipAdiabatic => (
            mirror_state(w_in, n_local, true),
            mirror_gradient(grad_in, n_local, true),
        ),
        BoundaryKind::Farfield(w_inf) => (farfield_trace(w_in, w_inf, gas), [[0.0; 5]; 3]),
        _ => unreachable!("trace-level closure not defined for this kind"),
    }
}

/// Characteristic far-field state in the local frame: supersonic
/// inflow/outflow take one side wholesale, subsonic cases combine the
/// outgoing interior Riemann invariant with the incoming free-stream one;
/// entropy and tangential velocity follow the upwind side.
pub fn farfield_trace(w_in: &Conserved, w_inf: &Conserved, gas: &GasModel) -> Conserved {
    let gm1 = gas.gamma - 1.0;
    let u_in = crate::state::velocity(w_in);
    let a_in = crate::state::sound_speed(w_in, gas);
    let u_inf = crate::state::velocity(w_inf);
    let a_inf = crate::state::sound_speed(w_inf, gas);
    // axis 1 is the outward normal: positive u means outflow
    if u_in[0] >= a_in {
        return *w_in;
    }
    if u_in[0] <= -a_in {
        return *w_inf;
    }
    let r_out = u_in[0] + 2.0 * a_in / gm1;
    let r_in = u_inf[0] - 2.0 * a_inf / gm1;
    let u_n = 0.5 * (r_out + r_in);
    let a = 0.25 * gm1 * (r_out - r_in);
    let (rho_up, p_up, ut1, ut2) = if u_n > 0.0 {
        (
            w_in[0],
            crate::state::pressure(w_in, gas),
            u_in[1],
            u_in[2],
        )
    } else {
        (
            w_inf[0],
            crate::state::pressure(w_inf, gas),
            u_inf[1],
            u_inf[2],
        )
    };
    let entropy = p_up / rho_up.powf(gas.gamma);
    let rho = (a * a / (gas.gamma * entropy)).powf(1.0 / gm1);
    let p = rho * a * a / gas.gamma;
    crate::state::conserved(rho, [u_n, ut1, ut2], p, gas)
}

struct WallInner {
    rho: f64,
    table: crate::kinetic::MomentTable,
    slopes: [MicroSlope; 3],
    a_t: MicroSlope,
}

/// Maxwell slip isothermal wall flux. The inner trace sits on the u1 > 0
/// side (particles with u1 > 0 leave the domain); the wall emits a resting
/// Maxwellian at the wall temperature into u1 < 0. The wall density is
/// solved from the zero-mass-flux constraint separately for each reported
/// window so the wall is airtight in every output.
pub fn maxwell_wall_flux(
    inner: &Conserved,
    grad_inner: &Gradient,
    t_wall: f64,
    dt: f64,
    tau: f64,
    gas: &GasModel,
) -> Result<FluxResult> {
    if !(t_wall > 0.0) {
        return Err(Error::Config(format!("non-positive wall temperature {t_wall}")));
    }
    let g_in = maxwellian_from_conserved(inner, gas)?;
    let table = moment_table(&g_in, gas);
    let slopes = [
        micro_slope(&g_in, &grad_inner[0], gas),
        micro_slope(&g_in, &grad_inner[1], gas),
        micro_slope(&g_in, &grad_inner[2], gas),
    ];
    let a_t = temporal_slope(&g_in, &table, &slopes, gas);
    let side = WallInner {
        rho: g_in.rho,
        table,
        slopes,
        a_t,
    };
    let lambda_wall = 0.5 / t_wall;
    let g_wall = Maxwellian {
        rho: 1.0,
        u: [0.0; 3],
        lambda: lambda_wall,
    };
    let wall_table = moment_table(&g_wall, gas);

    // inner free-stream moment blocks: f0 = g [1 - tau (a.u + A) - t a.u]
    let blocks = |j: usize| -> ([f64; 5], [f64; 5]) {
        let base = side.table.psi(j, 0, 0, Range::Pos);
        let au = side.table.psi_slope_dot_u(&side.slopes, j, Range::Pos);
        let at = side.table.psi_slope(&side.a_t, j, 0, 0, Range::Pos);
        let mut c0 = [0.0; 5]; // constant-in-t part
        let mut c1 = [0.0; 5]; // linear-in-t part
        for i in 0..5 {
            c0[i] = side.rho * (base[i] - tau * (au[i] + at[i]));
            c1[i] = -side.rho * au[i];
        }
        (c0, c1)
    };
    let (f0, f1) = blocks(1); // flux blocks
    let (v0, v1) = blocks(0); // value blocks
    let wall_flux_unit = wall_table.psi(1, 0, 0, Range::Neg); // per unit rho
    let wall_val_unit = wall_table.psi(0, 0, 0, Range::Neg);

    // time-integrated flux over [0, T] with the window-solved wall density:
    // rho_w(T) * T * <u>_neg = -(f0_mass T + f1_mass T^2/2)
    let window = |t: f64| -> Result<Conserved> {
        let inner_mass = f0[0] * t + 0.5 * f1[0] * t * t;
        let rho_w = -inner_mass / (t * wall_flux_unit[0]);
        if !(rho_w > 0.0) {
            return Err(Error::InvalidState(format!(
                "maxwell wall solved non-positive density {rho_w:e}"
            )));
        }
        let mut f = [0.0; 5];
        for i in 0..5 {
            f[i] = f0[i] * t + 0.5 * f1[i] * t * t + rho_w * t * wall_flux_unit[i];
        }
        Ok(f)
    };
    let f_half = window(0.5 * dt)?;
    let f_full = window(dt)?;

    // pointwise interface value: W(t) with rho_w(t) from the instantaneous
    // mass-flux balance; both parts are linear in t
    let point_value = |t: f64| -> Result<Conserved> {
        let inner_mass_flux = f0[0] + f1[0] * t;
        let rho_w = -inner_mass_flux / wall_flux_unit[0];
        if !(rho_w > 0.0) {
            return Err(Error::InvalidState(
                "maxwell wall solved non-positive point density".into(),
            ));
        }
        let mut w = [0.0; 5];
        for i in 0..5 {
            w[i] = v0[i] + v1[i] * t + rho_w * wall_val_unit[i];
        }
        Ok(w)
    };
    let w_start = point_value(0.0)?;
    let w_end = point_value(dt)?;
    let mut w_t1 = [0.0; 5];
    for i in 0..5 {
        w_t1[i] = (w_end[i] - w_start[i]) / dt;
    }
    Ok(FluxResult {
        f_half,
        f_full,
        w_t0: w_start,
        w_t1,
        fallback: false,
    })
}
