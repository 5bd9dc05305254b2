//! Time-accurate gas-kinetic interface solver in a face-local frame.
//!
//! The second-order time-dependent distribution blends a relaxing
//! equilibrium part (coefficients in exp(-t/tau_n)) with the half-space
//! free-stream parts of the two reconstructed interface states. Its u1-psi
//! moments give the flux, its psi moments give the interface point value;
//! both are integrated analytically in time over [0, dt/2] and [0, dt] and
//! condensed to a linear-in-time fit for the two-stage fourth-order update.

use crate::error::{Error, Result};
use crate::kinetic::{
    maxwellian_from_conserved, micro_slope, moment_table, temporal_slope, MicroSlope,
    MomentTable, Range,
};
use crate::math::{dot, Vec3};
use crate::state::{Conserved, GasModel, Gradient};

/// Physical and numerical collision times.
#[derive(Debug, Clone, Copy)]
pub struct CollisionTimes {
    pub tau: f64,
    pub tau_n: f64,
}

const EPS_TAU: f64 = 0.01;
const C_JUMP: f64 = 1.0;

/// tau = mu/p at the interface; tau_n adds pressure-jump dissipation:
/// eps*dt + C|dp/(p_l+p_r)|*dt inviscid, mu/p + C|..|*dt viscous.
pub fn collision_times(p_l: f64, p_r: f64, p_c: f64, mu: f64, dt: f64) -> Result<CollisionTimes> {
    if !(p_l > 0.0 && p_r > 0.0 && p_c > 0.0) {
        return Err(Error::InvalidState(format!(
            "non-positive pressure at interface: {p_l:e}/{p_r:e}/{p_c:e}"
        )));
    }
    let jump = ((p_l - p_r) / (p_l + p_r)).abs();
    if mu > 0.0 {
        let tau = mu / p_c;
        Ok(CollisionTimes {
            tau,
            tau_n: tau + C_JUMP * jump * dt,
        })
    } else {
        Ok(CollisionTimes {
            tau: 0.0,
            tau_n: (EPS_TAU + C_JUMP * jump) * dt,
        })
    }
}

/// Interface state pair in the face-local frame (component 1 along the
/// face normal).
#[derive(Debug, Clone, Copy)]
pub struct InterfaceInput {
    pub left: Conserved,
    pub right: Conserved,
    pub grad_left: Gradient,
    pub grad_right: Gradient,
    pub dt: f64,
    pub mu: f64,
}

/// Time-integrated fluxes and the fitted interface value pair, local frame.
#[derive(Debug, Clone, Copy)]
pub struct FluxResult {
    /// Flux integrated over [0, dt/2].
    pub f_half: Conserved,
    /// Flux integrated over [0, dt].
    pub f_full: Conserved,
    /// Interface state of the linear-in-time fit at t = 0.
    pub w_t0: Conserved,
    /// Time derivative of the fitted interface state.
    pub w_t1: Conserved,
    /// True when the point fell back to the collisionless (KFVS) value.
    pub fallback: bool,
}

impl FluxResult {
    /// Interface state at the end of the window, W(dt).
    pub fn w_end(&self, dt: f64) -> Conserved {
        crate::state::add_scaled(&self.w_t0, &self.w_t1, dt)
    }
}

/// exp(-T/tau_n) time integrals with cancellation-safe small-x evaluation:
/// i0 = int exp(-t/tau_n), i1 = int t exp(-t/tau_n) over [0, T].
fn relax_integrals(t: f64, tau_n: f64) -> (f64, f64) {
    let x = t / tau_n;
    let i0 = tau_n * (-libm::expm1(-x));
    let g = if x < 1e-2 {
        // 1 - (1+x)e^-x = x^2/2 - x^3/3 + x^4/8 - x^5/30 + x^6/144 - ...
        let x2 = x * x;
        x2 * (0.5 - x / 3.0 + x2 / 8.0 - x2 * x / 30.0 + x2 * x2 / 144.0)
    } else {
        1.0 - (1.0 + x) * (-x).exp()
    };
    (i0, tau_n * tau_n * g)
}

struct Side {
    rho: f64,
    table: MomentTable,
    slopes: [MicroSlope; 3],
    a_t: MicroSlope,
}

fn build_side(w: &Conserved, grad: &Gradient, gas: &GasModel) -> Result<Side> {
    let g = maxwellian_from_conserved(w, gas)?;
    let table = moment_table(&g, gas);
    let slopes = [
        micro_slope(&g, &grad[0], gas),
        micro_slope(&g, &grad[1], gas),
        micro_slope(&g, &grad[2], gas),
    ];
    let a_t = temporal_slope(&g, &table, &slopes, gas);
    Ok(Side {
        rho: g.rho,
        table,
        slopes,
        a_t,
    })
}

/// Kinetic-weighted merge of the two interface states and gradients:
/// W^c from the u1>0 half of g^l plus the u1<0 half of g^r, and the same
/// weighting per gradient direction.
pub fn equilibrium_merge(
    w_l: &Conserved,
    grad_l: &Gradient,
    w_r: &Conserved,
    grad_r: &Gradient,
    gas: &GasModel,
) -> Result<(Conserved, Gradient)> {
    let l = build_side(w_l, grad_l, gas)?;
    let r = build_side(w_r, grad_r, gas)?;
    merge_sides(&l, &r)
}

fn merge_sides(l: &Side, r: &Side) -> Result<(Conserved, Gradient)> {
    let pl = l.table.psi(0, 0, 0, Range::Pos);
    let pr = r.table.psi(0, 0, 0, Range::Neg);
    let mut w_c = [0.0; 5];
    for i in 0..5 {
        w_c[i] = l.rho * pl[i] + r.rho * pr[i];
    }
    crate::state::check_physical(&w_c, "merged equilibrium state")?;
    let mut grad_c = [[0.0; 5]; 3];
    for d in 0..3 {
        let gl = l.table.psi_slope(&l.slopes[d], 0, 0, 0, Range::Pos);
        let gr = r.table.psi_slope(&r.slopes[d], 0, 0, 0, Range::Neg);
        for i in 0..5 {
            grad_c[d][i] = l.rho * gl[i] + r.rho * gr[i];
        }
    }
    Ok((w_c, grad_c))
}

/// The complete second-order flux with the equilibrium/free-stream split.
pub fn flux_full(input: &InterfaceInput, gas: &GasModel) -> Result<FluxResult> {
    let l = build_side(&input.left, &input.grad_left, gas)?;
    let r = build_side(&input.right, &input.grad_right, gas)?;
    let (w_c, grad_c) = merge_sides(&l, &r)?;
    let p_l = crate::state::pressure(&input.left, gas);
    let p_r = crate::state::pressure(&input.right, gas);
    let p_c = crate::state::pressure(&w_c, gas);
    let times = collision_times(p_l, p_r, p_c, input.mu, input.dt)?;
    flux_full_with_times(input, &l, &r, &w_c, &grad_c, &times, gas)
}

/// Entry point with explicit collision times (also used by the limit tests).
pub fn flux_full_explicit(
    input: &InterfaceInput,
    times: &CollisionTimes,
    gas: &GasModel,
) -> Result<FluxResult> {
    let l = build_side(&input.left, &input.grad_left, gas)?;
    let r = build_side(&input.right, &input.grad_right, gas)?;
    let (w_c, grad_c) = merge_sides(&l, &r)?;
    flux_full_with_times(input, &l, &r, &w_c, &grad_c, times, gas)
}

fn flux_full_with_times(
    input: &InterfaceInput,
    l: &Side,
    r: &Side,
    w_c: &Conserved,
    grad_c: &Gradient,
    times: &CollisionTimes,
    gas: &GasModel,
) -> Result<FluxResult> {
    let gc = maxwellian_from_conserved(w_c, gas)?;
    let ct = moment_table(&gc, gas);
    let c_slopes = [
        micro_slope(&gc, &grad_c[0], gas),
        micro_slope(&gc, &grad_c[1], gas),
        micro_slope(&gc, &grad_c[2], gas),
    ];
    let c_at = temporal_slope(&gc, &ct, &c_slopes, gas);
    let (tau, tau_n) = (times.tau, times.tau_n);
    let dt = input.dt;

    // moment blocks, j = 1 for fluxes and j = 0 for point values
    let assemble = |j: usize| -> [[f64; 5]; 6] {
        let eq = ct.psi(j, 0, 0, Range::Full);
        let eq_au = ct.psi_slope_dot_u(&c_slopes, j, Range::Full);
        let eq_at = ct.psi_slope(&c_at, j, 0, 0, Range::Full);
        let fl = l.table.psi(j, 0, 0, Range::Pos);
        let fr = r.table.psi(j, 0, 0, Range::Neg);
        let fl_au = l.table.psi_slope_dot_u(&l.slopes, j, Range::Pos);
        let fr_au = r.table.psi_slope_dot_u(&r.slopes, j, Range::Neg);
        let fl_at = l.table.psi_slope(&l.a_t, j, 0, 0, Range::Pos);
        let fr_at = r.table.psi_slope(&r.a_t, j, 0, 0, Range::Neg);
        let mut out = [[0.0; 5]; 6];
        for i in 0..5 {
            out[0][i] = gc.rho * eq[i];
            out[1][i] = gc.rho * eq_au[i];
            out[2][i] = gc.rho * eq_at[i];
            out[3][i] = l.rho * fl[i] + r.rho * fr[i];
            out[4][i] = l.rho * fl_au[i] + r.rho * fr_au[i];
            out[5][i] = l.rho * fl_at[i] + r.rho * fr_at[i];
        }
        out
    };

    // coefficients of the six moment blocks integrated over [0, T]
    let coeffs = |t: f64| -> [f64; 6] {
        let (i0, i1) = relax_integrals(t, tau_n);
        [
            t - i0,                       // (1 - e^-t/tau_n) g^c
            tau * i0 + i1 - tau * t,      // ((t+tau)e^-t/tau_n - tau) a^c.u g^c
            0.5 * t * t - tau * t + tau * i0, // (t - tau + tau e^-t/tau_n) A^c g^c
            i0,                           // e^-t/tau_n f_0
            -(tau * i0 + i1),             // -(tau+t) e^-t/tau_n a.u f_0
            -tau * i0,                    // -tau e^-t/tau_n A f_0
        ]
    };

    let flux_blocks = assemble(1);
    let val_blocks = assemble(0);
    let combine = |blocks: &[[f64; 5]; 6], c: &[f64; 6]| -> Conserved {
        let mut out = [0.0; 5];
        for (b, &cb) in blocks.iter().zip(c.iter()) {
            for i in 0..5 {
                out[i] += cb * b[i];
            }
        }
        out
    };

    let c_half = coeffs(0.5 * dt);
    let c_full = coeffs(dt);
    let f_half = combine(&flux_blocks, &c_half);
    let f_full = combine(&flux_blocks, &c_full);
    let wint_half = combine(&val_blocks, &c_half);
    let wint_full = combine(&val_blocks, &c_full);
    let mut w_t0 = [0.0; 5];
    let mut w_t1 = [0.0; 5];
    for i in 0..5 {
        w_t0[i] = (4.0 * wint_half[i] - wint_full[i]) / dt;
        w_t1[i] = 4.0 * (wint_full[i] - 2.0 * wint_half[i]) / (dt * dt);
    }

    let result = FluxResult {
        f_half,
        f_full,
        w_t0,
        w_t1,
        fallback: false,
    };
    if crate::state::is_physical(&result.w_end(dt)) && crate::state::is_physical(&result.w_t0) {
        Ok(result)
    } else {
        Ok(kfvs_fallback(l, r, w_c, dt))
    }
}

/// Collisionless flux of the two half Maxwellians; used when the
/// time-accurate interface value loses positivity.
fn kfvs_fallback(l: &Side, r: &Side, w_c: &Conserved, dt: f64) -> FluxResult {
    let fl = l.table.psi(1, 0, 0, Range::Pos);
    let fr = r.table.psi(1, 0, 0, Range::Neg);
    let mut f = [0.0; 5];
    for i in 0..5 {
        f[i] = l.rho * fl[i] + r.rho * fr[i];
    }
    let mut f_half = [0.0; 5];
    let mut f_full = [0.0; 5];
    for i in 0..5 {
        f_half[i] = 0.5 * dt * f[i];
        f_full[i] = dt * f[i];
    }
    FluxResult {
        f_half,
        f_full,
        w_t0: *w_c,
        w_t1: [0.0; 5],
        fallback: true,
    }
}

/// Simplified smooth-flow solver: f = g^c - tau (a^c.u + A^c) g^c + A^c g^c t.
pub fn flux_smooth(input: &InterfaceInput, gas: &GasModel) -> Result<FluxResult> {
    let l = build_side(&input.left, &input.grad_left, gas)?;
    let r = build_side(&input.right, &input.grad_right, gas)?;
    let (w_c, grad_c) = merge_sides(&l, &r)?;
    let gc = maxwellian_from_conserved(&w_c, gas)?;
    let ct = moment_table(&gc, gas);
    let c_slopes = [
        micro_slope(&gc, &grad_c[0], gas),
        micro_slope(&gc, &grad_c[1], gas),
        micro_slope(&gc, &grad_c[2], gas),
    ];
    let c_at = temporal_slope(&gc, &ct, &c_slopes, gas);
    let tau = if input.mu > 0.0 {
        input.mu / crate::state::pressure(&w_c, gas)
    } else {
        0.0
    };
    let dt = input.dt;

    let assemble = |j: usize| -> ([f64; 5], [f64; 5], [f64; 5]) {
        let eq = ct.psi(j, 0, 0, Range::Full);
        let au = ct.psi_slope_dot_u(&c_slopes, j, Range::Full);
        let at = ct.psi_slope(&c_at, j, 0, 0, Range::Full);
        let mut e0 = [0.0; 5];
        let mut e1 = [0.0; 5];
        let mut e2 = [0.0; 5];
        for i in 0..5 {
            e0[i] = gc.rho * eq[i];
            e1[i] = gc.rho * (au[i] + at[i]);
            e2[i] = gc.rho * at[i];
        }
        (e0, e1, e2)
    };
    let combine = |blocks: &([f64; 5], [f64; 5], [f64; 5]), t: f64| -> Conserved {
        let mut out = [0.0; 5];
        for i in 0..5 {
            out[i] = t * blocks.0[i] - tau * t * blocks.1[i] + 0.5 * t * t * blocks.2[i];
        }
        out
    };

    let fb = assemble(1);
    let vb = assemble(0);
    let f_half = combine(&fb, 0.5 * dt);
    let f_full = combine(&fb, dt);
    let wint_half = combine(&vb, 0.5 * dt);
    let wint_full = combine(&vb, dt);
    let mut w_t0 = [0.0; 5];
    let mut w_t1 = [0.0; 5];
    for i in 0..5 {
        w_t0[i] = (4.0 * wint_half[i] - wint_full[i]) / dt;
        w_t1[i] = 4.0 * (wint_full[i] - 2.0 * wint_half[i]) / (dt * dt);
    }
    let result = FluxResult {
        f_half,
        f_full,
        w_t0,
        w_t1,
        fallback: false,
    };
    if crate::state::is_physical(&result.w_end(dt)) && crate::state::is_physical(&result.w_t0) {
        Ok(result)
    } else {
        Ok(kfvs_fallback(&l, &r, &w_c, dt))
    }
}

/// Solve the linear-in-time fit F(t) = F + F_t t from the two window
/// integrals: F_full = F dt + F_t dt^2/2, F_half = F dt/2 + F_t dt^2/8.
pub fn s2o4_flux_pair(
    f_half: &Conserved,
    f_full: &Conserved,
    dt: f64,
) -> Result<(Conserved, Conserved)> {
    if dt <= 0.0 {
        return Err(Error::InvalidState(format!("non-positive time step {dt:e}")));
    }
    let mut f = [0.0; 5];
    let mut f_t = [0.0; 5];
    for i in 0..5 {
        f[i] = (4.0 * f_half[i] - f_full[i]) / dt;
        f_t[i] = 4.0 * (f_full[i] - 2.0 * f_half[i]) / (dt * dt);
    }
    Ok((f, f_t))
}

/// Orthonormal face frame; the first axis is the outward unit normal.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub axes: [Vec3; 3],
}

impl Frame {
    pub fn from_normal(n: Vec3) -> Frame {
        Frame {
            axes: crate::math::orthonormal_frame(n),
        }
    }

    pub fn new(axes: [Vec3; 3]) -> Result<Frame> {
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot(axes[i], axes[j]) - want).abs() > 1e-10 {
                    return Err(Error::InvalidState("non-orthonormal face frame".into()));
                }
            }
        }
        Ok(Frame { axes })
    }

    /// Rotate velocity components of a state into the local frame.
    pub fn state_to_local(&self, w: &Conserved) -> Conserved {
        let m = [w[1], w[2], w[3]];
        [
            w[0],
            dot(self.axes[0], m),
            dot(self.axes[1], m),
            dot(self.axes[2], m),
            w[4],
        ]
    }

    pub fn state_from_local(&self, w: &Conserved) -> Conserved {
        let mut m = [0.0; 3];
        for d in 0..3 {
            for e in 0..3 {
                m[e] += self.axes[d][e] * w[1 + d];
            }
        }
        [w[0], m[0], m[1], m[2], w[4]]
    }

    /// Rotate both the derivative directions and the momentum components.
    pub fn gradient_to_local(&self, g: &Gradient) -> Gradient {
        let rotated = [
            self.state_to_local(&g[0]),
            self.state_to_local(&g[1]),
            self.state_to_local(&g[2]),
        ];
        let mut out = [[0.0; 5]; 3];
        for d in 0..3 {
            for e in 0..3 {
                let a = self.axes[d][e];
                if a == 0.0 {
                    continue;
                }
                for i in 0..5 {
                    out[d][i] += a * rotated[e][i];
                }
            }
        }
        out
    }

    /// Rotate a local flux (or any state-like 5-vector) back to global axes.
    pub fn flux_from_local(&self, f: &Conserved) -> Conserved {
        self.state_from_local(f)
    }
}
