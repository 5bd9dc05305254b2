//! Maxwellian parameterization, velocity-space moment tables and the
//! microscopic slope solves.
//!
//! All moments are taken against the normalized equilibrium distribution
//! (density factored out): `<u1^a u2^b u3^c xi^2d>` with `<1> = 1`. The
//! moment vector over psi = (1, u1, u2, u3, (u^2+xi^2)/2) is the workhorse
//! of the flux solver; half-space variants split the normal velocity u1 at
//! zero and are seeded by the complementary error function.

use crate::error::{Error, Result};
use crate::state::{Conserved, GasModel};

/// Parameters (rho, U, lambda) of the equilibrium distribution, with
/// lambda = 1/(2RT) in the nondimensional form (R absorbed).
#[derive(Debug, Clone, Copy)]
pub struct Maxwellian {
    pub rho: f64,
    pub u: [f64; 3],
    pub lambda: f64,
}

const LAMBDA_MIN: f64 = 1e-12;
const LAMBDA_MAX: f64 = 1e12;

/// lambda = (K+3) rho / (4 (rhoE - 0.5 rho |U|^2)); for an ideal gas this
/// reduces to rho/(2p).
pub fn maxwellian_from_conserved(w: &Conserved, gas: &GasModel) -> Result<Maxwellian> {
    let rho = w[0];
    if !(rho > 0.0) {
        return Err(Error::InvalidState(format!("non-positive density {rho:e}")));
    }
    let u = [w[1] / rho, w[2] / rho, w[3] / rho];
    let e_int = w[4] - 0.5 * rho * (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
    if !(e_int > 0.0) {
        return Err(Error::InvalidState(format!(
            "non-positive internal energy {e_int:e}"
        )));
    }
    let lambda = (gas.k + 3.0) * rho / (4.0 * e_int);
    if !(LAMBDA_MIN..=LAMBDA_MAX).contains(&lambda) {
        return Err(Error::InvalidState(format!("lambda {lambda:e} out of range")));
    }
    Ok(Maxwellian { rho, u, lambda })
}

pub fn conserved_from_maxwellian(g: &Maxwellian, gas: &GasModel) -> Conserved {
    let q2 = g.u[0] * g.u[0] + g.u[1] * g.u[1] + g.u[2] * g.u[2];
    [
        g.rho,
        g.rho * g.u[0],
        g.rho * g.u[1],
        g.rho * g.u[2],
        0.5 * g.rho * (q2 + (gas.k + 3.0) / (2.0 * g.lambda)),
    ]
}

/// Velocity-space half range for the face-normal component u1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Range {
    Full,
    /// u1 > 0
    Pos,
    /// u1 < 0
    Neg,
}

const NMOM: usize = 7; // powers 0..=6

/// Moments of the normalized Maxwellian: full and half-space powers of the
/// normal velocity, full powers of the tangential velocities, and the
/// internal-variable moments <xi^2>, <xi^4>.
#[derive(Debug, Clone)]
pub struct MomentTable {
    pub u_full: [f64; NMOM],
    pub u_pos: [f64; NMOM],
    pub u_neg: [f64; NMOM],
    pub v_full: [f64; NMOM],
    pub w_full: [f64; NMOM],
    pub xi2: f64,
    pub xi4: f64,
    pub state: Maxwellian,
}

fn full_moments(u: f64, lambda: f64) -> [f64; NMOM] {
    let mut m = [0.0; NMOM];
    m[0] = 1.0;
    m[1] = u;
    for n in 0..NMOM - 2 {
        m[n + 2] = u * m[n + 1] + (n as f64 + 1.0) * 0.5 / lambda * m[n];
    }
    m
}

pub fn moment_table(state: &Maxwellian, gas: &GasModel) -> MomentTable {
    let l = state.lambda;
    let [u, v, w] = state.u;
    let sql = l.sqrt();
    // half moments, seeded by erfc and the Gaussian point mass at u1=0
    let mut pos = [0.0; NMOM];
    let mut neg = [0.0; NMOM];
    let gauss = (-l * u * u).exp() * 0.5 / (std::f64::consts::PI * l).sqrt();
    pos[0] = 0.5 * libm::erfc(-sql * u);
    neg[0] = 0.5 * libm::erfc(sql * u);
    pos[1] = u * pos[0] + gauss;
    neg[1] = u * neg[0] - gauss;
    for n in 0..NMOM - 2 {
        let c = (n as f64 + 1.0) * 0.5 / l;
        pos[n + 2] = u * pos[n + 1] + c * pos[n];
        neg[n + 2] = u * neg[n + 1] + c * neg[n];
    }
    MomentTable {
        u_full: full_moments(u, l),
        u_pos: pos,
        u_neg: neg,
        v_full: full_moments(v, l),
        w_full: full_moments(w, l),
        xi2: gas.k * 0.5 / l,
        xi4: gas.k * (gas.k + 2.0) * 0.25 / (l * l),
        state: *state,
    }
}

impl MomentTable {
    #[inline]
    fn u_mom(&self, range: Range) -> &[f64; NMOM] {
        match range {
            Range::Full => &self.u_full,
            Range::Pos => &self.u_pos,
            Range::Neg => &self.u_neg,
        }
    }

    /// <u1^a u2^b u3^c> over the given u1 range (normalized).
    #[inline]
    pub fn uvw(&self, a: usize, b: usize, c: usize, range: Range) -> f64 {
        self.u_mom(range)[a] * self.v_full[b] * self.w_full[c]
    }

    /// psi-moment vector <u1^a u2^b u3^c psi> (normalized by density).
    #[inline]
    pub fn psi(&self, a: usize, b: usize, c: usize, range: Range) -> [f64; 5] {
        let m = |a, b, c| self.uvw(a, b, c, range);
        [
            m(a, b, c),
            m(a + 1, b, c),
            m(a, b + 1, c),
            m(a, b, c + 1),
            0.5 * (m(a + 2, b, c) + m(a, b + 2, c) + m(a, b, c + 2) + self.xi2 * m(a, b, c)),
        ]
    }

    /// psi-moment vector with an extra xi^2 factor in the integrand.
    #[inline]
    fn psi_xi2(&self, a: usize, b: usize, c: usize, range: Range) -> [f64; 5] {
        let m = |a, b, c| self.uvw(a, b, c, range);
        [
            self.xi2 * m(a, b, c),
            self.xi2 * m(a + 1, b, c),
            self.xi2 * m(a, b + 1, c),
            self.xi2 * m(a, b, c + 1),
            0.5 * (self.xi2 * (m(a + 2, b, c) + m(a, b + 2, c) + m(a, b, c + 2))
                + self.xi4 * m(a, b, c)),
        ]
    }

    /// <s u1^a u2^b u3^c psi> where s is a micro-slope expansion over
    /// (1, u1, u2, u3, (u^2+xi^2)/2).
    pub fn psi_slope(&self, s: &MicroSlope, a: usize, b: usize, c: usize, range: Range) -> [f64; 5] {
        let p0 = self.psi(a, b, c, range);
        let p1 = self.psi(a + 1, b, c, range);
        let p2 = self.psi(a, b + 1, c, range);
        let p3 = self.psi(a, b, c + 1, range);
        let eu = self.psi(a + 2, b, c, range);
        let ev = self.psi(a, b + 2, c, range);
        let ew = self.psi(a, b, c + 2, range);
        let ex = self.psi_xi2(a, b, c, range);
        let mut out = [0.0; 5];
        for i in 0..5 {
            out[i] = s.c[0] * p0[i]
                + s.c[1] * p1[i]
                + s.c[2] * p2[i]
                + s.c[3] * p3[i]
                + s.c[4] * 0.5 * (eu[i] + ev[i] + ew[i] + ex[i]);
        }
        out
    }

    /// <(a . u) u1^j psi> for spatial slopes a = (a_x1, a_x2, a_x3).
    pub fn psi_slope_dot_u(&self, s: &[MicroSlope; 3], j: usize, range: Range) -> [f64; 5] {
        let t1 = self.psi_slope(&s[0], j + 1, 0, 0, range);
        let t2 = self.psi_slope(&s[1], j, 1, 0, range);
        let t3 = self.psi_slope(&s[2], j, 0, 1, range);
        let mut out = [0.0; 5];
        for i in 0..5 {
            out[i] = t1[i] + t2[i] + t3[i];
        }
        out
    }
}

/// Expansion coefficients of a microscopic derivative of the Maxwellian over
/// the basis (1, u1, u2, u3, (u^2+xi^2)/2).
#[derive(Debug, Clone, Copy, Default)]
pub struct MicroSlope {
    pub c: [f64; 5],
}

/// Solve <a psi> = grad_w for the expansion a, in closed form.
///
/// The moment system is lower-triangular after subtracting the convective
/// parts, which is the standard GKS elimination; it is nonsingular for any
/// valid Maxwellian.
pub fn micro_slope(state: &Maxwellian, grad_w: &Conserved, gas: &GasModel) -> MicroSlope {
    let [u, v, w] = state.u;
    let l = state.lambda;
    let inv_rho = 1.0 / state.rho;
    let h0 = grad_w[0] * inv_rho;
    let h1 = grad_w[1] * inv_rho;
    let h2 = grad_w[2] * inv_rho;
    let h3 = grad_w[3] * inv_rho;
    let h4 = grad_w[4] * inv_rho;

    let q2 = u * u + v * v + w * w;
    let e = 0.5 * (q2 + (gas.k + 3.0) * 0.5 / l);
    let r1 = h1 - u * h0;
    let r2 = h2 - v * h0;
    let r3 = h3 - w * h0;
    let r4 = h4 - e * h0;

    let a5 = 8.0 * l * l / (gas.k + 3.0) * (r4 - u * r1 - v * r2 - w * r3);
    let a2 = 2.0 * l * r1 - u * a5;
    let a3 = 2.0 * l * r2 - v * a5;
    let a4 = 2.0 * l * r3 - w * a5;
    let a1 = h0 - u * a2 - v * a3 - w * a4 - e * a5;
    MicroSlope {
        c: [a1, a2, a3, a4, a5],
    }
}

/// Solve <A psi> = -<(a_x1 u1 + a_x2 u2 + a_x3 u3) psi> for the temporal
/// slope A via the compatibility condition.
pub fn temporal_slope(
    state: &Maxwellian,
    table: &MomentTable,
    spatial: &[MicroSlope; 3],
    gas: &GasModel,
) -> MicroSlope {
    let m = table.psi_slope_dot_u(spatial, 0, Range::Full);
    // psi_slope_dot_u is normalized by density; micro_slope expects a
    // density-scaled right-hand side.
    let rhs = [
        -m[0] * state.rho,
        -m[1] * state.rho,
        -m[2] * state.rho,
        -m[3] * state.rho,
        -m[4] * state.rho,
    ];
    micro_slope(state, &rhs, gas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::oracles::MomentOracle;
    use crate::state::conserved;

    const AIR: GasModel = GasModel { gamma: 1.4, k: 2.0 };

    #[test]
    fn lambda_of_unit_state() {
        let w = conserved(1.0, [0.0, 0.0, 0.0], 1.0, &AIR);
        let g = maxwellian_from_conserved(&w, &AIR).unwrap();
        assert!((g.lambda - 0.5).abs() < 1e-14);
    }

    #[test]
    fn lambda_galilean_invariant() {
        let w = conserved(1.0, [1.0, 1.0, 1.0], 1.0, &AIR);
        let g = maxwellian_from_conserved(&w, &AIR).unwrap();
        assert!((g.lambda - 0.5).abs() < 1e-14);
        assert!((g.u[0] - 1.0).abs() < 1e-14);
        assert!((g.u[1] - 1.0).abs() < 1e-14);
        assert!((g.u[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn shu_osher_left_state_roundtrip() {
        let w = conserved(3.857134, [2.629369, 0.0, 0.0], 10.33333, &AIR);
        let g = maxwellian_from_conserved(&w, &AIR).unwrap();
        let back = conserved_from_maxwellian(&g, &AIR);
        for i in 0..5 {
            assert!(
                (back[i] - w[i]).abs() <= 1e-12 * w[i].abs().max(1.0),
                "component {i}: {} vs {}",
                back[i],
                w[i]
            );
        }
    }

    #[test]
    fn rejects_invalid_states() {
        let w = [-1.0, 0.0, 0.0, 0.0, 1.0];
        assert!(maxwellian_from_conserved(&w, &AIR).is_err());
        let w = [1.0, 3.0, 0.0, 0.0, 1.0]; // e_int = 1 - 4.5 < 0
        assert!(maxwellian_from_conserved(&w, &AIR).is_err());
        // lambda outside the accepted range is rejected, not clamped
        let w = [1.0, 0.0, 0.0, 0.0, 1e-14];
        assert!(maxwellian_from_conserved(&w, &AIR).is_err());
    }

    #[test]
    fn second_moment_at_rest() {
        let g = Maxwellian {
            rho: 1.0,
            u: [0.0, 0.0, 0.0],
            lambda: 1.0,
        };
        let t = moment_table(&g, &AIR);
        assert!((t.u_full[2] - 0.5).abs() < 1e-15);
        assert!((t.u_pos[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn moments_match_quadrature_oracle() {
        let g = Maxwellian {
            rho: 1.0,
            u: [0.7, -0.3, 0.45],
            lambda: 1.3,
        };
        let t = moment_table(&g, &AIR);
        let oracle = MomentOracle::new(g.u, g.lambda, AIR.k);
        for n in 0..NMOM {
            let full = oracle.u_moment(n as u32, Range::Full);
            let pos = oracle.u_moment(n as u32, Range::Pos);
            let neg = oracle.u_moment(n as u32, Range::Neg);
            let tol = 1e-10 * full.abs().max(1.0);
            assert!((t.u_full[n] - full).abs() < tol, "u^{n} full");
            assert!((t.u_pos[n] - pos).abs() < tol, "u^{n} pos");
            assert!((t.u_neg[n] - neg).abs() < tol, "u^{n} neg");
            let v = oracle.v_moment(n as u32, 1);
            let w = oracle.v_moment(n as u32, 2);
            assert!((t.v_full[n] - v).abs() < 1e-10 * v.abs().max(1.0), "v^{n}");
            assert!((t.w_full[n] - w).abs() < 1e-10 * w.abs().max(1.0), "w^{n}");
        }
        assert!((t.xi2 - oracle.xi2()).abs() < 1e-10);
        assert!((t.xi4 - oracle.xi4()).abs() < 1e-10);
    }

    #[test]
    fn half_moments_sum_to_full() {
        for (u, l) in [(0.0, 1.0), (0.9, 0.6), (-2.1, 2.4), (4.0, 0.2)] {
            let g = Maxwellian {
                rho: 1.0,
                u: [u, 0.1, -0.2],
                lambda: l,
            };
            let t = moment_table(&g, &AIR);
            for n in 0..NMOM {
                let s = t.u_pos[n] + t.u_neg[n];
                assert!(
                    (s - t.u_full[n]).abs() <= 1e-13 * t.u_full[n].abs().max(1e-30),
                    "n={n} u={u} l={l}"
                );
            }
        }
    }

    #[test]
    fn half_moment_reflection_symmetry() {
        // <u^n>_{>0}(U) = (-1)^n <u^n>_{<0}(-U)
        for (u, l) in [(0.8, 1.1), (-1.4, 0.7), (0.0, 2.0)] {
            let a = moment_table(
                &Maxwellian {
                    rho: 1.0,
                    u: [u, 0.0, 0.0],
                    lambda: l,
                },
                &AIR,
            );
            let b = moment_table(
                &Maxwellian {
                    rho: 1.0,
                    u: [-u, 0.0, 0.0],
                    lambda: l,
                },
                &AIR,
            );
            for n in 0..NMOM {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                assert!(
                    (a.u_pos[n] - sign * b.u_neg[n]).abs() < 1e-12 * a.u_pos[n].abs().max(1.0),
                    "n={n}"
                );
            }
        }
    }

    #[test]
    fn monatomic_has_no_internal_dof() {
        let gas = GasModel::new(5.0 / 3.0);
        let g = Maxwellian {
            rho: 1.0,
            u: [0.3, 0.0, 0.0],
            lambda: 0.8,
        };
        let t = moment_table(&g, &gas);
        assert_eq!(t.xi2, 0.0);
        assert_eq!(t.xi4, 0.0);
    }

    #[test]
    fn conserved_moment_roundtrip() {
        let gas = AIR;
        let w = conserved(2.3, [0.5, -1.2, 0.3], 1.7, &gas);
        let g = maxwellian_from_conserved(&w, &gas).unwrap();
        let t = moment_table(&g, &gas);
        let psi = t.psi(0, 0, 0, Range::Full);
        for i in 0..5 {
            let back = g.rho * psi[i];
            assert!((back - w[i]).abs() < 1e-12 * w[i].abs().max(1.0), "comp {i}");
        }
    }

    #[test]
    fn micro_slope_zero_gradient() {
        let g = Maxwellian {
            rho: 1.0,
            u: [0.4, 0.1, -0.6],
            lambda: 0.9,
        };
        let s = micro_slope(&g, &[0.0; 5], &AIR);
        for c in s.c {
            assert_eq!(c, 0.0);
        }
    }

    #[test]
    fn micro_slope_remoment_roundtrip() {
        let gas = AIR;
        let g = Maxwellian {
            rho: 1.4,
            u: [0.6, -0.2, 0.9],
            lambda: 1.1,
        };
        let t = moment_table(&g, &gas);
        let grad = [0.3, -0.1, 0.45, 0.2, -0.7];
        let s = micro_slope(&g, &grad, &gas);
        let m = t.psi_slope(&s, 0, 0, 0, Range::Full);
        for i in 0..5 {
            let back = g.rho * m[i];
            assert!(
                (back - grad[i]).abs() < 1e-12 * grad[i].abs().max(1.0),
                "comp {i}: {back} vs {}",
                grad[i]
            );
        }
    }

    #[test]
    fn micro_slope_matches_quadrature_oracle() {
        let gas = AIR;
        let g = Maxwellian {
            rho: 0.8,
            u: [1.2, 0.4, -0.5],
            lambda: 2.1,
        };
        let grad = [0.12, -0.55, 0.31, 0.08, 0.9];
        let s = micro_slope(&g, &grad, &gas);
        let oracle = MomentOracle::new(g.u, g.lambda, gas.k);
        let m = oracle.psi_slope_moment(&s.c, 0, Range::Full);
        for i in 0..5 {
            let back = g.rho * m[i];
            assert!(
                (back - grad[i]).abs() < 1e-9 * grad[i].abs().max(1.0),
                "comp {i}: {back} vs {}",
                grad[i]
            );
        }
    }

    #[test]
    fn micro_slope_linearity() {
        let gas = AIR;
        let g = Maxwellian {
            rho: 1.0,
            u: [0.3, -0.7, 0.2],
            lambda: 0.75,
        };
        let g1 = [0.2, 0.1, -0.3, 0.5, 0.9];
        let g2 = [-0.4, 0.8, 0.05, -0.2, 0.3];
        let (al, be) = (1.7, -0.6);
        let mut comb = [0.0; 5];
        for i in 0..5 {
            comb[i] = al * g1[i] + be * g2[i];
        }
        let s1 = micro_slope(&g, &g1, &gas);
        let s2 = micro_slope(&g, &g2, &gas);
        let sc = micro_slope(&g, &comb, &gas);
        for i in 0..5 {
            let lin = al * s1.c[i] + be * s2.c[i];
            assert!((sc.c[i] - lin).abs() < 1e-12 * lin.abs().max(1.0));
        }
    }

    #[test]
    fn temporal_slope_zero_for_zero_spatial() {
        let gas = AIR;
        let g = Maxwellian {
            rho: 1.0,
            u: [0.5, 0.5, 0.5],
            lambda: 1.0,
        };
        let t = moment_table(&g, &gas);
        let zero = MicroSlope::default();
        let a = temporal_slope(&g, &t, &[zero, zero, zero], &gas);
        for c in a.c {
            assert_eq!(c, 0.0);
        }
    }

    #[test]
    fn temporal_slope_contact_advection() {
        // Uniform pressure and velocity, density gradient only: the exact
        // time derivative is -U . grad W.
        let gas = AIR;
        let rho = 1.3;
        let u = [0.8, 0.0, 0.0];
        let p = 1.0;
        let w = conserved(rho, u, p, &gas);
        let g = maxwellian_from_conserved(&w, &gas).unwrap();
        let t = moment_table(&g, &gas);
        // d/dx of (rho, rho u, rho E) with u, p constant:
        let drho = 0.37;
        let grad_x: Conserved = [
            drho,
            drho * u[0],
            0.0,
            0.0,
            0.5 * drho * (u[0] * u[0]),
        ];
        let sx = micro_slope(&g, &grad_x, &gas);
        let zero = MicroSlope::default();
        let a = temporal_slope(&g, &t, &[sx, zero, zero], &gas);
        let oracle = MomentOracle::new(g.u, g.lambda, gas.k);
        let m = oracle.psi_slope_moment(&a.c, 0, Range::Full);
        for i in 0..5 {
            let got = g.rho * m[i];
            let want = -u[0] * grad_x[i];
            assert!(
                (got - want).abs() < 1e-9 * want.abs().max(1.0),
                "comp {i}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn temporal_slope_compatibility_residual() {
        let gas = AIR;
        let g = Maxwellian {
            rho: 1.9,
            u: [-0.4, 0.9, 0.15],
            lambda: 0.65,
        };
        let t = moment_table(&g, &gas);
        let gx = micro_slope(&g, &[0.3, 0.2, -0.6, 0.1, 0.8], &gas);
        let gy = micro_slope(&g, &[-0.2, 0.7, 0.4, -0.3, 0.2], &gas);
        let gz = micro_slope(&g, &[0.05, -0.1, 0.2, 0.9, -0.4], &gas);
        let slopes = [gx, gy, gz];
        let a = temporal_slope(&g, &t, &slopes, &gas);
        let mut resid = t.psi_slope(&a, 0, 0, 0, Range::Full);
        let conv = t.psi_slope_dot_u(&slopes, 0, Range::Full);
        for i in 0..5 {
            resid[i] += conv[i];
            assert!(resid[i].abs() < 1e-11, "comp {i}: {}", resid[i]);
        }
    }
}
