//! Independent numerical oracles used by the test suite.
//!
//! Everything here goes through plain composite Gauss-Legendre quadrature in
//! velocity space instead of the closed-form moment recursions, so it can
//! cross-check the production moment tables and flux assembly without sharing
//! their code path.

use crate::kinetic::Range;

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre polynomial.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-based initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // evaluate P_n and P_n' via the recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Composite 16-point Gauss-Legendre integration of `f` over [a, b].
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(16);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let x0 = a + p as f64 * h;
        let mid = x0 + 0.5 * h;
        let half = 0.5 * h;
        let mut s = 0.0;
        for (x, w) in nodes.iter().zip(weights.iter()) {
            s += w * f(mid + half * x);
        }
        total += s * half;
    }
    total
}

const VRANGE: f64 = 40.0;
const PANELS: usize = 160;

/// Quadrature-backed moments of a normalized Maxwellian with mean velocity
/// `u`, inverse-temperature `lambda` and `k` internal degrees of freedom.
pub struct MomentOracle {
    u: [f64; 3],
    lambda: f64,
    k: f64,
}

impl MomentOracle {
    pub fn new(u: [f64; 3], lambda: f64, k: f64) -> Self {
        MomentOracle { u, lambda, k }
    }

    fn gauss_1d(&self, mean: f64, x: f64) -> f64 {
        (self.lambda / std::f64::consts::PI).sqrt() * (-self.lambda * (x - mean) * (x - mean)).exp()
    }

    /// <u1^n> over the requested half or full range.
    pub fn u_moment(&self, n: u32, range: Range) -> f64 {
        let mean = self.u[0];
        let f = |x: f64| x.powi(n as i32) * self.gauss_1d(mean, x);
        match range {
            Range::Full => integrate(f, -VRANGE, VRANGE, PANELS),
            Range::Pos => integrate(f, 0.0, VRANGE, PANELS),
            Range::Neg => integrate(f, -VRANGE, 0.0, PANELS),
        }
    }

    /// <u_dim^n> over the full range for a tangential direction (dim = 1, 2).
    pub fn v_moment(&self, n: u32, dim: usize) -> f64 {
        let mean = self.u[dim];
        integrate(
            |x| x.powi(n as i32) * self.gauss_1d(mean, x),
            -VRANGE,
            VRANGE,
            PANELS,
        )
    }

    fn xi_single(&self, n: u32) -> f64 {
        integrate(
            |x| x.powi(n as i32) * self.gauss_1d(0.0, x),
            -VRANGE,
            VRANGE,
            PANELS,
        )
    }

    /// <xi^2> with xi^2 summed over k internal degrees of freedom.
    pub fn xi2(&self) -> f64 {
        self.k * self.xi_single(2)
    }

    /// <xi^4> = k <s^4> + k(k-1) <s^2>^2 for independent internal dofs.
    pub fn xi4(&self) -> f64 {
        let m2 = self.xi_single(2);
        let m4 = self.xi_single(4);
        self.k * m4 + self.k * (self.k - 1.0) * m2 * m2
    }

    /// <u1^a u2^b u3^c xi^(2d)> (d = 0, 1, 2).
    pub fn mono(&self, a: u32, b: u32, c: u32, d: u32, range: Range) -> f64 {
        let xi = match d {
            0 => 1.0,
            1 => self.xi2(),
            2 => self.xi4(),
            _ => panic!("xi power too high"),
        };
        self.u_moment(a, range) * self.v_moment(b, 1) * self.v_moment(c, 2) * xi
    }

    /// psi-moment vector <u1^j psi>.
    pub fn psi_moment(&self, j: u32, range: Range) -> [f64; 5] {
        let m = |a, b, c, d| self.mono(a, b, c, d, range);
        [
            m(j, 0, 0, 0),
            m(j + 1, 0, 0, 0),
            m(j, 1, 0, 0),
            m(j, 0, 1, 0),
            0.5 * (m(j + 2, 0, 0, 0) + m(j, 2, 0, 0) + m(j, 0, 2, 0) + m(j, 0, 0, 1)),
        ]
    }

    /// <s u1^a u2^b u3^c psi> for a slope expansion s over
    /// (1, u1, u2, u3, (u^2+xi^2)/2).
    pub fn psi_slope_moment_uvw(
        &self,
        coeff: &[f64; 5],
        a: u32,
        b: u32,
        c: u32,
        range: Range,
    ) -> [f64; 5] {
        let m = |a, b, c, d| self.mono(a, b, c, d, range);
        let psi_of = |a: u32, b: u32, c: u32, d: u32| -> [f64; 5] {
            [
                m(a, b, c, d),
                m(a + 1, b, c, d),
                m(a, b + 1, c, d),
                m(a, b, c + 1, d),
                0.5 * (m(a + 2, b, c, d) + m(a, b + 2, c, d) + m(a, b, c + 2, d) + m(a, b, c, d + 1)),
            ]
        };
        let p0 = psi_of(a, b, c, 0);
        let pu = psi_of(a + 1, b, c, 0);
        let pv = psi_of(a, b + 1, c, 0);
        let pw = psi_of(a, b, c + 1, 0);
        let eu = psi_of(a + 2, b, c, 0);
        let ev = psi_of(a, b + 2, c, 0);
        let ew = psi_of(a, b, c + 2, 0);
        let ex = psi_of(a, b, c, 1);
        let mut out = [0.0; 5];
        for i in 0..5 {
            out[i] = coeff[0] * p0[i]
                + coeff[1] * pu[i]
                + coeff[2] * pv[i]
                + coeff[3] * pw[i]
                + coeff[4] * 0.5 * (eu[i] + ev[i] + ew[i] + ex[i]);
        }
        out
    }

    /// <s u1^j psi>, the normal-direction special case.
    pub fn psi_slope_moment(&self, coeff: &[f64; 5], j: u32, range: Range) -> [f64; 5] {
        self.psi_slope_moment_uvw(coeff, j, 0, 0, range)
    }

    /// <(s_x1 u1 + s_x2 u2 + s_x3 u3) u1^j psi> for three spatial slopes.
    pub fn psi_slope_dot_u_moment(
        &self,
        slopes: &[[f64; 5]; 3],
        j: u32,
        range: Range,
    ) -> [f64; 5] {
        let t1 = self.psi_slope_moment_uvw(&slopes[0], j + 1, 0, 0, range);
        let t2 = self.psi_slope_moment_uvw(&slopes[1], j, 1, 0, range);
        let t3 = self.psi_slope_moment_uvw(&slopes[2], j, 0, 1, range);
        let mut out = [0.0; 5];
        for i in 0..5 {
            out[i] = t1[i] + t2[i] + t3[i];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        let (n, w) = gauss_legendre(16);
        assert_eq!(n.len(), 16);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // degree-31 monomial is exact for 16 points
        let val = integrate(|x| x.powi(8), -1.0, 1.0, 1);
        assert!((val - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_normalization() {
        let o = MomentOracle::new([0.4, 0.0, 0.0], 0.9, 2.0);
        assert!((o.u_moment(0, Range::Full) - 1.0).abs() < 1e-13);
    }
}
