//! Compact third-order spatial reconstruction.
//!
//! A quadratic polynomial per cell is solved from the von Neumann stencil by
//! a constrained least-squares fit: the neighbor cell averages are matched
//! exactly, the neighbor average gradients in a least-squares sense. The
//! multi-resolution WENO combination blends it with the cell's own linear
//! and constant data near discontinuities, and the gradient compression
//! factor damps the updated cell-averaged gradients where interface jumps
//! appear.

use crate::error::{Error, Result};
use crate::math::{sub, LuFactors, Vec3};
use crate::mesh::{CellGeometry, Mesh};
use crate::state::{CellSolution, Conserved, GasModel, Gradient};
use rayon::prelude::*;

/// Linear weights gamma_{2,2}:gamma_{1,2}:gamma_{0,2} = 100:1:6 and
/// gamma_{1,1}:gamma_{0,1} = 1:6, normalized to sum to one per level.
#[derive(Debug, Clone, Copy)]
pub struct WenoParams {
    pub gamma2: [f64; 3], // [gamma_{0,2}, gamma_{1,2}, gamma_{2,2}]
    pub gamma1: [f64; 2], // [gamma_{0,1}, gamma_{1,1}]
    pub epsilon: f64,
}

impl Default for WenoParams {
    fn default() -> Self {
        WenoParams {
            gamma2: [6.0 / 107.0, 1.0 / 107.0, 100.0 / 107.0],
            gamma1: [6.0 / 7.0, 1.0 / 7.0],
            epsilon: 1e-16,
        }
    }
}

/// Per-point gradient compression factor parameters: Q is the density,
/// K_s = 2, C_1 = 1.5, C_2 = 0.2, K_t = 4.
#[derive(Debug, Clone, Copy)]
pub struct CfParams {
    pub k_s: i32,
    pub c1: f64,
    pub c2: f64,
    pub k_t: i32,
    pub epsilon: f64,
}

impl Default for CfParams {
    fn default() -> Self {
        CfParams {
            k_s: 2,
            c1: 1.5,
            c2: 0.2,
            k_t: 4,
            epsilon: 1e-16,
        }
    }
}

/// Quadratic polynomial for all five conserved components over the zero-mean
/// monomial basis [dx, dy, dz, dx2, dy2, dz2, dxdy, dxdz, dydz] in
/// centroid-relative coordinates.
#[derive(Debug, Clone, Copy)]
pub struct CellPoly {
    pub mean: Conserved,
    /// coeffs[k][component]
    pub coeffs: [[f64; 5]; 9],
}

impl CellPoly {
    pub fn from_linear(sol: &CellSolution) -> CellPoly {
        let mut coeffs = [[0.0; 5]; 9];
        for d in 0..3 {
            coeffs[d] = sol.grad[d];
        }
        CellPoly {
            mean: sol.avg,
            coeffs,
        }
    }

    /// Value and gradient at a point, given the owning cell's geometry.
    pub fn eval(&self, geo: &CellGeometry, x: Vec3) -> (Conserved, Gradient) {
        let d = sub(x, geo.centroid);
        let m = &geo.moments;
        let basis = [
            d[0] - m[0],
            d[1] - m[1],
            d[2] - m[2],
            d[0] * d[0] - m[3],
            d[1] * d[1] - m[4],
            d[2] * d[2] - m[5],
            d[0] * d[1] - m[6],
            d[0] * d[2] - m[7],
            d[1] * d[2] - m[8],
        ];
        let mut val = self.mean;
        for (k, b) in basis.iter().enumerate() {
            for i in 0..5 {
                val[i] += b * self.coeffs[k][i];
            }
        }
        let mut grad = [[0.0; 5]; 3];
        for i in 0..5 {
            let c = |k: usize| self.coeffs[k][i];
            grad[0][i] = c(0) + 2.0 * c(3) * d[0] + c(6) * d[1] + c(7) * d[2];
            grad[1][i] = c(1) + 2.0 * c(4) * d[1] + c(6) * d[0] + c(8) * d[2];
            grad[2][i] = c(2) + 2.0 * c(5) * d[2] + c(7) * d[0] + c(8) * d[1];
        }
        (val, grad)
    }
}

/// Precomputed constrained least-squares solve operator of one cell:
/// maps the stencil data (neighbor average differences and neighbor average
/// slopes) linearly onto the 9 polynomial coefficients.
#[derive(Debug, Clone)]
pub struct ReconOperator {
    n_nb: usize,
    /// 9 x 4n matrix, row-major; data order: n mean-diffs, n x-slopes,
    /// n y-slopes, n z-slopes.
    op: Vec<f64>,
    pub degenerate: bool,
}

/// Mean of the scaled zero-mean basis functions of the target cell over a
/// neighbor cell, and the mean of their gradients.
fn stencil_rows(target: &CellGeometry, nb: &CellGeometry) -> ([f64; 9], [[f64; 9]; 3]) {
    let dr = target.dr;
    let r = [
        (nb.centroid[0] - target.centroid[0]) / dr,
        (nb.centroid[1] - target.centroid[1]) / dr,
        (nb.centroid[2] - target.centroid[2]) / dr,
    ];
    let t = &target.moments;
    let m = &nb.moments;
    let dr2 = dr * dr;
    // mean over nb of scaled basis: E[(x-x0)^k]/dr^|k| - E0[(x-x0)^k]/dr^|k|
    let mean = [
        r[0] - t[0] / dr,
        r[1] - t[1] / dr,
        r[2] - t[2] / dr,
        m[3] / dr2 + r[0] * r[0] - t[3] / dr2,
        m[4] / dr2 + r[1] * r[1] - t[4] / dr2,
        m[5] / dr2 + r[2] * r[2] - t[5] / dr2,
        m[6] / dr2 + r[0] * r[1] - t[6] / dr2,
        m[7] / dr2 + r[0] * r[2] - t[7] / dr2,
        m[8] / dr2 + r[1] * r[2] - t[8] / dr2,
    ];
    // mean over nb of d(scaled basis)/dx_d, times dr (row scaling)
    let mut grad = [[0.0; 9]; 3];
    for d in 0..3 {
        grad[d][d] = 1.0;
    }
    grad[0][3] = 2.0 * r[0];
    grad[1][4] = 2.0 * r[1];
    grad[2][5] = 2.0 * r[2];
    grad[0][6] = r[1];
    grad[1][6] = r[0];
    grad[0][7] = r[2];
    grad[2][7] = r[0];
    grad[1][8] = r[2];
    grad[2][8] = r[1];
    (mean, grad)
}

impl ReconOperator {
    /// Build the solve operator for `cell` from the mesh stencil. A rank
    /// deficiency in the constrained system marks the operator degenerate
    /// instead of failing; callers then fall back to the linear polynomial.
    pub fn build(mesh: &Mesh, cell: usize) -> ReconOperator {
        let nb_ids = &mesh.stencil[cell];
        let n = nb_ids.len();
        let target = &mesh.geometry[cell];
        let mut cmat = vec![0.0; n * 9]; // exact constraints
        let mut dmat = vec![0.0; 3 * n * 9]; // least-squares rows
        for (j, &nb) in nb_ids.iter().enumerate() {
            let (mean, grad) = stencil_rows(target, &mesh.geometry[nb]);
            cmat[j * 9..j * 9 + 9].copy_from_slice(&mean);
            for d in 0..3 {
                dmat[(d * n + j) * 9..(d * n + j) * 9 + 9].copy_from_slice(&grad[d]);
            }
        }
        // KKT system [D^T D, C^T; C, 0]
        let dim = 9 + n;
        let mut kkt = vec![0.0; dim * dim];
        for a in 0..9 {
            for b in 0..9 {
                let mut s = 0.0;
                for row in 0..3 * n {
                    s += dmat[row * 9 + a] * dmat[row * 9 + b];
                }
                kkt[a * dim + b] = s;
            }
        }
        for j in 0..n {
            for a in 0..9 {
                kkt[a * dim + 9 + j] = cmat[j * 9 + a];
                kkt[(9 + j) * dim + a] = cmat[j * 9 + a];
            }
        }
        let lu = match LuFactors::new(kkt, dim, 1e-11) {
            Some(lu) => lu,
            None => {
                return ReconOperator {
                    n_nb: n,
                    op: Vec::new(),
                    degenerate: true,
                }
            }
        };
        // columns of the operator: response to each unit datum
        let dr = target.dr;
        let mut op = vec![0.0; 9 * 4 * n];
        let mut rhs = vec![0.0; dim];
        let mut x = vec![0.0; dim];
        for j in 0..4 * n {
            for v in rhs.iter_mut() {
                *v = 0.0;
            }
            if j < n {
                rhs[9 + j] = 1.0; // mean-difference datum
            } else {
                // slope datum (Q_xd)_m enters the LS rhs scaled by dr
                let row = j - n; // d*n + m
                for a in 0..9 {
                    rhs[a] = dmat[row * 9 + a] * dr;
                }
            }
            lu.solve(&rhs, &mut x);
            for k in 0..9 {
                let unscale = if k < 3 { dr } else { dr * dr };
                op[k * 4 * n + j] = x[k] / unscale;
            }
        }
        ReconOperator {
            n_nb: n,
            op,
            degenerate: false,
        }
    }

    /// Apply the operator to the stencil data of all five components.
    /// `nb` must be ordered like the mesh stencil of the cell.
    pub fn solve(&self, own: &CellSolution, nb: &[&CellSolution]) -> Result<CellPoly> {
        if self.degenerate {
            return Err(Error::DegenerateStencil { cell: usize::MAX });
        }
        let n = self.n_nb;
        debug_assert_eq!(nb.len(), n);
        let mut coeffs = [[0.0; 5]; 9];
        for k in 0..9 {
            let row = &self.op[k * 4 * n..(k + 1) * 4 * n];
            let mut acc = [0.0; 5];
            for (j, s) in nb.iter().enumerate() {
                let w_diff = row[j];
                let wx = row[n + j];
                let wy = row[2 * n + j];
                let wz = row[3 * n + j];
                for i in 0..5 {
                    acc[i] += w_diff * (s.avg[i] - own.avg[i])
                        + wx * s.grad[0][i]
                        + wy * s.grad[1][i]
                        + wz * s.grad[2][i];
                }
            }
            coeffs[k] = acc;
        }
        Ok(CellPoly {
            mean: own.avg,
            coeffs,
        })
    }
}

/// Smoothness indicator of a polynomial over its cell: volume-scaled
/// integrals of the squared first (and for quadratics second) derivatives,
/// evaluated analytically from the cell moments.
pub fn beta_indicator(coeffs: &[f64; 9], component: usize, geo: &CellGeometry, quadratic: bool) -> f64 {
    let _ = component;
    let v = geo.volume;
    let v23 = v.powf(2.0 / 3.0);
    let m = &geo.moments;
    let mm = [[m[3], m[6], m[7]], [m[6], m[4], m[8]], [m[7], m[8], m[5]]];
    let c = coeffs;
    let mut beta = 0.0;
    // |alpha| = 1: mean of (dP/dx_d)^2 = c_d^2 + v^T M v
    let vecs = [
        [2.0 * c[3], c[6], c[7]],
        [c[6], 2.0 * c[4], c[8]],
        [c[7], c[8], 2.0 * c[5]],
    ];
    for d in 0..3 {
        let mut quad_term = 0.0;
        if quadratic {
            for a in 0..3 {
                for b in 0..3 {
                    quad_term += vecs[d][a] * mm[a][b] * vecs[d][b];
                }
            }
        }
        beta += v23 * (c[d] * c[d] + quad_term);
    }
    if quadratic {
        // |alpha| = 2 multi-indices
        let v43 = v23 * v23;
        beta += v43
            * (4.0 * (c[3] * c[3] + c[4] * c[4] + c[5] * c[5])
                + c[6] * c[6]
                + c[7] * c[7]
                + c[8] * c[8]);
    }
    beta
}

fn beta_of_slopes(grad: &Gradient, component: usize, v23: f64) -> f64 {
    let g = [grad[0][component], grad[1][component], grad[2][component]];
    v23 * (g[0] * g[0] + g[1] * g[1] + g[2] * g[2])
}

/// beta_0 from the neighbor cell-averaged slopes: Z-type weighted average of
/// the single-cell indicators, capped by the target's own.
pub fn beta0_from_neighbors(
    own: &CellSolution,
    neighbors: &[&CellSolution],
    component: usize,
    target_volume: f64,
    epsilon: f64,
) -> f64 {
    let v23 = target_volume.powf(2.0 / 3.0);
    let beta_own = beta_of_slopes(&own.grad, component, v23);
    let n = neighbors.len();
    let betas: Vec<f64> = neighbors
        .iter()
        .map(|s| beta_of_slopes(&s.grad, component, v23))
        .collect();
    let mut diff_sum = 0.0;
    for j in 0..n {
        for k in 0..j {
            diff_sum += (betas[j] - betas[k]).abs();
        }
    }
    let pairs = 0.5 * (n as f64) * (n as f64 - 1.0);
    let sigma1 = (diff_sum / pairs).powf(4.0 / 3.0);
    let mut wsum = 0.0;
    let mut acc = 0.0;
    for &b in &betas {
        let w = 1.0 + sigma1 / (epsilon + b);
        wsum += w;
        acc += w * b;
    }
    (acc / wsum).min(beta_own)
}

/// Weights and indicators of one component's WENO combination.
#[derive(Debug, Clone, Copy)]
pub struct SmoothnessSet {
    pub beta2: f64,
    pub beta1: f64,
    pub beta0: f64,
    pub sigma: f64,
    /// normalized level-2 weights [w_{0,2}, w_{1,2}, w_{2,2}]
    pub w2: [f64; 3],
    /// normalized level-1 weights [w_{0,1}, w_{1,1}]
    pub w1: [f64; 2],
}

pub fn smoothness_weights(
    beta2: f64,
    beta1: f64,
    beta0: f64,
    params: &WenoParams,
) -> SmoothnessSet {
    let sigma = (0.5 * ((beta2 - beta1).abs() + (beta2 - beta0).abs())).powf(4.0 / 3.0);
    let betas = [beta0, beta1, beta2];
    let mut w2 = [0.0; 3];
    for m in 0..3 {
        w2[m] = params.gamma2[m] * (1.0 + sigma / (params.epsilon + betas[m]));
    }
    let s2: f64 = w2.iter().sum();
    for w in w2.iter_mut() {
        *w /= s2;
    }
    let mut w1 = [0.0; 2];
    for m in 0..2 {
        w1[m] = params.gamma1[m] * (1.0 + sigma / (params.epsilon + betas[m]));
    }
    let s1: f64 = w1.iter().sum();
    for w in w1.iter_mut() {
        *w /= s1;
    }
    SmoothnessSet {
        beta2,
        beta1,
        beta0,
        sigma,
        w2,
        w1,
    }
}

/// Multi-resolution WENO blend of P2 with the cell's own linear and constant
/// polynomials, per component. Returns the blended polynomial.
pub fn multires_weno(
    p2: &CellPoly,
    own: &CellSolution,
    beta0: &[f64; 5],
    geo: &CellGeometry,
    params: &WenoParams,
) -> (CellPoly, [SmoothnessSet; 5]) {
    let g22 = params.gamma2[2];
    let g12 = params.gamma2[1];
    let _g02 = params.gamma2[0];
    let g11 = params.gamma1[1];
    let v23 = geo.volume.powf(2.0 / 3.0);
    let mut out = CellPoly {
        mean: p2.mean,
        coeffs: [[0.0; 5]; 9],
    };
    let mut sets = [SmoothnessSet {
        beta2: 0.0,
        beta1: 0.0,
        beta0: 0.0,
        sigma: 0.0,
        w2: [0.0; 3],
        w1: [0.0; 2],
    }; 5];
    for i in 0..5 {
        let mut c2 = [0.0; 9];
        for k in 0..9 {
            c2[k] = p2.coeffs[k][i];
        }
        let beta2 = beta_indicator(&c2, i, geo, true);
        let beta1 = beta_of_slopes(&own.grad, i, v23);
        let set = smoothness_weights(beta2, beta1, beta0[i], params);
        sets[i] = set;
        // decomposition polynomials share the mean; build the blended
        // linear and quadratic parts coefficient-wise:
        //   p1 = (P1 - g01 P0)/g11, p2h = (P2 - g12 p1 - g02 P0)/g22
        //   R = w22 p2h + w12 p1 + w02 P0
        let own_g = [own.grad[0][i], own.grad[1][i], own.grad[2][i]];
        for d in 0..3 {
            let p1_lin = own_g[d] / g11;
            let p2h_lin = (c2[d] - g12 * p1_lin) / g22;
            out.coeffs[d][i] = set.w2[2] * p2h_lin + set.w2[1] * p1_lin;
        }
        for k in 3..9 {
            out.coeffs[k][i] = set.w2[2] * c2[k] / g22;
        }
    }
    (out, sets)
}

/// Per-Gaussian-point gradient compression factor.
#[allow(clippy::too_many_arguments)]
pub fn compression_factor_point(
    rho_l: f64,
    rho_r: f64,
    drho_avg: f64,
    p_l: f64,
    p_r: f64,
    ma2_l: f64,
    ma2_r: f64,
    ma3_l: f64,
    ma3_r: f64,
    params: &CfParams,
) -> f64 {
    let eps = params.epsilon;
    let ratio = (rho_l - rho_r).abs() / (drho_avg.abs() + eps);
    let d_p = ((p_l - p_r) / (p_l + p_r)).abs();
    let d_ma2 = (ma2_l - ma2_r).abs() / (ma2_l.abs() + ma2_r.abs() + eps);
    let d_ma3 = (ma3_l - ma3_r).abs() / (ma3_l.abs() + ma3_r.abs() + eps);
    let f = (params.c1 * d_p + params.c2 * (d_ma2 + d_ma3)).powi(params.k_t);
    1.0 / (1.0 + ratio.powi(params.k_s) * f)
}

/// Product of the point factors over all Gaussian points of a cell.
pub fn compression_factor_cell(point_alphas: &[f64]) -> f64 {
    point_alphas.iter().product()
}

/// Reconstruction mode of the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReconMode {
    Linear,
    Weno,
}

/// Precomputed reconstruction operators for a mesh.
pub struct Reconstruction {
    pub mode: ReconMode,
    pub weno: WenoParams,
    ops: Vec<ReconOperator>,
    pub n_degenerate: usize,
}

impl Reconstruction {
    pub fn new(mesh: &Mesh, mode: ReconMode) -> Reconstruction {
        let ops: Vec<ReconOperator> = (0..mesh.n_cells)
            .into_par_iter()
            .map(|c| ReconOperator::build(mesh, c))
            .collect();
        let n_degenerate = ops.iter().filter(|o| o.degenerate).count();
        Reconstruction {
            mode,
            weno: WenoParams::default(),
            ops,
            n_degenerate,
        }
    }

    /// Reconstruct every interior cell from the solution snapshot
    /// (interior cells followed by ghosts, indexed like the mesh geometry).
    pub fn reconstruct(&self, mesh: &Mesh, sol: &[CellSolution]) -> Vec<CellPoly> {
        (0..mesh.n_cells)
            .into_par_iter()
            .map(|c| self.reconstruct_cell(mesh, sol, c))
            .collect()
    }

    pub fn reconstruct_cell(&self, mesh: &Mesh, sol: &[CellSolution], c: usize) -> CellPoly {
        let own = &sol[c];
        let nb: Vec<&CellSolution> = mesh.stencil[c].iter().map(|&i| &sol[i]).collect();
        let p2 = match self.ops[c].solve(own, &nb) {
            Ok(p) => p,
            Err(_) => CellPoly::from_linear(own),
        };
        match self.mode {
            ReconMode::Linear => p2,
            ReconMode::Weno => {
                let geo = &mesh.geometry[c];
                let mut beta0 = [0.0; 5];
                for i in 0..5 {
                    beta0[i] =
                        beta0_from_neighbors(own, &nb, i, geo.volume, self.weno.epsilon);
                }
                multires_weno(&p2, own, &beta0, geo, &self.weno).0
            }
        }
    }
}

/// Trace evaluation with the first-order positivity fallback: a side whose
/// reconstructed density or pressure is non-positive degrades to its cell
/// mean with zero slopes.
pub fn evaluate_side(
    poly: &CellPoly,
    geo: &CellGeometry,
    x: Vec3,
    gas: &GasModel,
) -> (Conserved, Gradient, bool) {
    let (w, g) = poly.eval(geo, x);
    if w[0] > 0.0 && crate::state::pressure(&w, gas) > 0.0 {
        (w, g, false)
    } else {
        (poly.mean, [[0.0; 5]; 3], true)
    }
}
