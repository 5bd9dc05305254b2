//! Conserved flow state and the ideal-gas model.

use crate::error::{Error, Result};
use crate::math::Vec3;

/// Conserved variables (rho, rho*U1, rho*U2, rho*U3, rho*E).
pub type Conserved = [f64; 5];

/// Spatial gradient of the conserved variables, one 5-vector per direction.
pub type Gradient = [Conserved; 3];

pub const ZERO_GRADIENT: Gradient = [[0.0; 5]; 3];

/// Ideal gas with specific-heat ratio gamma and K internal degrees of freedom,
/// K = (5 - 3*gamma)/(gamma - 1) in 3-D.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasModel {
    pub gamma: f64,
    pub k: f64,
}

impl GasModel {
    pub fn new(gamma: f64) -> Self {
        assert!(gamma > 1.0 && gamma <= 5.0 / 3.0 + 1e-12, "gamma out of range");
        GasModel {
            gamma,
            k: (5.0 - 3.0 * gamma) / (gamma - 1.0),
        }
    }

    pub fn air() -> Self {
        GasModel::new(1.4)
    }
}

pub fn conserved(rho: f64, u: Vec3, p: f64, gas: &GasModel) -> Conserved {
    let q2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    [
        rho,
        rho * u[0],
        rho * u[1],
        rho * u[2],
        p / (gas.gamma - 1.0) + 0.5 * rho * q2,
    ]
}

pub fn density(w: &Conserved) -> f64 {
    w[0]
}

pub fn velocity(w: &Conserved) -> Vec3 {
    [w[1] / w[0], w[2] / w[0], w[3] / w[0]]
}

/// rho*E - 0.5*rho*|U|^2; must be positive for a physical state.
pub fn internal_energy(w: &Conserved) -> f64 {
    w[4] - 0.5 * (w[1] * w[1] + w[2] * w[2] + w[3] * w[3]) / w[0]
}

pub fn pressure(w: &Conserved, gas: &GasModel) -> f64 {
    (gas.gamma - 1.0) * internal_energy(w)
}

pub fn sound_speed(w: &Conserved, gas: &GasModel) -> f64 {
    (gas.gamma * pressure(w, gas) / w[0]).sqrt()
}

pub fn is_physical(w: &Conserved) -> bool {
    w[0] > 0.0 && internal_energy(w) > 0.0 && w.iter().all(|v| v.is_finite())
}

pub fn check_physical(w: &Conserved, what: &str) -> Result<()> {
    if !is_physical(w) {
        return Err(Error::InvalidState(format!(
            "{what}: rho={:.6e}, e_int={:.6e}",
            w[0],
            internal_energy(w)
        )));
    }
    Ok(())
}

/// The two per-cell DOF sets the scheme updates: the conserved averages and
/// their cell-averaged gradients (global frame).
#[derive(Debug, Clone, Copy, Default)]
pub struct CellSolution {
    pub avg: Conserved,
    pub grad: Gradient,
}

pub fn add_scaled(w: &Conserved, d: &Conserved, s: f64) -> Conserved {
    [
        w[0] + s * d[0],
        w[1] + s * d[1],
        w[2] + s * d[2],
        w[3] + s * d[3],
        w[4] + s * d[4],
    ]
}
