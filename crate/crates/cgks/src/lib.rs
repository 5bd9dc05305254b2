//! Compact third-order gas-kinetic scheme (CGKS) for compressible flow on
//! 3-D hybrid unstructured meshes.
//!
//! The solver updates two sets of degrees of freedom per cell: the conserved
//! averages and their cell-averaged gradients. Interface fluxes and interface
//! point values come from a time-accurate BGK distribution function, the
//! spatial reconstruction is a constrained least-squares quadratic on the
//! von Neumann stencil with a multi-resolution WENO limiter, and the updated
//! gradients are damped near discontinuities by a per-cell compression factor.

pub mod boundary;
pub mod error;
pub mod evolution;
pub mod flux;
pub mod harness;
pub mod kinetic;
pub mod math;
pub mod mesh;
pub mod recon;
pub mod state;

pub use error::{Error, Result};
pub use state::{Conserved, GasModel, Gradient};
