//! Vacuum-tolerant finite-volume simulator for the one-dimensional isentropic
//! compressible Navier-Stokes equations with density-dependent viscosity
//! `mu(rho) = 1 + rho^beta`, together with runtime monitors for the a priori
//! estimate functionals of the system.
//!
//! Layout:
//! - [`model`]: parameters, grid, state, closures and the weight-exponent algebra.
//! - [`solver`]: initial data, time step control and the staggered scheme.
//! - [`trajectories`]: particle tracking and the density upper-bound monitor.
//! - [`diagnostics`]: estimate functionals evaluated on snapshots.
//! - [`inequalities`]: numerical checks of weighted interpolation inequalities.
//! - [`io`] and [`cli`]: configuration, CSV output and the command line surface.

pub mod cli;
pub mod diagnostics;
mod error;
pub mod inequalities;
pub mod io;
pub mod model;
pub mod solver;
pub mod trajectories;

pub use error::{Error, Result};
pub use model::{AlphaReport, Grid, Params, State, ViscousScheme};
