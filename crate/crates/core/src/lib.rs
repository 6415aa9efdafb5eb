//! Liquid Lane-Emden stars of the compressible Euler-Poisson system.
//!
//! The crate computes liquid equilibria (density 1 on the vacuum boundary),
//! their fastest linearly growing radial mode from a Sturm-Liouville problem
//! with a Robin boundary condition, the scaling of that growth rate with the
//! central density, and the nonlinear free-boundary evolution of seeded
//! perturbations in Lagrangian coordinates.
//!
//! Modules, bottom-up:
//!
//! - [`numerics`]: quadrature, RK4 with event bisection, tridiagonal inertia, fits.
//! - [`steady_state`]: equilibria, the `γ = 6/5` closed form, self-similar scaling.
//! - [`spectral`]: finite-element pencil, Rayleigh quotients, lowest eigenpair.
//! - [`scaling`]: central-density sweeps and power-law verdicts.
//! - [`dynamics`]: Lagrangian hydrodynamics, the linearized system, escape times.
//! - [`verification`]: the acceptance suite shared by tests and the CLI.

pub mod dynamics;
pub mod error;
pub mod io;
pub mod numerics;
pub mod scaling;
pub mod spectral;
pub mod steady_state;
pub mod verification;

pub use error::{Error, Result};
