//! Deterministic numerical kernels shared by the solvers: grids, quadrature,
//! Runge-Kutta stepping with bisection event location, symmetric tridiagonal
//! factorization with inertia counting, interpolation and line fits.
//!
//! Everything here is a pure function of its inputs.

mod fit;
mod grid;
mod interp;
mod ode;
mod quadrature;
mod tridiag;

pub use fit::{fit_line, fit_loglog, LineFit};
pub use grid::{RadialGrid, Spacing};
pub use interp::{hermite, MonotoneCubic};
pub use ode::{bisect_event, rk4_step};
pub use quadrature::{cumulative_trapezoid, gauss_composite, GAUSS3_POINTS, GAUSS3_WEIGHTS};
pub use tridiag::{
    ldl_inertia, pencil_count_below, solve_tridiagonal, LdlFactor, TridiagonalSymmetric,
};
