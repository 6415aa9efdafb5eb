//! Radial free-boundary evolution in Lagrangian coordinates.
//!
//! Particles are labelled by their equilibrium radius `y`. Positions `η` and
//! velocities `υ` sit on the label nodes; each cell carries a fixed mass, so
//! its density `f = ρ̄/J` follows from the exact volume ratio
//! `J = Δη³/Δy³`. Gravity uses the label-fixed enclosed mass, and the pressure
//! beyond the outer node is zero.
//!
//! The nodal force is the gradient of the discrete energy
//! `Σ dm e(f) − Σ M_i m_i/η_i`, so kick-drift-kick leapfrog conserves
//! [`total_energy`] up to an `O(dt²)` oscillation.
//!
//! Growth experiments start from [`discrete_equilibrium`], the exact rest
//! state of the scheme, rather than from `η = y`, whose `O(h²)` force residual
//! would otherwise seed the unstable mode on its own.

mod evolve;
mod experiments;
mod linear;
mod state;

pub use evolve::{
    cfl_limit, evolve, perturbation_norm, sound_crossing_time, state_table, step, total_energy,
    DiagnosticSample, Diagnostics, Evolution, EvolveOptions, RunStatus, DIAGNOSTIC_COLUMNS,
};
pub use experiments::{
    escape_experiment, fit_escape_times, fit_growth_rate, nonlinear_correction,
    nonlinear_growth_rate, norm_per_amplitude, CorrectionResult, EscapeFit, EscapeResult,
    EscapeRun,
};
pub use linear::{evolve_linearized, linear_step_limit, LinearState, TangentLinear};
pub use state::{
    acceleration, discrete_equilibrium, init_equilibrium, linearized_acceleration, seed_mode,
    seed_mode_on, LagrangianState,
};

#[cfg(test)]
mod tests;
