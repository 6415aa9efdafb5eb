//! Liquid Lane-Emden equilibria.
//!
//! With `P = ρ^γ − 1` the vacuum boundary of a liquid star sits where the
//! density drops to 1. Equilibria solve `m/y² + (1/ρ) ∂_y ρ^γ = 0` with
//! `m(y) = 4π ∫₀^y s² ρ ds`, integrated outward from the central density `κ`.

mod eos;
mod profile;
mod solver;

pub use eos::EquationOfState;
pub use profile::{StarProfile, BOUNDARY_TOL};
pub use solver::{
    explicit_profile_six_fifths, scaled_profile, six_fifths_density, six_fifths_radius,
    solve_gaseous_reference, solve_gaseous_reference_with, solve_liquid_star,
    solve_liquid_star_with, taylor_sign_margin, SolverOptions, GAMMA_MAX,
};

#[cfg(test)]
mod tests;
