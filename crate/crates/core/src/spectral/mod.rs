//! Radial Sturm-Liouville problem of the linearized flow.
//!
//! Perturbations `ζ = e^{λt} χ(y)` of a liquid star satisfy `L χ = −λ² y⁴ρ̄ χ`
//! with the Robin condition `3χ(R) + R χ'(R) = 0`. The quadratic form
//!
//! ```text
//! ⟨Lχ, χ⟩ = ∫₀^R γρ̄^γ y⁴ χ'² + (4−3γ) y³ ∂_y(ρ̄^γ) χ² dy + 3γR³ χ(R)²
//! ```
//!
//! is discretized with P1 finite elements, which gives a symmetric tridiagonal
//! pencil `(A, M)`. Its lowest eigenvalue `μ*` decides stability; when negative,
//! `√(−μ*)` is the fastest linear growth rate.

mod eigen;
mod pencil;
mod trial;

pub use eigen::{
    growth_rate_of, growth_rate_of_with, lowest_eigenpair, lowest_eigenvalues, sign_changes,
    EigenOptions, ModeResult,
};
pub use pencil::{assemble, rayleigh_quotient, AssembledPencil, PencilParts};
pub use trial::{
    exponent_window, power_law_trial, power_law_trial_quotient, power_law_trial_quotient_in,
};
