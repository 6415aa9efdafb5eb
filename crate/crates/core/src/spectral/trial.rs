use crate::error::{invalid, Result};
use crate::steady_state::StarProfile;

use super::{assemble, AssembledPencil};

/// Rayleigh quotient of the power-law trial function
/// `χ = b^{−a}` on `[0, b]`, `χ = y^{−a}` beyond, with breakpoint `b = ν κ^{−(1−γ/2)}`
/// at the self-similar core radius.
pub fn power_law_trial_quotient(profile: &StarProfile, nu: f64, a: f64) -> Result<f64> {
    power_law_trial_quotient_in(&assemble(profile)?, profile, nu, a)
}

/// [`power_law_trial_quotient`] against an already assembled pencil of `profile`.
pub fn power_law_trial_quotient_in(
    pencil: &AssembledPencil,
    profile: &StarProfile,
    nu: f64,
    a: f64,
) -> Result<f64> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(invalid(format!("nu must be positive, got {nu}")));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid(format!("exponent a must be positive, got {a}")));
    }
    let chi = power_law_trial(profile, nu, a)?;
    if pencil.len() != chi.len() {
        return Err(crate::Error::LengthMismatch {
            expected: chi.len(),
            actual: pencil.len(),
        });
    }
    pencil.rayleigh_quotient(&chi)
}

/// Samples of the power-law trial function on the profile grid.
pub fn power_law_trial(profile: &StarProfile, nu: f64, a: f64) -> Result<Vec<f64>> {
    let gamma = profile.gamma();
    let breakpoint = nu * profile.kappa().powf(-(1.0 - gamma / 2.0));
    let y = profile.nodes();
    if breakpoint <= y[1] {
        return Err(invalid(format!(
            "trial breakpoint {breakpoint} lies below the first grid node {}",
            y[1]
        )));
    }
    let plateau = breakpoint.powf(-a);
    Ok(y.iter()
        .map(|&s| if s <= breakpoint { plateau } else { s.powf(-a) })
        .collect())
}

/// Open interval of trial exponents `a` with
/// `2 − 1/(2−γ) < a < √((1−ε₂)²/(1+ε₁)^γ · (6 − 4/(2−γ)))`, or `None` if empty.
pub fn exponent_window(gamma: f64, eps1: f64, eps2: f64) -> Result<Option<(f64, f64)>> {
    if !(1.0..1.2).contains(&gamma) {
        return Err(invalid(format!(
            "exponent window needs gamma in [1, 6/5), got {gamma}"
        )));
    }
    if !(eps1 >= 0.0 && eps2 >= 0.0) {
        return Err(invalid("epsilons must be nonnegative"));
    }
    let lo = 2.0 - 1.0 / (2.0 - gamma);
    let hi = ((1.0 - eps2).powi(2) / (1.0 + eps1).powf(gamma) * (6.0 - 4.0 / (2.0 - gamma))).sqrt();
    Ok((lo < hi).then_some((lo, hi)))
}
