use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Polytropic liquid: `P(ρ) = ρ^γ − 1`, so the vacuum boundary sits at `ρ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquationOfState {
    gamma: f64,
}

impl EquationOfState {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(1.0..=2.0).contains(&gamma) {
            return Err(invalid(format!(
                "adiabatic index must lie in [1, 2], got {gamma}"
            )));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    fn is_isothermal(&self) -> bool {
        self.gamma == 1.0
    }

    pub fn pressure(&self, rho: f64) -> f64 {
        if self.is_isothermal() {
            rho - 1.0
        } else {
            rho.powf(self.gamma) - 1.0
        }
    }

    pub fn sound_speed_sq(&self, rho: f64) -> f64 {
        if self.is_isothermal() {
            1.0
        } else {
            self.gamma * rho.powf(self.gamma - 1.0)
        }
    }

    /// Specific enthalpy `∫ c_s²/ρ dρ`: `γ ρ^{γ−1}/(γ−1)`, or `ln ρ` when `γ = 1`.
    ///
    /// Hydrostatic balance reads `dh/dy = −m/y²` in this variable, which stays
    /// smooth through the vanishing-density edge of a gaseous star.
    pub fn enthalpy(&self, rho: f64) -> f64 {
        if self.is_isothermal() {
            rho.ln()
        } else {
            self.gamma / (self.gamma - 1.0) * rho.powf(self.gamma - 1.0)
        }
    }

    /// Inverse of [`enthalpy`](Self::enthalpy); nonpositive enthalpy maps to
    /// vacuum for `γ > 1`.
    pub fn density_from_enthalpy(&self, h: f64) -> f64 {
        if self.is_isothermal() {
            h.exp()
        } else if h <= 0.0 {
            0.0
        } else {
            ((self.gamma - 1.0) / self.gamma * h).powf(1.0 / (self.gamma - 1.0))
        }
    }

    /// Specific internal energy `e` with `de/dρ = P/ρ²`.
    pub fn internal_energy(&self, rho: f64) -> f64 {
        if self.is_isothermal() {
            rho.ln() + 1.0 / rho
        } else {
            rho.powf(self.gamma - 1.0) / (self.gamma - 1.0) + 1.0 / rho
        }
    }
}
