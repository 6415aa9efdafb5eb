use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::{fit_loglog, LineFit};

use super::ScalingRecord;

/// Tolerances of the regime checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeOptions {
    /// Half-width of the accepted interval around each predicted slope.
    pub slope_tol: f64,
    /// Required excess of the `μ₀` slope over `γ/2` when `γ < 6/5`.
    pub case3_margin: f64,
    /// Allowed relative spread of `μ₀ log κ / κ` over the top decade at `γ = 6/5`.
    pub case2_spread: f64,
    /// Relative tolerance on the `γ = 6/5` maximizer radius of `m/y²`.
    pub maximizer_tol: f64,
}

impl Default for RegimeOptions {
    fn default() -> Self {
        Self {
            slope_tol: 0.1,
            case3_margin: 0.1,
            case2_spread: 0.25,
            maximizer_tol: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimCheck {
    pub name: String,
    pub value: f64,
    pub expected: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeVerdict {
    pub gamma: f64,
    pub case_id: u8,
    pub slopes: BTreeMap<String, f64>,
    pub residuals: BTreeMap<String, f64>,
    pub checks: Vec<ClaimCheck>,
    pub pass: bool,
}

impl RegimeVerdict {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdict serializes")
    }
}

/// Case number for `γ`: 1 for `(6/5, 4/3)`, 2 for `6/5`, 3 for `[1, 6/5)`.
pub fn case_of(gamma: f64) -> Result<u8> {
    const SIX_FIFTHS: f64 = 1.2;
    if (gamma - SIX_FIFTHS).abs() <= 1e-12 {
        Ok(2)
    } else if (1.0..SIX_FIFTHS).contains(&gamma) {
        Ok(3)
    } else if gamma > SIX_FIFTHS && gamma < 4.0 / 3.0 {
        Ok(1)
    } else {
        Err(invalid(format!(
            "adiabatic index {gamma} is outside [1, 4/3)"
        )))
    }
}

fn within(name: &str, value: f64, target: f64, tol: f64) -> ClaimCheck {
    ClaimCheck {
        name: name.into(),
        value,
        expected: format!("{target} ± {tol}"),
        pass: (value - target).abs() <= tol,
    }
}

fn fit(points: Vec<(f64, f64)>) -> Result<LineFit> {
    fit_loglog(&points)
}

/// Fit the growth-rate and `C₁` exponents of a sweep and compare them with the
/// predicted behavior of the case that `gamma` falls in.
pub fn verify_regime(
    gamma: f64,
    records: &[ScalingRecord],
    opts: &RegimeOptions,
) -> Result<RegimeVerdict> {
    let case_id = case_of(gamma)?;
    let unstable: Vec<&ScalingRecord> = records.iter().filter(|r| r.is_unstable()).collect();
    let span = match (unstable.first(), unstable.last()) {
        (Some(a), Some(b)) => (b.kappa / a.kappa).log10(),
        _ => 0.0,
    };
    if unstable.len() < 4 || span < 2.0 - 1e-9 {
        return Err(Error::InsufficientData(format!(
            "insufficient unstable records: {} spanning {span:.2} decades (need 4 over 2)",
            unstable.len()
        )));
    }
    let mut slopes = BTreeMap::new();
    let mut residuals = BTreeMap::new();
    let mut checks = Vec::new();

    let mu_fit = fit(unstable.iter().map(|r| (r.kappa, r.mu0.unwrap())).collect())?;
    slopes.insert("mu0".to_string(), mu_fit.slope);
    residuals.insert("mu0".to_string(), mu_fit.residual);
    let ok: Vec<&ScalingRecord> = records
        .iter()
        .filter(|r| r.c1.is_finite() && r.c1 > 0.0)
        .collect();
    let c1_fit = fit(ok.iter().map(|r| (r.kappa, r.c1)).collect())?;
    slopes.insert("C1".to_string(), c1_fit.slope);
    residuals.insert("C1".to_string(), c1_fit.residual);

    let half = gamma / 2.0;
    match case_id {
        1 => {
            checks.push(within("mu0_slope", mu_fit.slope, 1.0, opts.slope_tol));
            checks.push(within("C1_slope", c1_fit.slope, half, opts.slope_tol));
        }
        2 => {
            let log_fit = fit(unstable
                .iter()
                .map(|r| (r.kappa, r.mu0.unwrap() * r.kappa.ln()))
                .collect())?;
            slopes.insert("mu0_log_kappa".to_string(), log_fit.slope);
            residuals.insert("mu0_log_kappa".to_string(), log_fit.residual);
            let top = unstable.last().unwrap().kappa / 10.0 * (1.0 - 1e-9);
            let normalized: Vec<f64> = unstable
                .iter()
                .filter(|r| r.kappa >= top)
                .map(|r| r.mu0.unwrap() * r.kappa.ln() / r.kappa)
                .collect();
            let lo = normalized.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = normalized.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let spread = hi / lo - 1.0;
            checks.push(ClaimCheck {
                name: "mu0_log_kappa_over_kappa_spread".into(),
                value: spread,
                expected: format!("< {}", opts.case2_spread),
                pass: normalized.len() >= 2 && spread < opts.case2_spread,
            });
            checks.push(within("C1_slope", c1_fit.slope, 0.6, opts.slope_tol));
            let radii: Vec<&ScalingRecord> = ok
                .iter()
                .copied()
                .filter(|r| r.c1_radius.is_finite())
                .collect();
            if !radii.is_empty() {
                let worst = radii
                    .iter()
                    .map(|r| (r.c1_radius / six_fifths_maximizer(r.kappa) - 1.0).abs())
                    .fold(0.0, f64::max);
                checks.push(ClaimCheck {
                    name: "C1_maximizer_radius".into(),
                    value: worst,
                    expected: format!("relative deviation <= {}", opts.maximizer_tol),
                    pass: worst <= opts.maximizer_tol,
                });
            }
        }
        _ => {
            checks.push(ClaimCheck {
                name: "mu0_slope".into(),
                value: mu_fit.slope,
                expected: format!(">= {}", half + opts.case3_margin),
                pass: mu_fit.slope >= half + opts.case3_margin,
            });
            checks.push(within("C1_slope", c1_fit.slope, half, opts.slope_tol));
        }
    }
    let margins: Vec<f64> = ok
        .iter()
        .map(|r| r.taylor_margin)
        .filter(|m| !m.is_nan())
        .collect();
    if !margins.is_empty() {
        let worst = margins.iter().copied().fold(f64::INFINITY, f64::min);
        checks.push(ClaimCheck {
            name: "taylor_sign_margin".into(),
            value: worst,
            expected: "> 0".into(),
            pass: worst > 0.0,
        });
    }
    let bound = ok
        .iter()
        .map(|r| r.mu_star - r.q_const)
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(ClaimCheck {
        name: "variational_bound".into(),
        value: bound,
        expected: "mu_star - q_const <= 0".into(),
        pass: bound <= 1e-9 * ok.iter().map(|r| r.mu_star.abs()).fold(1.0, f64::max),
    });
    let pass = checks.iter().all(|c| c.pass);
    Ok(RegimeVerdict {
        gamma,
        case_id,
        slopes,
        residuals,
        checks,
        pass,
    })
}

/// Radius `(3/(2√π)) κ^{−2/5}` maximizing `m/y²` for `γ = 6/5`.
pub fn six_fifths_maximizer(kappa: f64) -> f64 {
    3.0 / (2.0 * std::f64::consts::PI.sqrt()) * kappa.powf(-0.4)
}

/// Fitted large-`κ` exponents of the constant-trial forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormAsymptotics {
    /// Slope of `log |⟨L1,1⟩|` against `log κ` over the top decade of the sweep.
    pub form_slope: f64,
    pub form_residual: f64,
    /// Slope of `log |⟨L1,1⟩ / ⟨1,y⁴ρ̄ 1⟩|`.
    pub ratio_slope: f64,
    pub ratio_residual: f64,
    /// Slope of `log |⟨L1,1⟩|` over every record. Near `κ = 10²` the Robin
    /// term still competes and the form changes sign, so this is diagnostic only.
    pub form_slope_full: f64,
    /// Raw slope of `log ⟨1,y⁴ρ̄ 1⟩`.
    pub weight_slope: f64,
    /// `⟨L1,1⟩ < 0` on the upper half of the sweep.
    pub negative_at_large_kappa: bool,
}

/// Exponents of `⟨L1,1⟩` and of the constant-trial quotient for `6/5 < γ < 4/3`.
pub fn case1_form_asymptotics(gamma: f64, records: &[ScalingRecord]) -> Result<FormAsymptotics> {
    if case_of(gamma)? != 1 {
        return Err(invalid(format!(
            "form asymptotics need 6/5 < gamma < 4/3, got {gamma}"
        )));
    }
    let ok: Vec<&ScalingRecord> = records
        .iter()
        .filter(|r| r.form_l11.is_finite() && r.form_l11 != 0.0 && r.weight_11 > 0.0)
        .collect();
    if ok.len() < 2 {
        return Err(Error::InsufficientData(
            "need at least two records with finite forms".into(),
        ));
    }
    let top = ok.iter().map(|r| r.kappa).fold(f64::NEG_INFINITY, f64::max) / 10.0;
    let tail: Vec<&ScalingRecord> = ok
        .iter()
        .copied()
        .filter(|r| r.kappa >= top * (1.0 - 1e-12))
        .collect();
    if tail.len() < 2 {
        return Err(Error::InsufficientData(
            "need at least two records in the top decade".into(),
        ));
    }
    let form = fit(tail.iter().map(|r| (r.kappa, r.form_l11.abs())).collect())?;
    let ratio = fit(tail
        .iter()
        .map(|r| (r.kappa, (r.form_l11 / r.weight_11).abs()))
        .collect())?;
    let full = fit(ok.iter().map(|r| (r.kappa, r.form_l11.abs())).collect())?;
    let weight = fit(ok.iter().map(|r| (r.kappa, r.weight_11)).collect())?;
    let upper = &ok[ok.len() / 2..];
    Ok(FormAsymptotics {
        form_slope: form.slope,
        form_residual: form.residual,
        ratio_slope: ratio.slope,
        ratio_residual: ratio.residual,
        form_slope_full: full.slope,
        weight_slope: weight.slope,
        negative_at_large_kappa: upper.iter().all(|r| r.form_l11 < 0.0),
    })
}
