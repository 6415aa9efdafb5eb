//! Central-density sweeps and the power-law behavior of the growth rate.
//!
//! For each `κ` a sweep records the lowest eigenvalue `μ*`, the coefficient
//! `C₁ = max m/y²` (equal to `max −(1/ρ̄)∂_yρ̄^γ` in equilibrium) and the
//! constant-trial forms `⟨L1,1⟩`, `⟨1, y⁴ρ̄ 1⟩`. The expected large-`κ`
//! behavior depends on `γ`:
//!
//! | case | `γ`            | `μ₀`          | `C₁`          |
//! |------|----------------|---------------|---------------|
//! | 1    | `(6/5, 4/3)`   | `∼ κ`         | `≲ κ^{γ/2}`   |
//! | 2    | `6/5`          | `∼ κ/log κ`   | `∼ κ^{3/5}`   |
//! | 3    | `[1, 6/5)`     | `≫ κ^{γ/2}`   | `∼ κ^{γ/2}`   |

mod records;
mod regime;

pub use records::{
    default_cells, geometric_kappas, records_from_csv, records_to_csv, scaling_record, sweep,
    RecordStatus, ScalingRecord, SweepOptions, SWEEP_COLUMNS,
};
pub use regime::{
    case1_form_asymptotics, case_of, six_fifths_maximizer, verify_regime, ClaimCheck,
    FormAsymptotics, RegimeOptions, RegimeVerdict,
};

use crate::error::{invalid, Result};
use crate::steady_state::StarProfile;

/// `max_y m(y)/y²` and the radius where it is attained. The node maximum is
/// refined by golden-section search on the interpolated profile.
pub fn compute_c1(profile: &StarProfile) -> (f64, f64) {
    let y = profile.nodes();
    let n = y.len() - 1;
    let (mut best, mut at) = (0.0, 0);
    for i in 1..=n {
        let g = profile.gravity(i);
        if g > best {
            best = g;
            at = i;
        }
    }
    if at == 0 || at == n {
        return (best, y[at]);
    }
    let g = |s: f64| {
        let (_, m) = profile.sample(s);
        m / (s * s)
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (y[at - 1], y[at + 1]);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..80 {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
        if b - a <= 1e-14 * b {
            break;
        }
    }
    let s = 0.5 * (a + b);
    let refined = g(s);
    if refined > best {
        (refined, s)
    } else {
        (best, y[at])
    }
}

/// `T^δ = log(θ₀/δ)/√μ₀`, the time for a perturbation of size `δ` growing at
/// rate `√μ₀` to reach `θ₀`.
pub fn escape_time(delta: f64, theta0: f64, mu0: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= theta0 && theta0.is_finite()) {
        return Err(invalid(format!(
            "escape time needs 0 < delta <= theta0, got delta={delta}, theta0={theta0}"
        )));
    }
    if !(mu0 > 0.0 && mu0.is_finite()) {
        return Err(invalid(format!("escape time needs mu0 > 0, got {mu0}")));
    }
    Ok((theta0 / delta).ln() / mu0.sqrt())
}

#[cfg(test)]
mod tests;
