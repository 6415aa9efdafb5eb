use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numerics::{fit_line, LineFit};
use crate::spectral::ModeResult;
use crate::steady_state::StarProfile;

use super::evolve::{evolve, DiagnosticSample, EvolveOptions, RunStatus};
use super::linear::TangentLinear;
use super::state::{discrete_equilibrium, seed_mode_on, LagrangianState};

/// Least-squares slope of `log norm` against `t` over samples with norm in `[lo, hi]`.
pub fn fit_growth_rate(samples: &[DiagnosticSample], lo: f64, hi: f64) -> Result<LineFit> {
    let (ts, ls): (Vec<f64>, Vec<f64>) = samples
        .iter()
        .filter(|s| s.norm >= lo && s.norm <= hi && s.norm > 0.0)
        .map(|s| (s.t, s.norm.ln()))
        .unzip();
    if ts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "only {} samples with norm in [{lo}, {hi}]",
            ts.len()
        )));
    }
    fit_line(&ts, &ls)
}

/// Initial perturbation norm per unit mode amplitude of a seed on `base`.
pub fn norm_per_amplitude(
    base: &LagrangianState,
    profile: &StarProfile,
    mode: &ModeResult,
) -> Result<f64> {
    const PROBE: f64 = 1e-8;
    let seeded = seed_mode_on(base, mode, PROBE)?;
    Ok(super::evolve::perturbation_norm(&seeded, profile)? / PROBE)
}

/// One seeded run of an escape sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EscapeRun {
    pub delta: f64,
    /// First time the perturbation norm reaches each threshold, in the order given.
    pub times: Vec<Option<f64>>,
    pub status: String,
}

/// Escape times against `log(1/δ)` for each threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EscapeFit {
    pub theta0: f64,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    /// `1/√μ₀` of the seeded mode.
    pub predicted_slope: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EscapeResult {
    pub growth_rate: f64,
    pub runs: Vec<EscapeRun>,
    /// One fit per threshold; the first is the primary `θ₀`.
    pub fits: Vec<EscapeFit>,
}

/// Fit escape times `T` against `log(1/δ)` from `(δ, T)` pairs and compare the
/// slope with `1/rate`.
pub fn fit_escape_times(points: &[(f64, f64)], theta0: f64, rate: f64) -> Result<EscapeFit> {
    let (xs, ts): (Vec<f64>, Vec<f64>) = points.iter().map(|&(d, t)| ((1.0 / d).ln(), t)).unzip();
    let fit = fit_line(&xs, &ts)?;
    Ok(EscapeFit {
        theta0,
        slope: fit.slope,
        intercept: fit.intercept,
        residual: fit.residual,
        predicted_slope: 1.0 / rate,
        relative_error: (fit.slope * rate - 1.0).abs(),
    })
}

/// Seed `mode` with initial perturbation norm `δ` on the discrete equilibrium
/// and evolve until the norm passes every threshold. Runs execute in parallel on the
/// current rayon pool. Runs that invert or time out are excluded from the fits.
pub fn escape_experiment(
    profile: &StarProfile,
    mode: &ModeResult,
    deltas: &[f64],
    thresholds: &[f64],
    opts: &EvolveOptions,
) -> Result<EscapeResult> {
    let rate = mode
        .growth_rate
        .ok_or_else(|| invalid("escape experiment needs an unstable mode"))?;
    if deltas.len() < 2 {
        return Err(invalid("escape fit needs at least two amplitudes"));
    }
    if thresholds.is_empty() {
        return Err(invalid("escape experiment needs a threshold"));
    }
    let smallest = thresholds.iter().copied().fold(f64::INFINITY, f64::min);
    if let Some(d) = deltas.iter().find(|&&d| !(d > 0.0 && d < smallest)) {
        return Err(invalid(format!(
            "amplitude {d} must lie in (0, {smallest})"
        )));
    }
    let base = discrete_equilibrium(profile)?;
    let per_amplitude = norm_per_amplitude(&base, profile, mode)?;
    let largest = thresholds.iter().copied().fold(0.0, f64::max);
    let runs: Vec<EscapeRun> = deltas
        .par_iter()
        .map(|&delta| -> Result<EscapeRun> {
            let seeded = seed_mode_on(&base, mode, delta / per_amplitude)?;
            let t_max = 3.0 * (largest / delta).ln().max(1.0) / rate;
            let run_opts = EvolveOptions {
                thresholds: thresholds.to_vec(),
                ..opts.clone()
            };
            let run = evolve(&seeded, profile, t_max, t_max, &run_opts)?;
            Ok(EscapeRun {
                delta,
                times: run.crossings,
                status: run.diagnostics.status.label(),
            })
        })
        .collect::<Result<_>>()?;
    let fits = thresholds
        .iter()
        .enumerate()
        .map(|(k, &theta0)| {
            let points: Vec<(f64, f64)> = runs
                .iter()
                .filter_map(|r| r.times[k].map(|t| (r.delta, t)))
                .collect();
            fit_escape_times(&points, theta0, rate)
        })
        .collect::<Result<_>>()?;
    Ok(EscapeResult {
        growth_rate: rate,
        runs,
        fits,
    })
}

/// Distance between nonlinear runs and the tangent-linear prediction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrectionResult {
    pub delta: f64,
    pub window_end: f64,
    /// Max over the window of `‖state_δ − (base + δ ξ)‖` for `δ` and `δ/2`.
    pub max_defect: f64,
    pub max_defect_half: f64,
    /// `max_defect / max_defect_half`; 4 for a quadratic remainder.
    pub ratio: f64,
}

/// Advance `state` by `dt` with the same leapfrog as [`evolve`], without viscosity.
fn lockstep(mesh: &super::state::Mesh, state: &mut LagrangianState, dt: f64) -> Result<()> {
    let a = mesh.accelerations(&state.eta, &state.vel, state.time, 0.0)?;
    for i in 1..state.len() {
        state.vel[i] += 0.5 * dt * a[i];
        state.eta[i] += dt * state.vel[i];
    }
    state.time += dt;
    let a = mesh.accelerations(&state.eta, &state.vel, state.time, 0.0)?;
    for i in 1..state.len() {
        state.vel[i] += 0.5 * dt * a[i];
    }
    Ok(())
}

/// Seed `mode` with initial norms `δ` and `δ/2` on the discrete equilibrium and
/// compare each nonlinear trajectory with the matching multiple of the
/// tangent-linear one up to `t_end`.
pub fn nonlinear_correction(
    profile: &StarProfile,
    mode: &ModeResult,
    delta: f64,
    t_end: f64,
    cfl: f64,
) -> Result<CorrectionResult> {
    let rate = mode
        .growth_rate
        .ok_or_else(|| invalid("correction test needs an unstable mode"))?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(invalid(format!("window end must be positive, got {t_end}")));
    }
    if !(delta > 0.0) {
        return Err(invalid(format!("seed norm must be positive, got {delta}")));
    }
    let base = discrete_equilibrium(profile)?;
    let amplitude = delta / norm_per_amplitude(&base, profile, mode)?;
    let tl = TangentLinear::new(&base, profile)?;
    let mesh = super::state::Mesh::of(&base, profile)?;
    let dt = cfl * super::evolve::cfl_limit(&base, profile)?;
    let steps = (t_end / dt).ceil() as usize;
    let dt = t_end / steps as f64;
    let y = base.labels.nodes();
    let mut xi: Vec<f64> = y.iter().zip(&mode.chi).map(|(y, c)| y * c).collect();
    let mut w: Vec<f64> = xi.iter().map(|x| rate * x).collect();
    let mut full = seed_mode_on(&base, mode, amplitude)?;
    let mut half = seed_mode_on(&base, mode, 0.5 * amplitude)?;
    let (mut worst, mut worst_half) = (0.0f64, 0.0f64);
    for _ in 0..steps {
        lockstep(&mesh, &mut full, dt)?;
        lockstep(&mesh, &mut half, dt)?;
        tl.step(&mut xi, &mut w, dt);
        worst = worst.max(tl.defect(&full, &xi, &w, amplitude)?);
        worst_half = worst_half.max(tl.defect(&half, &xi, &w, 0.5 * amplitude)?);
    }
    Ok(CorrectionResult {
        delta,
        window_end: t_end,
        max_defect: worst,
        max_defect_half: worst_half,
        ratio: worst / worst_half,
    })
}

/// Growth rate of a nonlinear run seeded with initial perturbation norm `δ`,
/// fitted over norms in `[10δ, ceiling]`.
pub fn nonlinear_growth_rate(
    profile: &StarProfile,
    mode: &ModeResult,
    delta: f64,
    ceiling: f64,
    opts: &EvolveOptions,
) -> Result<(LineFit, RunStatus)> {
    let rate = mode
        .growth_rate
        .ok_or_else(|| invalid("growth fit needs an unstable mode"))?;
    if !(delta > 0.0 && 10.0 * delta < ceiling) {
        return Err(invalid(format!(
            "seed norm {delta} leaves no growth window below {ceiling}"
        )));
    }
    let base = discrete_equilibrium(profile)?;
    let per_amplitude = norm_per_amplitude(&base, profile, mode)?;
    let seeded = seed_mode_on(&base, mode, delta / per_amplitude)?;
    let t_end = 1.5 * (ceiling / delta).ln() / rate;
    let run_opts = EvolveOptions {
        thresholds: vec![ceiling],
        ..opts.clone()
    };
    let run = evolve(&seeded, profile, t_end, t_end / 400.0, &run_opts)?;
    let fit = fit_growth_rate(&run.diagnostics.samples, 10.0 * delta, ceiling)?;
    Ok((fit, run.diagnostics.status))
}
