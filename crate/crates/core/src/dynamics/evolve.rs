use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::io::{fmt_f64, Table};
use crate::steady_state::StarProfile;

use super::state::{cube_diff, LagrangianState, Mesh};

/// Settings of the nonlinear integrator.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    /// Courant number used to pick the fixed step at the start of a run.
    pub cfl: f64,
    /// Explicit step; overrides `cfl` when set.
    pub dt: Option<f64>,
    /// Von Neumann-Richtmyer coefficient; 0 disables artificial viscosity.
    pub viscosity: f64,
    /// Perturbation-norm levels whose first crossing times are recorded. The
    /// run stops once the largest one has been crossed.
    pub thresholds: Vec<f64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            cfl: 0.4,
            dt: None,
            viscosity: 0.0,
            thresholds: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticSample {
    pub t: f64,
    pub norm: f64,
    pub energy: f64,
    pub boundary_radius: f64,
    pub max_jacobian_dev: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    /// Stopped after the largest threshold was crossed.
    ReachedThreshold,
    /// A cell inverted; samples stop at the last valid state.
    Inverted {
        cell: usize,
        time: f64,
    },
}

impl RunStatus {
    pub fn label(&self) -> String {
        match self {
            RunStatus::Completed => "completed".into(),
            RunStatus::ReachedThreshold => "reached_threshold".into(),
            RunStatus::Inverted { cell, time } => format!("inverted cell {cell} at t={time}"),
        }
    }
}

/// Time series of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub samples: Vec<DiagnosticSample>,
    pub status: RunStatus,
    /// Step used by the integrator.
    pub dt: f64,
}

pub const DIAGNOSTIC_COLUMNS: [&str; 5] =
    ["t", "norm", "energy", "boundary_radius", "max_jacobian_dev"];

impl Diagnostics {
    pub fn to_table(&self, comments: &[(String, String)]) -> Table {
        let mut t = Table::new(&DIAGNOSTIC_COLUMNS);
        for (k, v) in comments {
            t = t.comment(k, v);
        }
        t = t
            .comment("status", self.status.label())
            .comment("dt", fmt_f64(self.dt));
        for s in &self.samples {
            t.push_row(vec![
                s.t,
                s.norm,
                s.energy,
                s.boundary_radius,
                s.max_jacobian_dev,
            ]);
        }
        t
    }

    /// Largest `|E(t) − E(0)| / |E(0)|` over the samples.
    pub fn relative_energy_drift(&self) -> f64 {
        let e0 = self.samples[0].energy;
        self.samples
            .iter()
            .map(|s| ((s.energy - e0) / e0).abs())
            .fold(0.0, f64::max)
    }
}

/// Result of [`evolve`]: the diagnostics and the last valid state.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub diagnostics: Diagnostics,
    pub state: LagrangianState,
    /// First crossing time of each requested threshold, interpolated in `log norm`.
    pub crossings: Vec<Option<f64>>,
}

/// Largest stable step `min_c Δη_c / c_s(f_c)`.
pub fn cfl_limit(state: &LagrangianState, profile: &StarProfile) -> Result<f64> {
    let mesh = Mesh::of(state, profile)?;
    limit_of(&mesh, &state.eta, state.time)
}

fn limit_of(mesh: &Mesh, eta: &[f64], time: f64) -> Result<f64> {
    let f = mesh.densities(eta, time)?;
    Ok((0..f.len())
        .map(|c| (eta[c + 1] - eta[c]) / mesh.eos.sound_speed_sq(f[c]).sqrt())
        .fold(f64::INFINITY, f64::min))
}

fn check_monotone(eta: &[f64], time: f64) -> Result<()> {
    match eta.windows(2).position(|w| !(w[1] > w[0])) {
        Some(cell) => Err(Error::CellInversion { cell, time }),
        None => Ok(()),
    }
}

/// One kick-drift-kick step; `a` holds the accelerations at the current
/// positions on entry and at the new positions on exit.
fn kdk(
    mesh: &Mesh,
    state: &mut LagrangianState,
    a: &mut Vec<f64>,
    dt: f64,
    viscosity: f64,
) -> Result<()> {
    for i in 1..state.len() {
        state.vel[i] += 0.5 * dt * a[i];
    }
    let mut eta = state.eta.clone();
    for i in 1..eta.len() {
        eta[i] += dt * state.vel[i];
    }
    let time = state.time + dt;
    check_monotone(&eta, time)?;
    *a = mesh.accelerations(&eta, &state.vel, time, viscosity)?;
    for i in 1..state.len() {
        state.vel[i] += 0.5 * dt * a[i];
    }
    state.eta = eta;
    state.time = time;
    Ok(())
}

/// Advance by `dt` with kick-drift-kick leapfrog, without viscosity. Steps
/// above the acoustic limit are rejected.
pub fn step(state: &LagrangianState, profile: &StarProfile, dt: f64) -> Result<LagrangianState> {
    state.validate()?;
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(invalid(format!("time step must be nonnegative, got {dt}")));
    }
    let mut next = state.clone();
    if dt == 0.0 {
        return Ok(next);
    }
    let mesh = Mesh::of(state, profile)?;
    let limit = limit_of(&mesh, &state.eta, state.time)?;
    if dt > limit {
        return Err(Error::CflViolation { dt, limit });
    }
    let mut a = mesh.accelerations(&state.eta, &state.vel, state.time, 0.0)?;
    kdk(&mesh, &mut next, &mut a, dt, 0.0)?;
    Ok(next)
}

fn dual_volumes(eta: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; eta.len()];
    for c in 0..eta.len() - 1 {
        let v = 0.5 * 4.0 * PI / 3.0 * cube_diff(eta[c], eta[c + 1]);
        out[c] += v;
        out[c + 1] += v;
    }
    out
}

fn norm_with(state: &LagrangianState, f: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (c, (fc, rc)) in f.iter().zip(&state.reference_density).enumerate() {
        let v = 4.0 * PI / 3.0 * cube_diff(state.eta[c], state.eta[c + 1]);
        acc += (fc - rc).powi(2) * v;
    }
    for (u, w) in state.vel.iter().zip(dual_volumes(&state.eta)) {
        acc += u * u * w;
    }
    acc.sqrt()
}

/// `√(4π∫ [υ² + (f − f_ref)²] η² ∂_yη dy)` at fixed Lagrangian label, with the
/// density part summed over cells and the velocity part over dual cells.
pub fn perturbation_norm(state: &LagrangianState, profile: &StarProfile) -> Result<f64> {
    let mesh = Mesh::of(state, profile)?;
    Ok(norm_with(state, &mesh.densities(&state.eta, state.time)?))
}

fn energy_with(mesh: &Mesh, state: &LagrangianState, f: &[f64]) -> f64 {
    let kinetic: f64 = state
        .vel
        .iter()
        .zip(&mesh.node_mass)
        .map(|(u, m)| 0.5 * m * u * u)
        .sum();
    let internal: f64 = f
        .iter()
        .zip(&mesh.cell_mass)
        .map(|(&r, dm)| dm * mesh.eos.internal_energy(r))
        .sum();
    let gravity: f64 = (1..state.len())
        .map(|i| mesh.node_mass[i] * mesh.enclosed[i] / state.eta[i])
        .sum();
    kinetic + internal - gravity
}

/// Kinetic plus internal plus gravitational energy. The discrete sums are the
/// Hamiltonian whose gradient gives the nodal forces.
pub fn total_energy(state: &LagrangianState, profile: &StarProfile) -> Result<f64> {
    let mesh = Mesh::of(state, profile)?;
    let f = mesh.densities(&state.eta, state.time)?;
    Ok(energy_with(&mesh, state, &f))
}

/// `∫₀^R dy / c_s(ρ̄)`, the time a sound wave needs to cross the star.
pub fn sound_crossing_time(profile: &StarProfile) -> f64 {
    let eos = profile.eos();
    let y = profile.nodes();
    let rho = profile.rho();
    (0..y.len() - 1)
        .map(|i| {
            let a = 1.0 / eos.sound_speed_sq(rho[i]).sqrt();
            let b = 1.0 / eos.sound_speed_sq(rho[i + 1]).sqrt();
            0.5 * (a + b) * (y[i + 1] - y[i])
        })
        .sum()
}

fn sample(mesh: &Mesh, state: &LagrangianState) -> Result<(DiagnosticSample, f64)> {
    let f = mesh.densities(&state.eta, state.time)?;
    let norm = norm_with(state, &f);
    let jdev = f
        .iter()
        .zip(&mesh.cell_rho0)
        .map(|(fc, r)| (r / fc - 1.0).abs())
        .fold(0.0, f64::max);
    Ok((
        DiagnosticSample {
            t: state.time,
            norm,
            energy: energy_with(mesh, state, &f),
            boundary_radius: state.boundary_radius(),
            max_jacobian_dev: jdev,
        },
        norm,
    ))
}

/// Integrate to `t_end`, sampling diagnostics every `sample_dt` and at the end.
/// The step is fixed at the start from the Courant number and shortened so that
/// samples fall on step boundaries. A cell inversion ends the run early with a
/// flagged status rather than an error.
pub fn evolve(
    state: &LagrangianState,
    profile: &StarProfile,
    t_end: f64,
    sample_dt: f64,
    opts: &EvolveOptions,
) -> Result<Evolution> {
    state.validate()?;
    if !(t_end > state.time && t_end.is_finite()) {
        return Err(invalid(format!(
            "t_end = {t_end} must exceed the current time {}",
            state.time
        )));
    }
    if !(sample_dt > 0.0) {
        return Err(invalid(format!(
            "sample interval must be positive, got {sample_dt}"
        )));
    }
    if !(opts.cfl > 0.0 && opts.cfl <= 1.0) {
        return Err(invalid(format!(
            "CFL number must lie in (0, 1], got {}",
            opts.cfl
        )));
    }
    let mesh = Mesh::of(state, profile)?;
    let limit = limit_of(&mesh, &state.eta, state.time)?;
    let target = match opts.dt {
        Some(dt) if dt > limit => return Err(Error::CflViolation { dt, limit }),
        Some(dt) if !(dt > 0.0) => {
            return Err(invalid(format!("time step must be positive, got {dt}")))
        }
        Some(dt) => dt,
        None => opts.cfl * limit,
    };
    let interval = sample_dt.min(t_end - state.time);
    let per_sample = (interval / target).ceil().max(1.0);
    let dt = interval / per_sample;
    let per_sample = per_sample as u64;
    let total = ((t_end - state.time) / dt - 1e-9).ceil() as u64;

    let mut current = state.clone();
    let mut a = mesh.accelerations(&current.eta, &current.vel, current.time, opts.viscosity)?;
    let (first, mut norm) = sample(&mesh, &current)?;
    let mut samples = vec![first];
    let mut crossings: Vec<Option<f64>> = opts
        .thresholds
        .iter()
        .map(|&th| (norm >= th).then_some(current.time))
        .collect();
    let track = !opts.thresholds.is_empty();
    let start = current.time;
    let mut status = RunStatus::Completed;
    for k in 1..=total {
        let h = if k == total {
            t_end - start - (total - 1) as f64 * dt
        } else {
            dt
        };
        let mut next = current.clone();
        match kdk(&mesh, &mut next, &mut a, h, opts.viscosity) {
            Ok(()) => {}
            Err(Error::CellInversion { cell, time }) => {
                status = RunStatus::Inverted { cell, time };
                break;
            }
            Err(e) => return Err(e),
        }
        let last_norm = norm;
        let due = k % per_sample == 0 || k == total;
        if track || due {
            let (s, nn) = sample(&mesh, &next)?;
            norm = nn;
            if due {
                samples.push(s);
            }
        }
        for (slot, &th) in crossings.iter_mut().zip(&opts.thresholds) {
            if slot.is_none() && norm >= th {
                let frac = if last_norm > 0.0 && norm > last_norm {
                    (th / last_norm).ln() / (norm / last_norm).ln()
                } else {
                    1.0
                };
                *slot = Some(current.time + frac.clamp(0.0, 1.0) * h);
            }
        }
        current = next;
        if track && crossings.iter().all(Option::is_some) {
            if !due {
                samples.push(sample(&mesh, &current)?.0);
            }
            status = RunStatus::ReachedThreshold;
            break;
        }
    }
    Ok(Evolution {
        diagnostics: Diagnostics {
            samples,
            status,
            dt,
        },
        state: current,
        crossings,
    })
}

/// Final state as a table `y,eta,vel`.
pub fn state_table(state: &LagrangianState, comments: &[(String, String)]) -> Table {
    let mut t = Table::new(&["y", "eta", "vel"]);
    for (k, v) in comments {
        t = t.comment(k, v);
    }
    t = t.comment("time", fmt_f64(state.time));
    for ((y, e), u) in state.labels.nodes().iter().zip(&state.eta).zip(&state.vel) {
        t.push_row(vec![*y, *e, *u]);
    }
    t
}
