use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::numerics::{ldl_inertia, pencil_count_below, TridiagonalSymmetric};
use crate::spectral::{assemble, AssembledPencil, ModeResult};
use crate::steady_state::StarProfile;

use super::evolve::{DiagnosticSample, Diagnostics, RunStatus};
use super::state::{cube_diff, LagrangianState, Mesh};

/// Perturbation `(ζ, ∂_tζ, σ)` of the linearized system on the profile grid,
/// with `η = y(1 + ζ)`, `υ = y ∂_tζ` and `σ = log(ρ/ρ̄)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearState {
    pub zeta: Vec<f64>,
    pub zeta_t: Vec<f64>,
    pub sigma: Vec<f64>,
    pub time: f64,
}

/// `3ζ + y ∂_yζ` by centred differences, one-sided at the ends.
fn divergence(y: &[f64], zeta: &[f64]) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .map(|i| {
            let slope = if i == 0 {
                (zeta[1] - zeta[0]) / (y[1] - y[0])
            } else if i == n - 1 {
                (zeta[i] - zeta[i - 1]) / (y[i] - y[i - 1])
            } else {
                (zeta[i + 1] - zeta[i - 1]) / (y[i + 1] - y[i - 1])
            };
            3.0 * zeta[i] + y[i] * slope
        })
        .collect()
}

impl LinearState {
    /// Pure growing branch `ζ = aχ`, `∂_tζ = a√μ₀χ`; a stable mode oscillates from rest.
    pub fn from_mode(mode: &ModeResult, amplitude: f64) -> Self {
        let rate = mode.growth_rate.unwrap_or(0.0);
        let zeta: Vec<f64> = mode.chi.iter().map(|c| amplitude * c).collect();
        Self {
            zeta_t: zeta.iter().map(|z| rate * z).collect(),
            sigma: divergence(&mode.nodes, &zeta).iter().map(|d| -d).collect(),
            zeta,
            time: 0.0,
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            zeta: vec![0.0; n],
            zeta_t: vec![0.0; n],
            sigma: vec![0.0; n],
            time: 0.0,
        }
    }

    /// `(3ζ(R) + R ∂_yζ(R)) / max|ζ|` from a one-sided difference.
    pub fn robin_defect(&self, y: &[f64]) -> f64 {
        let n = y.len() - 1;
        let scale = self.zeta.iter().fold(0.0, |a: f64, z| a.max(z.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let slope = (self.zeta[n] - self.zeta[n - 1]) / (y[n] - y[n - 1]);
        (3.0 * self.zeta[n] + y[n] * slope) / scale
    }
}

/// Cell-wise linearized volume change `δV/V = 3Δ(y³ζ)/Δy³`.
fn volume_strain(y: &[f64], zeta: &[f64]) -> Vec<f64> {
    (0..y.len() - 1)
        .map(|c| {
            let (a, b) = (y[c], y[c + 1]);
            3.0 * (b * b * b * zeta[c + 1] - a * a * a * zeta[c]) / cube_diff(a, b)
        })
        .collect()
}

fn linear_sample(
    pencil: &AssembledPencil,
    y: &[f64],
    rho0: &[f64],
    s: &LinearState,
) -> DiagnosticSample {
    let strain = volume_strain(y, &s.zeta);
    let mut acc = 0.0;
    for c in 0..strain.len() {
        let v = 4.0 * PI / 3.0 * cube_diff(y[c], y[c + 1]);
        acc += (rho0[c] * strain[c]).powi(2) * v;
        let u = (y[c] * s.zeta_t[c], y[c + 1] * s.zeta_t[c + 1]);
        acc += 0.5 * (u.0 * u.0 + u.1 * u.1) * v;
    }
    let n = y.len() - 1;
    DiagnosticSample {
        t: s.time,
        norm: acc.sqrt(),
        energy: pencil.mass().quadratic_form(&s.zeta_t) + pencil.stiffness_form(&s.zeta),
        boundary_radius: y[n] * (1.0 + s.zeta[n]),
        max_jacobian_dev: strain.iter().fold(0.0, |a: f64, x| a.max(x.abs())),
    }
}

/// Largest stable step of [`evolve_linearized`] on `profile`.
pub fn linear_step_limit(profile: &StarProfile) -> Result<f64> {
    Ok(leapfrog_limit(&assemble(profile)?))
}

/// Largest stable leapfrog step `2/√λ_max(M⁻¹A)` of the pencil.
fn leapfrog_limit(pencil: &AssembledPencil) -> f64 {
    let (a, m) = (pencil.stiffness(), pencil.mass());
    let n = pencil.len();
    let mut hi = 1.0;
    while pencil_count_below(a, m, hi) < n {
        hi *= 2.0;
    }
    let mut lo = hi / 2.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if pencil_count_below(a, m, mid) < n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    2.0 / hi.sqrt()
}

/// Integrate `M ζ_tt = −A ζ`, the finite-element form of the linearized system
/// whose stationary modes are the spectral pencil, with kick-drift-kick leapfrog.
/// The Robin condition is the natural boundary condition of the weak form.
/// `υ = y∂_tζ` and `σ = σ(0) − [(3ζ + y∂_yζ)(t) − (3ζ + y∂_yζ)(0)]` are
/// recovered exactly from the linear continuity equation. Samples every step.
pub fn evolve_linearized(
    profile: &StarProfile,
    initial: &LinearState,
    t_end: f64,
    dt: f64,
) -> Result<(Diagnostics, LinearState)> {
    let pencil = assemble(profile)?;
    let y = profile.nodes();
    let n = y.len();
    for len in [
        initial.zeta.len(),
        initial.zeta_t.len(),
        initial.sigma.len(),
    ] {
        if len != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: len,
            });
        }
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid(format!("time step must be positive, got {dt}")));
    }
    if !(t_end > initial.time) {
        return Err(invalid(format!(
            "t_end = {t_end} must exceed the current time {}",
            initial.time
        )));
    }
    let limit = leapfrog_limit(&pencil);
    if dt > limit {
        return Err(Error::CflViolation { dt, limit });
    }
    let (mass_factor, _) = ldl_inertia(pencil.mass())?;
    let accel = |z: &[f64]| -> Vec<f64> {
        let az = pencil.apply_stiffness(z);
        mass_factor.solve(&az).into_iter().map(|x| -x).collect()
    };
    let rho0 = super::state::cell_densities(profile);
    let div0 = divergence(y, &initial.zeta);
    let mut s = initial.clone();
    let mut a = accel(&s.zeta);
    let mut samples = vec![linear_sample(&pencil, y, &rho0, &s)];
    let steps = ((t_end - s.time) / dt - 1e-9).ceil() as u64;
    let start = s.time;
    for k in 1..=steps {
        let h = if k == steps {
            t_end - start - (steps - 1) as f64 * dt
        } else {
            dt
        };
        for (v, acc) in s.zeta_t.iter_mut().zip(&a) {
            *v += 0.5 * h * acc;
        }
        for (z, v) in s.zeta.iter_mut().zip(&s.zeta_t) {
            *z += h * v;
        }
        a = accel(&s.zeta);
        for (v, acc) in s.zeta_t.iter_mut().zip(&a) {
            *v += 0.5 * h * acc;
        }
        s.time = start + k as f64 * dt;
        if k == steps {
            s.time = t_end;
        }
        samples.push(linear_sample(&pencil, y, &rho0, &s));
    }
    let div = divergence(y, &s.zeta);
    for i in 0..n {
        s.sigma[i] = initial.sigma[i] - (div[i] - div0[i]);
    }
    Ok((
        Diagnostics {
            samples,
            status: RunStatus::Completed,
            dt,
        },
        s,
    ))
}

/// Exact linearization of the discrete nonlinear scheme about a rest state:
/// `M ξ_tt = −H ξ` with `H` the Hessian of the discrete potential energy.
/// Advanced with the same leapfrog, it is the first-order term of the
/// nonlinear trajectory in the seed amplitude.
#[derive(Debug, Clone)]
pub struct TangentLinear {
    hessian: TridiagonalSymmetric,
    node_mass: Vec<f64>,
    base: LagrangianState,
    cell_mass: Vec<f64>,
}

impl TangentLinear {
    pub fn new(base: &LagrangianState, profile: &StarProfile) -> Result<Self> {
        base.validate()?;
        if base.vel.iter().any(|&v| v != 0.0) {
            return Err(invalid("tangent-linear base must be at rest"));
        }
        let mesh = Mesh::of(base, profile)?;
        Ok(Self {
            hessian: mesh.hessian(&base.eta)?,
            node_mass: mesh.node_mass.clone(),
            cell_mass: mesh.cell_mass.clone(),
            base: base.clone(),
        })
    }

    pub fn acceleration(&self, xi: &[f64]) -> Vec<f64> {
        let hx = self.hessian.mul_vec(&xi[1..]);
        let mut out = vec![0.0; xi.len()];
        for i in 1..xi.len() {
            out[i] = -hx[i - 1] / self.node_mass[i];
        }
        out
    }

    /// Kick-drift-kick step of `(ξ, w)`.
    pub fn step(&self, xi: &mut [f64], w: &mut [f64], dt: f64) {
        let a = self.acceleration(xi);
        for i in 1..xi.len() {
            w[i] += 0.5 * dt * a[i];
            xi[i] += dt * w[i];
        }
        let a = self.acceleration(xi);
        for i in 1..xi.len() {
            w[i] += 0.5 * dt * a[i];
        }
    }

    /// Norm of `state − (base + δ·(ξ, w))`, with the density compared to its
    /// first-order expansion `f* (1 − δ δV/V*)`.
    pub fn defect(
        &self,
        state: &LagrangianState,
        xi: &[f64],
        w: &[f64],
        delta: f64,
    ) -> Result<f64> {
        let b = &self.base.eta;
        let mut acc = 0.0;
        for c in 0..self.cell_mass.len() {
            let vb = 4.0 * PI / 3.0 * cube_diff(b[c], b[c + 1]);
            let dv = 4.0 * PI * (b[c + 1] * b[c + 1] * xi[c + 1] - b[c] * b[c] * xi[c]);
            let fb = self.cell_mass[c] / vb;
            let v = 4.0 * PI / 3.0 * cube_diff(state.eta[c], state.eta[c + 1]);
            if !(v > 0.0) {
                return Err(Error::CellInversion {
                    cell: c,
                    time: state.time,
                });
            }
            let f = self.cell_mass[c] / v;
            let lin = fb * (1.0 - delta * dv / vb);
            acc += (f - lin).powi(2) * vb;
            let u = (
                state.vel[c] - delta * w[c],
                state.vel[c + 1] - delta * w[c + 1],
            );
            acc += 0.5 * (u.0 * u.0 + u.1 * u.1) * vb;
        }
        Ok(acc.sqrt())
    }
}
