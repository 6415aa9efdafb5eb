use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::numerics::{
    ldl_inertia, RadialGrid, TridiagonalSymmetric, GAUSS3_POINTS, GAUSS3_WEIGHTS,
};
use crate::spectral::ModeResult;
use crate::steady_state::{EquationOfState, StarProfile};

/// Particle positions and velocities of the radial Lagrangian scheme.
///
/// Positions and velocities live on the label nodes; density, Jacobian and
/// pressure live in the cells between them.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianState {
    /// Reference radii `y` labelling the particles.
    pub labels: RadialGrid,
    /// Current radii `η(y_i, t)`.
    pub eta: Vec<f64>,
    /// Velocities `υ = ∂_tη`.
    pub vel: Vec<f64>,
    pub time: f64,
    /// Equilibrium density averaged over each cell, `f₀J₀ = ρ̄`.
    pub cell_rho0: Vec<f64>,
    /// Cell densities that [`perturbation_norm`](super::perturbation_norm)
    /// measures against: `cell_rho0`, or the cell densities of the discrete
    /// equilibrium a perturbation was seeded on.
    pub reference_density: Vec<f64>,
}

/// `(b³ − a³)` without cancellation for nearby `a`, `b`.
pub(crate) fn cube_diff(a: f64, b: f64) -> f64 {
    (b - a) * (b * b + a * b + a * a)
}

/// Label-fixed quantities shared by every state of one star.
#[derive(Debug, Clone)]
pub(crate) struct Mesh {
    pub eos: EquationOfState,
    /// `(y_{c+1}³ − y_c³)`, the label volume of each cell over `4π/3`.
    pub label_cubes: Vec<f64>,
    pub cell_rho0: Vec<f64>,
    pub cell_mass: Vec<f64>,
    /// Node weights `4π y_i² ρ̄(y_i) Δy_i` over the dual cell; they carry both
    /// the inertia and the gravitational mass of the node.
    pub node_mass: Vec<f64>,
    /// Mass inside each node, summed over cells.
    pub enclosed: Vec<f64>,
}

impl Mesh {
    pub fn new(gamma: f64, labels: &[f64], cell_rho0: &[f64], node_rho: &[f64]) -> Result<Self> {
        let eos = EquationOfState::new(gamma)?;
        let n = labels.len();
        if n < 3 {
            return Err(invalid("Lagrangian mesh needs at least two cells"));
        }
        for (len, expected) in [(cell_rho0.len(), n - 1), (node_rho.len(), n)] {
            if len != expected {
                return Err(Error::LengthMismatch {
                    expected,
                    actual: len,
                });
            }
        }
        let label_cubes: Vec<f64> = labels.windows(2).map(|w| cube_diff(w[0], w[1])).collect();
        let cell_mass: Vec<f64> = label_cubes
            .iter()
            .zip(cell_rho0)
            .map(|(v, r)| 4.0 * PI / 3.0 * r * v)
            .collect();
        let mut node_mass = vec![0.0; n];
        let mut enclosed = vec![0.0; n];
        for (c, dm) in cell_mass.iter().enumerate() {
            let half = 0.5 * (labels[c + 1] - labels[c]);
            node_mass[c] += half;
            node_mass[c + 1] += half;
            enclosed[c + 1] = enclosed[c] + dm;
        }
        for ((w, y), r) in node_mass.iter_mut().zip(labels).zip(node_rho) {
            *w *= 4.0 * PI * y * y * r;
        }
        Ok(Self {
            eos,
            label_cubes,
            cell_rho0: cell_rho0.to_vec(),
            cell_mass,
            node_mass,
            enclosed,
        })
    }

    pub fn of(state: &LagrangianState, profile: &StarProfile) -> Result<Self> {
        Self::new(
            profile.gamma(),
            state.labels.nodes(),
            &state.cell_rho0,
            profile.rho(),
        )
    }

    pub fn cells(&self) -> usize {
        self.cell_mass.len()
    }

    /// Cell densities `f = ρ̄/J`; errors on a non-increasing `η`.
    pub fn densities(&self, eta: &[f64], time: f64) -> Result<Vec<f64>> {
        let mut f = Vec::with_capacity(self.cells());
        for c in 0..self.cells() {
            let cubes = cube_diff(eta[c], eta[c + 1]);
            if !(cubes > 0.0 && cubes.is_finite()) {
                return Err(Error::CellInversion { cell: c, time });
            }
            f.push(self.cell_rho0[c] * self.label_cubes[c] / cubes);
        }
        Ok(f)
    }

    /// Nodal forces `−∂E/∂η` with `E = Σ dm e(f) − Σ M_i m_i/η_i`.
    /// `viscosity` scales a von Neumann-Richtmyer pressure in compressing cells.
    pub fn forces(&self, eta: &[f64], vel: &[f64], time: f64, viscosity: f64) -> Result<Vec<f64>> {
        let f = self.densities(eta, time)?;
        let n = eta.len();
        let mut pressure: Vec<f64> = f.iter().map(|&r| self.eos.pressure(r)).collect();
        if viscosity > 0.0 {
            for (c, p) in pressure.iter_mut().enumerate() {
                let dv = vel[c + 1] - vel[c];
                if dv < 0.0 {
                    *p += viscosity * f[c] * dv * dv;
                }
            }
        }
        let mut out = vec![0.0; n];
        for i in 1..n {
            let left = pressure[i - 1];
            let right = if i < n - 1 { pressure[i] } else { 0.0 };
            let e2 = eta[i] * eta[i];
            out[i] = 4.0 * PI * e2 * (left - right) - self.node_mass[i] * self.enclosed[i] / e2;
        }
        Ok(out)
    }

    pub fn accelerations(
        &self,
        eta: &[f64],
        vel: &[f64],
        time: f64,
        viscosity: f64,
    ) -> Result<Vec<f64>> {
        let mut a = self.forces(eta, vel, time, viscosity)?;
        a[0] = 0.0;
        for i in 1..a.len() {
            a[i] /= self.node_mass[i];
        }
        Ok(a)
    }

    /// Hessian `∂²E/∂η²` over the moving nodes `1..=N` (tridiagonal).
    pub fn hessian(&self, eta: &[f64]) -> Result<TridiagonalSymmetric> {
        let f = self.densities(eta, 0.0)?;
        let n = eta.len();
        let gamma = self.eos.gamma();
        let vol: Vec<f64> = (0..self.cells())
            .map(|c| 4.0 * PI / 3.0 * cube_diff(eta[c], eta[c + 1]))
            .collect();
        // γ f^γ / V: derivative of the cell pressure with respect to its volume, negated
        let stiff: Vec<f64> = f
            .iter()
            .zip(&vol)
            .map(|(&r, &v)| gamma * r.powf(gamma) / v)
            .collect();
        let pressure: Vec<f64> = f.iter().map(|&r| self.eos.pressure(r)).collect();
        let sixteen_pi2 = 16.0 * PI * PI;
        let mut diag = Vec::with_capacity(n - 1);
        let mut off = Vec::with_capacity(n - 2);
        for i in 1..n {
            let (left, right) = (pressure[i - 1], if i < n - 1 { pressure[i] } else { 0.0 });
            let e = eta[i];
            let e4 = e * e * e * e;
            let mut k = stiff[i - 1];
            if i < n - 1 {
                k += stiff[i];
                off.push(-sixteen_pi2 * stiff[i] * e * e * eta[i + 1] * eta[i + 1]);
            }
            diag.push(
                -8.0 * PI * e * (left - right) + sixteen_pi2 * e4 * k
                    - 2.0 * self.node_mass[i] * self.enclosed[i] / (e * e * e),
            );
        }
        TridiagonalSymmetric::new(diag, off)
    }
}

impl LagrangianState {
    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    /// Outer radius `η(R, t)`.
    pub fn boundary_radius(&self) -> f64 {
        *self.eta.last().unwrap()
    }

    /// Cell Jacobians `J = (η_{c+1}³ − η_c³)/(y_{c+1}³ − y_c³)`.
    pub fn jacobians(&self) -> Vec<f64> {
        let y = self.labels.nodes();
        (0..self.eta.len() - 1)
            .map(|c| cube_diff(self.eta[c], self.eta[c + 1]) / cube_diff(y[c], y[c + 1]))
            .collect()
    }

    /// Check the centre conditions and strict monotonicity of `η`.
    pub fn validate(&self) -> Result<()> {
        let n = self.labels.len();
        for len in [
            self.eta.len(),
            self.vel.len(),
            self.cell_rho0.len() + 1,
            self.reference_density.len() + 1,
        ] {
            if len != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: len,
                });
            }
        }
        if self.eta[0] != 0.0 || self.vel[0] != 0.0 {
            return Err(Error::InvalidProfile(
                "centre node must stay at rest at the origin".into(),
            ));
        }
        if let Some(c) = self.eta.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::CellInversion {
                cell: c,
                time: self.time,
            });
        }
        if self.eta.iter().chain(&self.vel).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Lagrangian state"));
        }
        Ok(())
    }
}

/// Cell averages `(1/Δy)∫ρ̄ dy` of a profile by three-point Gauss quadrature.
pub(crate) fn cell_densities(profile: &StarProfile) -> Vec<f64> {
    let y = profile.nodes();
    (0..y.len() - 1)
        .map(|c| {
            let h = y[c + 1] - y[c];
            GAUSS3_POINTS
                .iter()
                .zip(&GAUSS3_WEIGHTS)
                .map(|(t, w)| w * profile.sample_in_cell(c, y[c] + t * h).0)
                .sum()
        })
        .collect()
}

/// The equilibrium in the gauge `f₀J₀ = ρ̄`: `η = y`, `υ = 0`.
pub fn init_equilibrium(profile: &StarProfile) -> LagrangianState {
    let cell_rho0 = cell_densities(profile);
    let y = profile.nodes();
    LagrangianState {
        labels: profile.grid().clone(),
        eta: y.to_vec(),
        vel: vec![0.0; y.len()],
        time: 0.0,
        reference_density: cell_rho0.clone(),
        cell_rho0,
    }
}

/// Exact rest state of the discrete equations, found by Newton iteration from
/// `η = y`. It differs from `η = y` by the `O(h²)` quadrature residual.
pub fn discrete_equilibrium(profile: &StarProfile) -> Result<LagrangianState> {
    let mut state = init_equilibrium(profile);
    let mesh = Mesh::of(&state, profile)?;
    let vel = vec![0.0; state.len()];
    let scale = mesh
        .enclosed
        .last()
        .map(|m| m / (profile.radius() * profile.radius()))
        .unwrap();
    let mut last = f64::INFINITY;
    for _ in 0..30 {
        let force = mesh.forces(&state.eta, &vel, 0.0, 0.0)?;
        let worst = (1..force.len())
            .map(|i| (force[i] / mesh.node_mass[i]).abs())
            .fold(0.0, f64::max);
        if worst <= 1e-13 * scale || worst >= last {
            break;
        }
        last = worst;
        let (factor, _) = ldl_inertia(&mesh.hessian(&state.eta)?)?;
        let step = factor.solve(&force[1..]);
        for (e, d) in state.eta[1..].iter_mut().zip(&step) {
            *e += d;
        }
    }
    state.validate()?;
    state.reference_density = mesh.densities(&state.eta, 0.0)?;
    Ok(state)
}

/// Seed the pure growing branch of `mode` on top of `base`:
/// `η = η_base + δ y χ`, `υ = δ √μ₀ y χ`.
pub fn seed_mode_on(
    base: &LagrangianState,
    mode: &ModeResult,
    delta: f64,
) -> Result<LagrangianState> {
    let growth = mode
        .growth_rate
        .ok_or_else(|| invalid("seeding needs an unstable mode"))?;
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(invalid(format!(
            "seed amplitude must be nonnegative, got {delta}"
        )));
    }
    let y = base.labels.nodes();
    if mode.chi.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: y.len(),
            actual: mode.chi.len(),
        });
    }
    if mode
        .nodes
        .iter()
        .zip(y)
        .any(|(a, b)| (a - b).abs() > 1e-12 * y[y.len() - 1])
    {
        return Err(invalid("mode and state live on different grids"));
    }
    let mut state = base.clone();
    for i in 0..y.len() {
        let shape = y[i] * mode.chi[i];
        state.eta[i] += delta * shape;
        state.vel[i] = base.vel[i] + delta * growth * shape;
    }
    if let Some(c) = state.eta.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(invalid(format!("seed amplitude {delta} inverts cell {c}")));
    }
    Ok(state)
}

/// [`seed_mode_on`] the equilibrium `η = y`: `η = y(1 + δχ)`, `υ = δ√μ₀ yχ`.
pub fn seed_mode(profile: &StarProfile, mode: &ModeResult, delta: f64) -> Result<LagrangianState> {
    seed_mode_on(&init_equilibrium(profile), mode, delta)
}

/// Per-node accelerations `∂_t²η` of the momentum equation without viscosity.
pub fn acceleration(state: &LagrangianState, profile: &StarProfile) -> Result<Vec<f64>> {
    state.validate()?;
    Mesh::of(state, profile)?.accelerations(&state.eta, &state.vel, state.time, 0.0)
}

/// Linearized accelerations `−H ξ / M` about the positions of `state`, where `H`
/// is the Hessian of the discrete potential energy. Node 0 is fixed.
pub fn linearized_acceleration(
    state: &LagrangianState,
    profile: &StarProfile,
    xi: &[f64],
) -> Result<Vec<f64>> {
    let mesh = Mesh::of(state, profile)?;
    let h = mesh.hessian(&state.eta)?;
    let hx = h.mul_vec(&xi[1..]);
    let mut out = vec![0.0; xi.len()];
    for i in 1..xi.len() {
        out[i] = -hx[i - 1] / mesh.node_mass[i];
    }
    Ok(out)
}
