use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::numerics::{bisect_event, rk4_step, MonotoneCubic, RadialGrid, Spacing};

use super::{EquationOfState, StarProfile};

/// Largest admissible adiabatic index for the instability study (exclusive).
pub const GAMMA_MAX: f64 = 4.0 / 3.0;

/// Knobs for the hydrostatic integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Node layout of the output grid.
    pub spacing: Spacing,
    /// Absolute tolerance of the boundary bisection, relative to the radius.
    pub event_tol: f64,
    /// Steps per unit of `ln y`; the step at radius `y` is `y / steps_per_scale`.
    pub steps_per_scale: f64,
    /// Give up when no event is found within this multiple of the core width.
    pub max_radius_factor: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            spacing: Spacing::Uniform,
            event_tol: 1e-12,
            steps_per_scale: 400.0,
            max_radius_factor: 1e6,
        }
    }
}

/// Hydrostatic balance integrated in enthalpy form: `h' = −m/y²`, `m' = 4πy²ρ(h)`.
struct Hydrostatic {
    eos: EquationOfState,
    kappa: f64,
    h_center: f64,
    /// Coefficients of `ρ = κ(1 + r1 y² + r2 y⁴ + …)` near the center.
    r1: f64,
    r2: f64,
    core: f64,
}

impl Hydrostatic {
    fn new(eos: EquationOfState, kappa: f64) -> Self {
        let g = eos.gamma();
        let q1 = -(2.0 * PI / 3.0) * kappa.powf(2.0 - g);
        let r1 = q1 / g;
        let q2 = -(8.0 * PI / 15.0) * kappa.powf(2.0 - g) * r1;
        let r2 = q2 / g + (1.0 / g) * (1.0 / g - 1.0) * q1 * q1 / 2.0;
        Self {
            eos,
            kappa,
            h_center: eos.enthalpy(kappa),
            r1,
            r2,
            core: 1.0 / r1.abs().sqrt(),
        }
    }

    fn rhs(&self, y: f64, s: &[f64; 2]) -> [f64; 2] {
        let rho = self.eos.density_from_enthalpy(s[0]);
        [-s[1] / (y * y), 4.0 * PI * y * y * rho]
    }

    /// Regular expansion about the center, accurate to `O(y⁶)` relative.
    fn series(&self, y: f64) -> [f64; 2] {
        let y2 = y * y;
        let k = self.kappa;
        let h = self.h_center - 4.0 * PI * k * (y2 / 6.0 + self.r1 * y2 * y2 / 20.0);
        let m = 4.0 * PI * k * y * y2 * (1.0 / 3.0 + self.r1 * y2 / 5.0 + self.r2 * y2 * y2 / 7.0);
        [h, m]
    }

    /// Largest step taken at radius `y`. The `m/y²` term makes the problem
    /// singular at the center, so steps stay proportional to `y`.
    fn step_size(&self, y: f64, steps_per_scale: f64) -> f64 {
        y.max(self.series_limit()) / steps_per_scale
    }

    fn series_limit(&self) -> f64 {
        0.01 * self.core
    }

    /// Advance from `y` by `s`. Leaving the center uses the series.
    fn advance(&self, y: f64, state: &[f64; 2], s: f64) -> Result<[f64; 2]> {
        if y == 0.0 {
            Ok(self.series(s))
        } else {
            rk4_step(|yy, st| self.rhs(yy, st), y, state, s)
        }
    }

    /// Integrate outward until the enthalpy drops to `h_target`; returns the event radius.
    fn find_event(&self, h_target: f64, opts: &SolverOptions) -> Result<f64> {
        let max_radius = opts.max_radius_factor * self.core;
        let mut y = 0.0;
        let mut state = [self.h_center, 0.0];
        loop {
            let step = if y == 0.0 {
                self.series_limit()
            } else {
                self.step_size(y, opts.steps_per_scale)
            };
            let next = self.advance(y, &state, step)?;
            if next[0] <= h_target {
                let f = |s: f64| -> f64 {
                    if s == 0.0 {
                        return state[0] - h_target;
                    }
                    match self.advance(y, &state, s) {
                        Ok(v) => v[0] - h_target,
                        Err(_) => f64::NAN,
                    }
                };
                let tol = opts.event_tol * (y + step);
                let s = bisect_event(f, 0.0, step, tol)?;
                return Ok(y + s);
            }
            y += step;
            state = next;
            if y > max_radius {
                return Err(Error::NotBracketed { max_radius });
            }
        }
    }

    /// Integrate through the given nodes, returning `(ρ, m)` at each.
    fn integrate_on(&self, nodes: &[f64], steps_per_scale: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut rho = Vec::with_capacity(nodes.len());
        let mut mass = Vec::with_capacity(nodes.len());
        rho.push(self.kappa);
        mass.push(0.0);
        let mut y = 0.0;
        let mut state = [self.h_center, 0.0];
        for &target in &nodes[1..] {
            if y == 0.0 {
                let s = (target - y).min(self.series_limit());
                state = self.series(s);
                y = s;
            }
            let span = target - y;
            if span > 0.0 {
                let substeps = (span / self.step_size(y, steps_per_scale)).ceil().max(1.0) as usize;
                let h = span / substeps as f64;
                for k in 0..substeps {
                    state = self.advance(y + k as f64 * h, &state, h)?;
                }
            }
            y = target;
            rho.push(self.eos.density_from_enthalpy(state[0]));
            mass.push(state[1]);
        }
        Ok((rho, mass))
    }
}

fn check_gamma(gamma: f64) -> Result<EquationOfState> {
    if !(1.0..GAMMA_MAX).contains(&gamma) {
        return Err(invalid(format!(
            "adiabatic index must lie in [1, 4/3), got {gamma}"
        )));
    }
    EquationOfState::new(gamma)
}

fn build_grid(radius: f64, cells: usize, spacing: Spacing) -> Result<RadialGrid> {
    match spacing {
        Spacing::Uniform => RadialGrid::uniform(radius, cells),
        Spacing::Geometric { ratio } => RadialGrid::geometric(radius, cells, ratio),
    }
}

/// Liquid Lane-Emden star with central density `kappa` and boundary density 1,
/// sampled on `n + 1` nodes.
pub fn solve_liquid_star(gamma: f64, kappa: f64, n: usize) -> Result<StarProfile> {
    solve_liquid_star_with(gamma, kappa, n, &SolverOptions::default())
}

pub fn solve_liquid_star_with(
    gamma: f64,
    kappa: f64,
    n: usize,
    opts: &SolverOptions,
) -> Result<StarProfile> {
    let eos = check_gamma(gamma)?;
    if !(kappa > 1.0 && kappa.is_finite()) {
        return Err(invalid(format!(
            "central density must exceed the boundary density (kappa > 1), got {kappa}"
        )));
    }
    if n < 16 {
        return Err(invalid(format!("grid needs at least 16 cells, got {n}")));
    }
    let ode = Hydrostatic::new(eos, kappa);
    let radius = ode.find_event(eos.enthalpy(1.0), opts)?;
    let grid = build_grid(radius, n, opts.spacing)?;
    let (mut rho, mass) = ode.integrate_on(grid.nodes(), opts.steps_per_scale)?;
    rho[0] = kappa;
    let profile = StarProfile::from_samples(gamma, kappa, 1.0, grid, rho, mass)?;
    profile.validate_equilibrium()?;
    Ok(profile)
}

/// Gaseous reference star with unit central density. For `γ > 6/5` it ends
/// at its compact-support edge (`ρ = 0`); otherwise it is truncated where the
/// density reaches `rho_floor`.
pub fn solve_gaseous_reference(gamma: f64, n: usize, rho_floor: f64) -> Result<StarProfile> {
    solve_gaseous_reference_with(gamma, n, rho_floor, &SolverOptions::default())
}

pub fn solve_gaseous_reference_with(
    gamma: f64,
    n: usize,
    rho_floor: f64,
    opts: &SolverOptions,
) -> Result<StarProfile> {
    let eos = check_gamma(gamma)?;
    if !(rho_floor > 0.0 && rho_floor < 1.0) {
        return Err(invalid(format!(
            "rho_floor must lie in (0, 1), got {rho_floor}"
        )));
    }
    if n < 16 {
        return Err(invalid(format!("grid needs at least 16 cells, got {n}")));
    }
    let compact = gamma > 1.2 + 1e-12;
    let (h_target, boundary) = if compact {
        (0.0, 0.0)
    } else {
        (eos.enthalpy(rho_floor), rho_floor)
    };
    let ode = Hydrostatic::new(eos, 1.0);
    let radius = ode.find_event(h_target, opts)?;
    let grid = build_grid(radius, n, opts.spacing)?;
    let (mut rho, mass) = ode.integrate_on(grid.nodes(), opts.steps_per_scale)?;
    rho[0] = 1.0;
    if compact {
        *rho.last_mut().unwrap() = 0.0;
    }
    StarProfile::from_samples(gamma, 1.0, boundary, grid, rho, mass)
}

/// Liquid star obtained from a gaseous reference by the self-similar scaling
/// `ρ_κ(y) = κ ρ_*(κ^{1−γ/2} y)`, truncated where `ρ_κ = 1`.
pub fn scaled_profile(reference: &StarProfile, kappa: f64, n: usize) -> Result<StarProfile> {
    if !(kappa > 1.0 && kappa.is_finite()) {
        return Err(invalid(format!("scaled star needs kappa > 1, got {kappa}")));
    }
    if n < 16 {
        return Err(invalid(format!("grid needs at least 16 cells, got {n}")));
    }
    let gamma = reference.gamma();
    let target = 1.0 / kappa;
    if reference.boundary_density() > target || *reference.rho().last().unwrap() > target {
        return Err(invalid(format!(
            "reference profile does not reach density 1/kappa = {target}"
        )));
    }
    let z = reference.nodes().to_vec();
    let rho_ref = MonotoneCubic::new(z.clone(), reference.rho().to_vec())?;
    let mass_ref = MonotoneCubic::new(z, reference.mass().to_vec())?;

    let edge_z = bisect_event(
        |s| rho_ref.eval(s) - target,
        0.0,
        reference.radius(),
        1e-14 * reference.radius(),
    )?;
    let stretch = kappa.powf(1.0 - gamma / 2.0);
    let radius = edge_z / stretch;
    let mass_scale = kappa * stretch.powi(-3);

    let grid = RadialGrid::uniform(radius, n)?;
    let rho: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|y| kappa * rho_ref.eval(y * stretch))
        .collect();
    let mut mass: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|y| mass_scale * mass_ref.eval(y * stretch))
        .collect();
    mass[0] = 0.0;
    let mut rho = rho;
    rho[0] = kappa;
    *rho.last_mut().unwrap() = 1.0;
    StarProfile::from_samples(gamma, kappa, 1.0, grid, rho, mass)
}

/// Closed-form liquid star for `γ = 6/5`: density at radius `y` and the radius `R_κ`.
pub fn explicit_profile_six_fifths(kappa: f64, y: f64) -> Result<(f64, f64)> {
    if !(kappa > 1.0) {
        return Err(invalid(format!("kappa must exceed 1, got {kappa}")));
    }
    let radius = six_fifths_radius(kappa);
    if y < 0.0 || y > radius * (1.0 + 1e-14) {
        return Err(invalid(format!(
            "radius {y} lies outside [0, R_kappa = {radius}]"
        )));
    }
    Ok((six_fifths_density(kappa, y), radius))
}

/// `(κ^{−2/5} + (2π/9) κ^{2/5} y²)^{−5/2}`, valid for any `y ≥ 0` (also `κ ≤ 1`).
pub fn six_fifths_density(kappa: f64, y: f64) -> f64 {
    let k = kappa.powf(0.4);
    (1.0 / k + 2.0 * PI / 9.0 * k * y * y).powf(-2.5)
}

pub fn six_fifths_radius(kappa: f64) -> f64 {
    let k = kappa.powf(0.4);
    3.0 / (2.0 * PI).sqrt() / k * (k - 1.0).sqrt()
}

/// `−∂_y P` at the boundary, `ρ(R) m(R)/R²`; strictly positive for a valid star.
pub fn taylor_sign_margin(profile: &StarProfile) -> Result<f64> {
    let n = profile.nodes().len() - 1;
    let margin = profile.rho()[n] * profile.gravity(n);
    if !(margin > 0.0) {
        return Err(Error::InvalidProfile(format!(
            "Taylor sign margin {margin} is not positive"
        )));
    }
    Ok(margin)
}
