use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::io::{fmt_f64, Table};
use crate::numerics::{hermite, RadialGrid, Spacing};

use super::EquationOfState;

/// Relative tolerance on the boundary density of a solved profile.
pub const BOUNDARY_TOL: f64 = 1e-8;

/// A spherically symmetric hydrostatic equilibrium sampled on a radial grid.
///
/// `mass[i]` is the enclosed mass `4π ∫₀^{y_i} s² ρ ds`.
#[derive(Debug, Clone, PartialEq)]
pub struct StarProfile {
    eos: EquationOfState,
    kappa: f64,
    boundary_density: f64,
    grid: RadialGrid,
    rho: Vec<f64>,
    mass: Vec<f64>,
}

impl StarProfile {
    /// Assemble a profile from samples, checking the structural invariants.
    /// The samples need not be an equilibrium (synthetic test profiles are allowed).
    pub fn from_samples(
        gamma: f64,
        kappa: f64,
        boundary_density: f64,
        grid: RadialGrid,
        rho: Vec<f64>,
        mass: Vec<f64>,
    ) -> Result<Self> {
        let eos = EquationOfState::new(gamma)?;
        for (name, v) in [("rho", &rho), ("mass", &mass)] {
            if v.len() != grid.len() {
                return Err(Error::LengthMismatch {
                    expected: grid.len(),
                    actual: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidProfile(format!("non-finite {name} sample")));
            }
        }
        if rho.iter().any(|&r| r < 0.0) {
            return Err(Error::InvalidProfile("negative density".into()));
        }
        if mass[0] != 0.0 {
            return Err(Error::InvalidProfile(
                "enclosed mass must vanish at the center".into(),
            ));
        }
        if mass.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidProfile(
                "enclosed mass must be nondecreasing".into(),
            ));
        }
        Ok(Self {
            eos,
            kappa,
            boundary_density,
            grid,
            rho,
            mass,
        })
    }

    /// Check the equilibrium invariants: strictly decreasing density from
    /// `kappa` at the center to the boundary density.
    pub fn validate_equilibrium(&self) -> Result<()> {
        if self.rho.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::InvalidProfile(
                "density must decrease strictly outward".into(),
            ));
        }
        if (self.rho[0] - self.kappa).abs() > 1e-12 * self.kappa {
            return Err(Error::InvalidProfile(
                "central density differs from kappa".into(),
            ));
        }
        let edge = *self.rho.last().unwrap();
        if (edge - self.boundary_density).abs() > BOUNDARY_TOL * self.boundary_density.max(1.0) {
            return Err(Error::InvalidProfile(format!(
                "boundary density {edge} differs from {}",
                self.boundary_density
            )));
        }
        Ok(())
    }

    pub fn eos(&self) -> EquationOfState {
        self.eos
    }

    pub fn gamma(&self) -> f64 {
        self.eos.gamma()
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn boundary_density(&self) -> f64 {
        self.boundary_density
    }

    pub fn radius(&self) -> f64 {
        self.grid.radius()
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn total_mass(&self) -> f64 {
        *self.mass.last().unwrap()
    }

    /// `m(y)/y²` at node `i`, i.e. `−(1/ρ) ∂_y ρ^γ` in equilibrium; zero at the center.
    pub fn gravity(&self, i: usize) -> f64 {
        let y = self.grid.nodes()[i];
        if y == 0.0 {
            0.0
        } else {
            self.mass[i] / (y * y)
        }
    }

    /// `∂_y ρ^γ = −ρ m / y²` from hydrostatic balance (no differencing).
    pub fn pressure_gradient(&self, i: usize) -> f64 {
        -self.rho[i] * self.gravity(i)
    }

    fn derivatives(&self, y: f64, rho: f64, mass: f64) -> (f64, f64) {
        let drho = if y == 0.0 || rho == 0.0 {
            0.0
        } else {
            -rho * mass / (y * y * self.eos.sound_speed_sq(rho))
        };
        (drho, 4.0 * PI * y * y * rho)
    }

    /// Density and enclosed mass at an arbitrary radius, by cubic Hermite
    /// interpolation with the equilibrium slopes `ρ' = −ρm/(y²c_s²)`, `m' = 4πy²ρ`.
    pub fn sample(&self, y: f64) -> (f64, f64) {
        self.sample_in_cell(self.grid.locate(y), y)
    }

    /// [`sample`](Self::sample) with the cell already known.
    pub fn sample_in_cell(&self, cell: usize, y: f64) -> (f64, f64) {
        let i = cell;
        let x = self.grid.nodes();
        let (d0, m0) = self.derivatives(x[i], self.rho[i], self.mass[i]);
        let (d1, m1) = self.derivatives(x[i + 1], self.rho[i + 1], self.mass[i + 1]);
        let rho = hermite(x[i], x[i + 1], self.rho[i], self.rho[i + 1], d0, d1, y);
        let mass = hermite(x[i], x[i + 1], self.mass[i], self.mass[i + 1], m0, m1, y);
        (rho.max(0.0), mass)
    }

    /// Max-norm of the discrete hydrostatic residual `m/y² + (1/ρ) ∂_y ρ^γ`,
    /// with the pressure derivative taken by centered differences.
    pub fn hydrostatic_residual(&self) -> f64 {
        let y = self.grid.nodes();
        let p: Vec<f64> = self.rho.iter().map(|r| r.powf(self.gamma())).collect();
        (1..y.len() - 1)
            .map(|i| {
                let dp = (p[i + 1] - p[i - 1]) / (y[i + 1] - y[i - 1]);
                (self.gravity(i) + dp / self.rho[i]).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["y", "rho", "mass"])
            .comment("gamma", fmt_f64(self.gamma()))
            .comment("kappa", fmt_f64(self.kappa))
            .comment("R", fmt_f64(self.radius()))
            .comment("boundary_density", fmt_f64(self.boundary_density))
            .comment("spacing", spacing_label(self.grid.spacing()));
        for ((y, r), m) in self.grid.nodes().iter().zip(&self.rho).zip(&self.mass) {
            t.push_row(vec![*y, *r, *m]);
        }
        t
    }

    pub fn to_csv(&self) -> String {
        self.to_table().to_csv()
    }

    pub fn from_table(t: &Table) -> Result<Self> {
        let gamma = t.get_f64("gamma")?;
        let kappa = t.get_f64("kappa")?;
        let boundary = t.get_f64("boundary_density").unwrap_or(1.0);
        let spacing = t
            .comment_map()
            .get("spacing")
            .map(|s| parse_spacing(s))
            .transpose()?
            .unwrap_or(Spacing::Uniform);
        let grid = RadialGrid::from_nodes(t.column("y")?, spacing)
            .map_err(|e| Error::Parse(format!("profile grid: {e}")))?;
        let radius = t.get_f64("R")?;
        if radius != grid.radius() {
            return Err(Error::Parse(format!(
                "R={radius} does not match last node {}",
                grid.radius()
            )));
        }
        Self::from_samples(
            gamma,
            kappa,
            boundary,
            grid,
            t.column("rho")?,
            t.column("mass")?,
        )
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        Self::from_table(&Table::parse(text)?)
    }
}

fn spacing_label(s: Spacing) -> String {
    match s {
        Spacing::Uniform => "uniform".into(),
        Spacing::Geometric { ratio } => format!("geometric:{}", fmt_f64(ratio)),
    }
}

fn parse_spacing(s: &str) -> Result<Spacing> {
    if s == "uniform" {
        return Ok(Spacing::Uniform);
    }
    match s.strip_prefix("geometric:") {
        Some(r) => Ok(Spacing::Geometric {
            ratio: crate::io::parse_f64(r)?,
        }),
        None => Err(Error::Parse(format!("unknown spacing `{s}`"))),
    }
}
