use crate::error::{invalid, Error, Result};
use crate::numerics::{ldl_inertia, TridiagonalSymmetric, GAUSS3_POINTS, GAUSS3_WEIGHTS};
use crate::steady_state::StarProfile;

/// The three pieces of the discrete quadratic form, kept apart so the
/// potential can be rescaled independently.
#[derive(Debug, Clone, PartialEq)]
pub struct PencilParts {
    /// Per-cell coefficients `k_c` of `∫ γρ̄^γ y⁴ χ'²  = Σ k_c (χ_{c+1} − χ_c)²`.
    pub kinetic: Vec<f64>,
    /// `∫ (4−3γ) y³ ∂_y(ρ̄^γ) φ_i φ_j`.
    pub potential: TridiagonalSymmetric,
    /// `∫ y⁴ ρ̄ φ_i φ_j`.
    pub mass: TridiagonalSymmetric,
    /// Coefficient `3γR³` of `χ(R)²`.
    pub robin: f64,
    pub nodes: Vec<f64>,
}

impl PencilParts {
    /// P1 finite elements on the profile grid. Element integrals use
    /// three-point Gauss quadrature of the Hermite-interpolated profile.
    pub fn from_profile(profile: &StarProfile) -> Result<Self> {
        let gamma = profile.gamma();
        let y = profile.nodes();
        let n = y.len();
        if n < 3 {
            return Err(Error::InvalidProfile(
                "pencil needs at least two cells".into(),
            ));
        }
        if profile.rho().iter().any(|&r| !(r > 0.0)) {
            return Err(Error::InvalidProfile(
                "pencil needs strictly positive density".into(),
            ));
        }
        let mut kinetic = vec![0.0; n - 1];
        let mut vd = vec![0.0; n];
        let mut vo = vec![0.0; n - 1];
        let mut md = vec![0.0; n];
        let mut mo = vec![0.0; n - 1];
        for c in 0..n - 1 {
            let (a, b) = (y[c], y[c + 1]);
            let h = b - a;
            let mut k = 0.0;
            let mut v = [0.0; 3];
            let mut m = [0.0; 3];
            for (&t, &w) in GAUSS3_POINTS.iter().zip(&GAUSS3_WEIGHTS) {
                let s = a + t * h;
                let (rho, mass) = profile.sample_in_cell(c, s);
                let s2 = s * s;
                k += w * gamma * rho.powf(gamma) * s2 * s2 / h;
                // (4−3γ) y³ ∂_y ρ̄^γ with ∂_y ρ̄^γ = −ρ̄ m / y²
                let pot = -(4.0 - 3.0 * gamma) * s * rho * mass;
                let wt = s2 * s2 * rho;
                let basis = [(1.0 - t) * (1.0 - t), (1.0 - t) * t, t * t];
                for q in 0..3 {
                    v[q] += w * h * pot * basis[q];
                    m[q] += w * h * wt * basis[q];
                }
            }
            kinetic[c] = k;
            vd[c] += v[0];
            vo[c] += v[1];
            vd[c + 1] += v[2];
            md[c] += m[0];
            mo[c] += m[1];
            md[c + 1] += m[2];
        }
        Ok(Self {
            kinetic,
            potential: TridiagonalSymmetric::new(vd, vo)?,
            mass: TridiagonalSymmetric::new(md, mo)?,
            robin: 3.0 * gamma * y[n - 1].powi(3),
            nodes: y.to_vec(),
        })
    }

    /// Combine into a pencil with the potential block multiplied by `potential_scale`.
    pub fn combine(&self, potential_scale: f64) -> Result<AssembledPencil> {
        AssembledPencil::from_parts(
            self.kinetic.clone(),
            self.potential.scaled(potential_scale),
            self.robin,
            self.mass.clone(),
            self.nodes.clone(),
        )
    }
}

/// Discrete Sturm-Liouville pencil `A χ = μ M χ`.
///
/// `A` is kept as a difference part `Σ k_c (χ_{c+1} − χ_c)²`, a tridiagonal
/// potential and a boundary term, so that forms and products on smooth vectors
/// do not cancel catastrophically. The assembled matrix is used for inertia counts.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledPencil {
    kinetic: Vec<f64>,
    potential: TridiagonalSymmetric,
    robin: f64,
    stiffness: TridiagonalSymmetric,
    mass: TridiagonalSymmetric,
    nodes: Vec<f64>,
    clamped_center: bool,
}

impl AssembledPencil {
    /// General pencil from explicit matrices. Checks that `mass` is positive definite.
    pub fn new(
        stiffness: TridiagonalSymmetric,
        mass: TridiagonalSymmetric,
        nodes: Vec<f64>,
    ) -> Result<Self> {
        let cells = stiffness.len().saturating_sub(1);
        Self::from_parts(vec![0.0; cells], stiffness, 0.0, mass, nodes)
    }

    fn from_parts(
        kinetic: Vec<f64>,
        potential: TridiagonalSymmetric,
        robin: f64,
        mass: TridiagonalSymmetric,
        nodes: Vec<f64>,
    ) -> Result<Self> {
        let n = mass.len();
        for len in [potential.len(), nodes.len(), kinetic.len() + 1] {
            if len != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: len,
                });
            }
        }
        if !matches!(ldl_inertia(&mass), Ok((_, 0))) {
            return Err(Error::InvalidProfile(
                "mass matrix is not positive definite".into(),
            ));
        }
        let mut diag = potential.diag().to_vec();
        let mut off = potential.off().to_vec();
        for (c, k) in kinetic.iter().enumerate() {
            diag[c] += k;
            diag[c + 1] += k;
            off[c] -= k;
        }
        diag[n - 1] += robin;
        let stiffness = TridiagonalSymmetric::new(diag, off)?;
        Ok(Self {
            kinetic,
            potential,
            robin,
            stiffness,
            mass,
            nodes,
            clamped_center: false,
        })
    }

    /// Assembled stiffness matrix `A`.
    pub fn stiffness(&self) -> &TridiagonalSymmetric {
        &self.stiffness
    }

    pub fn mass(&self) -> &TridiagonalSymmetric {
        &self.mass
    }

    /// Radii of the unknowns (without the center when clamped).
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn is_clamped(&self) -> bool {
        self.clamped_center
    }

    /// `A x`, evaluated in difference form.
    pub fn apply_stiffness(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.potential.mul_vec(x);
        for (c, k) in self.kinetic.iter().enumerate() {
            let flux = k * (x[c + 1] - x[c]);
            out[c] -= flux;
            out[c + 1] += flux;
        }
        let n = x.len() - 1;
        out[n] += self.robin * x[n];
        out
    }

    /// `xᵀ A x`, evaluated in difference form.
    pub fn stiffness_form(&self, x: &[f64]) -> f64 {
        let kin: f64 = self
            .kinetic
            .iter()
            .enumerate()
            .map(|(c, k)| k * (x[c + 1] - x[c]).powi(2))
            .sum();
        let n = x.len() - 1;
        kin + self.potential.quadratic_form(x) + self.robin * x[n] * x[n]
    }

    /// The same pencil with `χ(0) = 0` imposed by dropping the center unknown.
    pub fn clamp_center(&self) -> Result<Self> {
        if self.clamped_center {
            return Ok(self.clone());
        }
        let drop = |t: &TridiagonalSymmetric| {
            TridiagonalSymmetric::new(t.diag()[1..].to_vec(), t.off()[1..].to_vec())
        };
        // the first cell's difference term becomes k₀ χ₁²
        let mut potential = drop(&self.potential)?;
        let mut diag = potential.diag().to_vec();
        diag[0] += self.kinetic[0];
        potential = TridiagonalSymmetric::new(diag, potential.off().to_vec())?;
        let mut out = Self::from_parts(
            self.kinetic[1..].to_vec(),
            potential,
            self.robin,
            drop(&self.mass)?,
            self.nodes[1..].to_vec(),
        )?;
        out.clamped_center = true;
        Ok(out)
    }

    /// `(χᵀAχ)/(χᵀMχ)`.
    pub fn rayleigh_quotient(&self, chi: &[f64]) -> Result<f64> {
        if chi.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: chi.len(),
            });
        }
        let den = self.mass.quadratic_form(chi);
        if !(den > f64::MIN_POSITIVE && den.is_finite()) {
            return Err(invalid("trial function has vanishing weighted norm"));
        }
        Ok(self.stiffness_form(chi) / den)
    }
}

/// Finite-element pencil of the radial Sturm-Liouville problem with the Robin
/// boundary term, built from an equilibrium profile.
pub fn assemble(profile: &StarProfile) -> Result<AssembledPencil> {
    PencilParts::from_profile(profile)?.combine(1.0)
}

/// Rayleigh quotient of a trial function given on the profile grid.
pub fn rayleigh_quotient(pencil: &AssembledPencil, chi: &[f64]) -> Result<f64> {
    pencil.rayleigh_quotient(chi)
}
