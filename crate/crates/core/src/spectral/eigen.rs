use crate::error::{Error, Result};
use crate::io::{fmt_f64, parse_f64, Table};
use crate::numerics::{ldl_inertia, pencil_count_below};
use crate::steady_state::StarProfile;

use super::{assemble, AssembledPencil};

/// Tolerances of the lowest-eigenpair search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Relative width `(hi − lo)/max(1, |μ|)` at which bisection stops.
    pub bracket_tol: f64,
    /// Target for [`ModeResult::residual`].
    pub residual_tol: f64,
    /// Geometric expansions of the initial bracket before giving up.
    pub max_expansions: usize,
    /// Inverse-iteration sweeps after bisection.
    pub max_polish: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            bracket_tol: 1e-10,
            residual_tol: 1e-8,
            max_expansions: 200,
            max_polish: 8,
        }
    }
}

/// Lowest eigenpair of the pencil. `μ* < 0` means the star is linearly unstable
/// with growth rate `√(−μ*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeResult {
    /// Radii of the eigenfunction samples (always the full profile grid).
    pub nodes: Vec<f64>,
    pub mu_star: f64,
    pub mu0: Option<f64>,
    pub growth_rate: Option<f64>,
    /// Eigenfunction with `χᵀMχ = 1` and `χ(R) ≥ 0`.
    pub chi: Vec<f64>,
    /// `‖Aχ − μ*Mχ‖ / (max(1, |μ*|) ‖Mχ‖)`.
    pub residual: f64,
    /// Inertia-certified interval containing `μ*`.
    pub bracket: (f64, f64),
    /// Interior sign changes of `χ`; zero for a nodeless ground state.
    pub sign_changes: usize,
}

impl ModeResult {
    pub fn is_unstable(&self) -> bool {
        self.mu0.is_some()
    }

    /// `(3χ(R) + R χ'(R)) / max|χ|` with a one-sided derivative; the discrete
    /// Robin condition holds when this tends to zero under refinement.
    pub fn robin_defect(&self) -> f64 {
        let n = self.chi.len() - 1;
        let radius = self.nodes[n];
        let slope = (self.chi[n] - self.chi[n - 1]) / (radius - self.nodes[n - 1]);
        let scale = self.chi.iter().fold(0.0, |a: f64, c| a.max(c.abs()));
        (3.0 * self.chi[n] + radius * slope) / scale
    }

    pub fn to_table(&self) -> Table {
        let growth = self
            .growth_rate
            .map(fmt_f64)
            .unwrap_or_else(|| "none".into());
        let mut t = Table::new(&["y", "chi"])
            .comment("mu_star", fmt_f64(self.mu_star))
            .comment("growth_rate", growth)
            .comment("residual", fmt_f64(self.residual))
            .comment("bracket_lo", fmt_f64(self.bracket.0))
            .comment("bracket_hi", fmt_f64(self.bracket.1));
        for (y, c) in self.nodes.iter().zip(&self.chi) {
            t.push_row(vec![*y, *c]);
        }
        t
    }

    pub fn to_csv(&self) -> String {
        self.to_table().to_csv()
    }

    pub fn from_table(t: &Table) -> Result<Self> {
        let mu_star = t.get_f64("mu_star")?;
        let growth_rate = match t.comment_map().get("growth_rate") {
            None | Some(&"none") => None,
            Some(s) => Some(parse_f64(s)?),
        };
        let nodes = t.column("y")?;
        let chi = t.column("chi")?;
        let bracket = (
            t.get_f64("bracket_lo").unwrap_or(mu_star),
            t.get_f64("bracket_hi").unwrap_or(mu_star),
        );
        Ok(Self {
            mu0: growth_rate.map(|g| g * g),
            sign_changes: sign_changes(&chi),
            residual: t.get_f64("residual")?,
            nodes,
            mu_star,
            growth_rate,
            chi,
            bracket,
        })
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        Self::from_table(&Table::parse(text)?)
    }
}

/// Strict sign changes between nonnegligible samples.
pub fn sign_changes(v: &[f64]) -> usize {
    let floor = 1e-12 * v.iter().fold(0.0, |a: f64, c| a.max(c.abs()));
    let mut last = 0.0f64;
    let mut count = 0;
    for &x in v {
        if x.abs() <= floor {
            continue;
        }
        if last != 0.0 && x.signum() != last.signum() {
            count += 1;
        }
        last = x;
    }
    count
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Interval `[lo, hi]` with no eigenvalue below `lo` and at least `k` below `hi`.
fn initial_bracket(pencil: &AssembledPencil, k: usize, opts: &EigenOptions) -> Result<(f64, f64)> {
    let (a, m) = (pencil.stiffness(), pencil.mass());
    let ones = vec![1.0; pencil.len()];
    let q = pencil.rayleigh_quotient(&ones)?;
    let mut width = q.abs().max(1.0);
    let mut hi = q;
    let mut expansions = 0;
    while pencil_count_below(a, m, hi) < k {
        hi = q + width;
        width *= 2.0;
        expansions += 1;
        if expansions > opts.max_expansions || !hi.is_finite() {
            return Err(Error::NonConvergence(format!(
                "no upper bracket for eigenvalue {k}"
            )));
        }
    }
    let mut width = q.abs().max(1.0);
    let mut lo = hi - width;
    expansions = 0;
    while pencil_count_below(a, m, lo) > 0 {
        width *= 2.0;
        lo = hi - width;
        expansions += 1;
        if expansions > opts.max_expansions || !lo.is_finite() {
            return Err(Error::NonConvergence(
                "no lower bracket for the lowest eigenvalue".into(),
            ));
        }
    }
    Ok((lo, hi))
}

/// Shrink `[lo, hi]` around the `k`-th eigenvalue (1-based) by inertia bisection.
fn bisect_eigenvalue(
    pencil: &AssembledPencil,
    k: usize,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> (f64, f64) {
    let (a, m) = (pencil.stiffness(), pencil.mass());
    while hi - lo > tol * lo.abs().max(hi.abs()).max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pencil_count_below(a, m, mid) >= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

/// Lowest generalized eigenpair of `A χ = μ M χ` by inertia bisection followed
/// by inverse iteration at the lower end of the converged bracket.
pub fn lowest_eigenpair(pencil: &AssembledPencil, opts: &EigenOptions) -> Result<ModeResult> {
    let (lo, hi) = initial_bracket(pencil, 1, opts)?;
    let (lo, hi) = bisect_eigenvalue(pencil, 1, lo, hi, opts.bracket_tol);
    let (a, m) = (pencil.stiffness(), pencil.mass());
    let mut shift = lo;
    let factor = loop {
        match ldl_inertia(&a.shifted(shift, m)) {
            Ok((f, _)) => break f,
            Err(_) => shift -= (hi - lo).max(f64::EPSILON * shift.abs().max(1.0)),
        }
    };
    let n = pencil.len();
    let mut chi = vec![1.0; n];
    let shifted = |x: &[f64], sigma: f64| -> Vec<f64> {
        let mx = m.mul_vec(x);
        pencil
            .apply_stiffness(x)
            .iter()
            .zip(&mx)
            .map(|(a, b)| a - sigma * b)
            .collect()
    };
    let normalize = |v: &[f64]| -> Result<Vec<f64>> {
        let scale = m.quadratic_form(v).sqrt();
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::NonConvergence("inverse iteration collapsed".into()));
        }
        Ok(v.iter().map(|x| x / scale).collect())
    };
    for _ in 0..2 {
        let rhs = m.mul_vec(&chi);
        let mut next = factor.solve(&rhs);
        let r: Vec<f64> = rhs
            .iter()
            .zip(shifted(&next, shift))
            .map(|(b, ax)| b - ax)
            .collect();
        next.iter_mut()
            .zip(factor.solve(&r))
            .for_each(|(x, d)| *x += d);
        chi = normalize(&next)?;
    }
    // The factor at `shift` is nearly singular, so residual corrections use a
    // definite shift one eigenvalue-scale further down.
    let mut mu = pencil.stiffness_form(&chi);
    let low = mu - mu.abs().max(1.0);
    let (definite, _) = ldl_inertia(&a.shifted(low, m))?;
    let residual_of =
        |x: &[f64], mu: f64| norm(&shifted(x, mu)) / (mu.abs().max(1.0) * norm(&m.mul_vec(x)));
    let mut residual = residual_of(&chi, mu);
    for _ in 0..opts.max_polish {
        if residual <= 1e-2 * opts.residual_tol {
            break;
        }
        let d = definite.solve(&shifted(&chi, mu));
        let next = normalize(&chi.iter().zip(&d).map(|(x, d)| x - d).collect::<Vec<_>>())?;
        let next_mu = pencil.stiffness_form(&next);
        let next_res = residual_of(&next, next_mu);
        if !(next_res < residual) {
            break;
        }
        (chi, mu, residual) = (next, next_mu, next_res);
    }
    if !mu.is_finite() {
        return Err(Error::NonConvergence("non-finite Rayleigh quotient".into()));
    }
    let anchor = if chi[n - 1] != 0.0 {
        chi[n - 1]
    } else {
        *chi.iter()
            .max_by(|x, y| x.abs().total_cmp(&y.abs()))
            .unwrap()
    };
    if anchor < 0.0 {
        chi.iter_mut().for_each(|c| *c = -*c);
    }
    let mut nodes = pencil.nodes().to_vec();
    if pencil.is_clamped() {
        chi.insert(0, 0.0);
        nodes.insert(0, 0.0);
    }
    let mu0 = (mu < 0.0).then_some(-mu);
    Ok(ModeResult {
        sign_changes: sign_changes(&chi),
        growth_rate: mu0.map(f64::sqrt),
        nodes,
        mu_star: mu,
        mu0,
        chi,
        residual,
        bracket: (lo, hi),
    })
}

/// The `k` lowest eigenvalues, each to the bracket tolerance.
pub fn lowest_eigenvalues(
    pencil: &AssembledPencil,
    k: usize,
    opts: &EigenOptions,
) -> Result<Vec<f64>> {
    if k == 0 {
        return Ok(Vec::new());
    }
    let (lo, hi) = initial_bracket(pencil, k.min(pencil.len()), opts)?;
    Ok((1..=k.min(pencil.len()))
        .map(|j| {
            let (l, h) = bisect_eigenvalue(pencil, j, lo, hi, opts.bracket_tol);
            0.5 * (l + h)
        })
        .collect())
}

/// Assemble the pencil of `profile` and return its lowest eigenpair.
pub fn growth_rate_of(profile: &StarProfile) -> Result<ModeResult> {
    growth_rate_of_with(profile, &EigenOptions::default())
}

pub fn growth_rate_of_with(profile: &StarProfile, opts: &EigenOptions) -> Result<ModeResult> {
    lowest_eigenpair(&assemble(profile)?, opts)
}
