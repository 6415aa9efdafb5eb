use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::io::{fmt_f64, parse_f64};
use crate::numerics::Spacing;
use crate::spectral::{assemble, lowest_eigenpair, EigenOptions};
use crate::steady_state::{solve_liquid_star_with, taylor_sign_margin, SolverOptions, StarProfile};

use super::compute_c1;

/// Outcome of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub enum RecordStatus {
    Unstable,
    Stable,
    Failed(String),
}

impl RecordStatus {
    fn label(&self) -> String {
        match self {
            RecordStatus::Unstable => "unstable".into(),
            RecordStatus::Stable => "stable".into(),
            RecordStatus::Failed(msg) => format!("failed: {}", msg.replace([',', '\n'], ";")),
        }
    }

    fn parse(s: &str) -> Self {
        match s {
            "unstable" => RecordStatus::Unstable,
            "stable" => RecordStatus::Stable,
            other => {
                RecordStatus::Failed(other.strip_prefix("failed: ").unwrap_or(other).to_string())
            }
        }
    }
}

/// Per-`κ` summary of an equilibrium and its lowest mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRecord {
    pub kappa: f64,
    pub radius: f64,
    pub mu_star: f64,
    pub mu0: Option<f64>,
    /// `max_y m(y)/y²`.
    pub c1: f64,
    /// Radius where `c1` is attained.
    pub c1_radius: f64,
    /// Rayleigh quotient of `χ = 1`, i.e. `form_l11 / weight_11`.
    pub q_const: f64,
    /// `⟨L1, 1⟩`.
    pub form_l11: f64,
    /// `⟨1, y⁴ρ̄ 1⟩`.
    pub weight_11: f64,
    pub taylor_margin: f64,
    pub residual: f64,
    pub sign_changes: usize,
    pub status: RecordStatus,
}

impl ScalingRecord {
    fn failed(kappa: f64, err: &Error) -> Self {
        Self {
            kappa,
            radius: f64::NAN,
            mu_star: f64::NAN,
            mu0: None,
            c1: f64::NAN,
            c1_radius: f64::NAN,
            q_const: f64::NAN,
            form_l11: f64::NAN,
            weight_11: f64::NAN,
            taylor_margin: f64::NAN,
            residual: f64::NAN,
            sign_changes: 0,
            status: RecordStatus::Failed(err.to_string()),
        }
    }

    pub fn is_unstable(&self) -> bool {
        self.status == RecordStatus::Unstable
    }
}

/// Grid and solver settings of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Fixed cell count; `None` uses [`default_cells`].
    pub cells: Option<usize>,
    pub spacing: Spacing,
    pub eigen: EigenOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            cells: None,
            spacing: Spacing::Uniform,
            eigen: EigenOptions::default(),
        }
    }
}

/// `2048 · ⌈log₁₀ κ⌉` cells, enough to resolve the core of width `κ^{−(1−γ/2)}`.
pub fn default_cells(kappa: f64) -> usize {
    2048 * (kappa.log10().ceil().max(1.0) as usize)
}

/// `per_decade` geometrically spaced values from `lo` to `hi` inclusive.
pub fn geometric_kappas(lo: f64, hi: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(lo > 1.0 && hi >= lo && hi.is_finite()) || per_decade == 0 {
        return Err(invalid(format!(
            "bad kappa range [{lo}, {hi}] with {per_decade} per decade"
        )));
    }
    let steps = ((hi / lo).log10() * per_decade as f64).round() as usize;
    if steps == 0 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.log10(), hi.log10());
    Ok((0..=steps)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / steps as f64))
        .collect())
}

/// Solve, assemble and diagonalize one star.
pub fn scaling_record(profile: &StarProfile, eigen: &EigenOptions) -> Result<ScalingRecord> {
    let pencil = assemble(profile)?;
    let mode = lowest_eigenpair(&pencil, eigen)?;
    let ones = vec![1.0; pencil.len()];
    let form_l11 = pencil.stiffness_form(&ones);
    let weight_11 = pencil.mass().quadratic_form(&ones);
    let (c1, c1_radius) = compute_c1(profile);
    Ok(ScalingRecord {
        kappa: profile.kappa(),
        radius: profile.radius(),
        mu_star: mode.mu_star,
        mu0: mode.mu0,
        c1,
        c1_radius,
        q_const: form_l11 / weight_11,
        form_l11,
        weight_11,
        taylor_margin: taylor_sign_margin(profile)?,
        residual: mode.residual,
        sign_changes: mode.sign_changes,
        status: if mode.mu0.is_some() {
            RecordStatus::Unstable
        } else {
            RecordStatus::Stable
        },
    })
}

/// One record per `κ`, computed in parallel on the current rayon pool and
/// returned in ascending `κ`. Failures are recorded, not propagated.
pub fn sweep(gamma: f64, kappas: &[f64], opts: &SweepOptions) -> Result<Vec<ScalingRecord>> {
    if kappas.is_empty() {
        return Err(invalid("sweep needs at least one kappa"));
    }
    if let Some(bad) = kappas.iter().find(|k| !(**k > 1.0 && k.is_finite())) {
        return Err(invalid(format!("sweep needs kappa > 1, got {bad}")));
    }
    crate::steady_state::EquationOfState::new(gamma)?;
    let mut sorted = kappas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let solver = SolverOptions {
        spacing: opts.spacing,
        ..SolverOptions::default()
    };
    let records = sorted
        .par_iter()
        .map(|&kappa| {
            let n = opts.cells.unwrap_or_else(|| default_cells(kappa));
            solve_liquid_star_with(gamma, kappa, n, &solver)
                .and_then(|p| scaling_record(&p, &opts.eigen))
                .unwrap_or_else(|e| ScalingRecord::failed(kappa, &e))
        })
        .collect();
    Ok(records)
}

pub const SWEEP_COLUMNS: [&str; 9] = [
    "kappa",
    "R",
    "mu_star",
    "mu0",
    "C1",
    "q_const",
    "form_L11",
    "weight_11",
    "status",
];

/// Sweep table with `# key=value` preamble lines.
pub fn records_to_csv(comments: &[(String, String)], records: &[ScalingRecord]) -> String {
    let mut out = String::new();
    for (k, v) in comments {
        let _ = writeln!(out, "# {k}={v}");
    }
    let _ = writeln!(out, "{}", SWEEP_COLUMNS.join(","));
    for r in records {
        let nums = [
            r.kappa,
            r.radius,
            r.mu_star,
            r.mu0.unwrap_or(f64::NAN),
            r.c1,
            r.q_const,
            r.form_l11,
            r.weight_11,
        ];
        let fields: Vec<String> = nums.iter().map(|v| fmt_f64(*v)).collect();
        let _ = writeln!(out, "{},{}", fields.join(","), r.status.label());
    }
    out
}

/// Inverse of [`records_to_csv`] for the stored columns; diagnostics that are not
/// written (C1 radius, margins, residuals) come back as NaN.
pub fn records_from_csv(text: &str) -> Result<Vec<ScalingRecord>> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("no header row".into()))?;
    if header.split(',').map(str::trim).ne(SWEEP_COLUMNS) {
        return Err(Error::Parse(format!("unexpected sweep header `{header}`")));
    }
    lines
        .map(|line| {
            let fields: Vec<&str> = line.splitn(9, ',').collect();
            if fields.len() != 9 {
                return Err(Error::Parse(format!("sweep row needs 9 fields: `{line}`")));
            }
            let v: Vec<f64> = fields[..8]
                .iter()
                .map(|f| parse_f64(f.trim()))
                .collect::<Result<_>>()?;
            Ok(ScalingRecord {
                kappa: v[0],
                radius: v[1],
                mu_star: v[2],
                mu0: (!v[3].is_nan()).then_some(v[3]),
                c1: v[4],
                c1_radius: f64::NAN,
                q_const: v[5],
                form_l11: v[6],
                weight_11: v[7],
                taylor_margin: f64::NAN,
                residual: f64::NAN,
                sign_changes: 0,
                status: RecordStatus::parse(fields[8].trim()),
            })
        })
        .collect()
}
