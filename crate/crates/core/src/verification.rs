//! The acceptance suite: twelve criteria covering the closed-form equilibrium,
//! the eigenproblem, the scaling regimes and the time evolution.
//!
//! [`run_all`] is shared by the `acceptance` integration test (full scale) and
//! the `verify` subcommand (full or reduced scale).

use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{
    discrete_equilibrium, escape_experiment, evolve, evolve_linearized, fit_growth_rate,
    init_equilibrium, linear_step_limit, nonlinear_correction, nonlinear_growth_rate,
    norm_per_amplitude, seed_mode_on, sound_crossing_time, EvolveOptions, LinearState,
};
use crate::error::{invalid, Result};
use crate::scaling::{
    case1_form_asymptotics, default_cells, geometric_kappas, sweep, verify_regime, RegimeOptions,
    RegimeVerdict, ScalingRecord, SweepOptions,
};
use crate::spectral::{
    assemble, exponent_window, growth_rate_of, lowest_eigenpair, power_law_trial_quotient,
    EigenOptions, ModeResult,
};
use crate::steady_state::{six_fifths_density, six_fifths_radius, solve_liquid_star, StarProfile};

/// Problem sizes of the suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// The sizes named by the criteria.
    Full,
    /// Half the sweep density and cell counts, for quick checks.
    Reduced,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub scale: Scale,
    /// Multiplies every tolerance; 1 gives the stated tolerances.
    pub tolerance_scale: f64,
    /// Criteria to run; empty runs all of them.
    pub only: Vec<u8>,
    /// Enforce the runtime budgets (full scale only).
    pub enforce_budgets: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            scale: Scale::Full,
            tolerance_scale: 1.0,
            only: Vec::new(),
            enforce_budgets: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget_seconds: f64,
}

impl CriterionResult {
    /// One line: `PASS  7 equilibrium preservation (0.4 s of 30 s): ...`.
    pub fn line(&self) -> String {
        let budget = if self.budget_seconds > 0.0 {
            format!(" of {} s", self.budget_seconds)
        } else {
            String::new()
        };
        format!(
            "{} {:>2} {} ({:.1} s{budget}): {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

pub const CRITERIA: [(u8, &str, f64); 12] = [
    (1, "six-fifths closed form", 5.0),
    (2, "variational bound and eigen-residual", 10.0),
    (3, "stability transition in kappa", 10.0),
    (4, "case 1 scaling", 180.0),
    (5, "case 2 scaling", 180.0),
    (6, "case 3 scaling", 240.0),
    (7, "equilibrium preservation", 30.0),
    (8, "linear growth rate", 60.0),
    (9, "escape-time law", 300.0),
    (10, "quadratic nonlinear correction", 120.0),
    (11, "energy conservation", 30.0),
    (12, "taylor sign", 0.0),
];

/// Headline star of the dynamics criteria.
const DYN_GAMMA: f64 = 1.2;
const DYN_KAPPA: f64 = 1e3;
const THETA0: f64 = 1e-2;

struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Result<Check> {
    Ok(Check { pass, detail })
}

struct Suite {
    opts: VerifyOptions,
    sweeps: Vec<(f64, Vec<ScalingRecord>)>,
}

impl Suite {
    fn tol(&self, t: f64) -> f64 {
        t * self.opts.tolerance_scale
    }

    fn reduced(&self) -> bool {
        self.opts.scale == Scale::Reduced
    }

    fn dyn_cells(&self) -> usize {
        if self.reduced() {
            400
        } else {
            800
        }
    }

    fn sweep_for(&mut self, gamma: f64) -> Result<Vec<ScalingRecord>> {
        let per_decade = if self.reduced() { 4 } else { 8 };
        let kappas = geometric_kappas(1e2, 1e5, per_decade)?;
        let records = if self.reduced() {
            let parts = kappas
                .par_iter()
                .map(|&k| {
                    let opts = SweepOptions {
                        cells: Some(default_cells(k) / 2),
                        ..SweepOptions::default()
                    };
                    sweep(gamma, &[k], &opts)
                })
                .collect::<Result<Vec<_>>>()?;
            parts.into_iter().flatten().collect()
        } else {
            sweep(gamma, &kappas, &SweepOptions::default())?
        };
        self.sweeps.push((gamma, records.clone()));
        Ok(records)
    }

    fn regime_options(&self) -> RegimeOptions {
        let d = RegimeOptions::default();
        RegimeOptions {
            slope_tol: self.tol(d.slope_tol),
            case3_margin: d.case3_margin,
            case2_spread: self.tol(d.case2_spread),
            maximizer_tol: self.tol(d.maximizer_tol),
        }
    }

    fn run(&mut self, id: u8) -> Result<Check> {
        match id {
            1 => self.six_fifths_oracle(),
            2 => self.variational_bound(),
            3 => self.stability_transition(),
            4 => self.case_one(),
            5 => self.case_two(),
            6 => self.case_three(),
            7 => self.equilibrium_preservation(),
            8 => self.linear_growth(),
            9 => self.escape_law(),
            10 => self.quadratic_correction(),
            11 => self.energy_conservation(),
            12 => self.taylor_sign(),
            _ => Err(invalid(format!("no criterion {id}"))),
        }
    }

    fn six_fifths_oracle(&mut self) -> Result<Check> {
        let (mut worst_rho, mut worst_r) = (0.0f64, 0.0f64);
        for kappa in [2.0, 10.0, 100.0, 1e4] {
            let p = solve_liquid_star(1.2, kappa, 2048)?;
            for (y, rho) in p.nodes().iter().zip(p.rho()) {
                worst_rho = worst_rho.max((rho / six_fifths_density(kappa, *y) - 1.0).abs());
            }
            worst_r = worst_r.max((p.radius() / six_fifths_radius(kappa) - 1.0).abs());
        }
        check(
            worst_rho <= self.tol(1e-6) && worst_r <= self.tol(1e-8),
            format!("max density error {worst_rho:.2e}, radius error {worst_r:.2e}"),
        )
    }

    fn variational_bound(&mut self) -> Result<Check> {
        let mut rng = StdRng::seed_from_u64(0x5eed);
        let (mut worst_gap, mut worst_res, mut count) = (f64::NEG_INFINITY, 0.0f64, 0);
        for gamma in [1.1, 1.2, 1.25] {
            for kappa in [2.0, 10.0, 1e2, 1e3, 1e4] {
                let p = solve_liquid_star(gamma, kappa, 2048)?;
                let pencil = assemble(&p)?;
                let mode = lowest_eigenpair(&pencil, &EigenOptions::default())?;
                worst_res = worst_res.max(mode.residual);
                let scale = mode.mu_star.abs().max(1.0);
                let mut probe = |v: &[f64]| -> Result<()> {
                    let q = pencil.rayleigh_quotient(v)?;
                    worst_gap = worst_gap.max((mode.mu_star - q) / scale);
                    Ok(())
                };
                probe(&vec![1.0; pencil.len()])?;
                for _ in 0..100 {
                    let v: Vec<f64> = (0..pencil.len())
                        .map(|_| rng.random_range(-1.0..1.0))
                        .collect();
                    probe(&v)?;
                }
                count += 1;
            }
        }
        check(
            worst_gap <= 1e-12 && worst_res <= self.tol(1e-8),
            format!(
                "{count} pencils, max (mu* - quotient)/max(1,|mu*|) {worst_gap:.2e}, max residual {worst_res:.2e}"
            ),
        )
    }

    fn stability_transition(&mut self) -> Result<Check> {
        let low = growth_rate_of(&solve_liquid_star(1.2, 2.0, 2048)?)?;
        let high = growth_rate_of(&solve_liquid_star(1.2, 1e4, 2048)?)?;
        check(
            low.mu_star > 0.0 && high.mu_star < 0.0,
            format!(
                "mu* = {:.6e} at kappa 2, {:.6e} at kappa 1e4",
                low.mu_star, high.mu_star
            ),
        )
    }

    fn case_one(&mut self) -> Result<Check> {
        let gamma = 1.25;
        let records = self.sweep_for(gamma)?;
        let verdict = verify_regime(gamma, &records, &self.regime_options())?;
        let forms = case1_form_asymptotics(gamma, &records)?;
        let target = 2.5 * gamma - 3.0;
        let form_ok = (forms.form_slope - target).abs() <= self.tol(0.05);
        check(
            regime_pass(&verdict) && form_ok,
            format!(
                "{}; |<L1,1>| top-decade slope {:.4} (target {target})",
                summarize(&verdict),
                forms.form_slope
            ),
        )
    }

    fn case_two(&mut self) -> Result<Check> {
        let records = self.sweep_for(1.2)?;
        let verdict = verify_regime(1.2, &records, &self.regime_options())?;
        check(regime_pass(&verdict), summarize(&verdict))
    }

    fn case_three(&mut self) -> Result<Check> {
        let gamma = 1.1;
        let records = self.sweep_for(gamma)?;
        let verdict = verify_regime(gamma, &records, &self.regime_options())?;
        let window = exponent_window(gamma, 0.0, 0.0)?;
        let expected = (2.0 - 1.0 / 0.9, (6.0f64 - 4.0 / 0.9).sqrt());
        let Some((lo, hi)) = window else {
            return check(false, "exponent window is empty".into());
        };
        let window_ok = (lo - expected.0).abs() < 1e-12 && (hi - expected.1).abs() < 1e-12;
        let a = 0.5 * (lo + hi);
        let mut scaled = Vec::new();
        for kappa in [1e3, 1e4, 1e5] {
            let n = if self.reduced() {
                default_cells(kappa) / 2
            } else {
                default_cells(kappa)
            };
            let p = solve_liquid_star(gamma, kappa, n)?;
            scaled.push(power_law_trial_quotient(&p, 4.0, a)? / kappa.powf(gamma / 2.0));
        }
        let trial_ok =
            scaled.iter().all(|q| *q < 0.0) && scaled.windows(2).all(|w| w[1].abs() > w[0].abs());
        check(
            regime_pass(&verdict) && window_ok && trial_ok,
            format!(
                "{}; window ({lo:.6}, {hi:.6}); trial quotient / kappa^(gamma/2) at a={a:.4}: {}",
                summarize(&verdict),
                scaled
                    .iter()
                    .map(|q| format!("{q:.4e}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        )
    }

    /// Run on the stable `γ = 6/5, κ = 2` star. On an unstable star the
    /// start-up residual is amplified by the growing mode within one crossing.
    fn equilibrium_preservation(&mut self) -> Result<Check> {
        let base = self.dyn_cells();
        let mut rel = Vec::new();
        for n in [base, 2 * base, 4 * base] {
            let p = solve_liquid_star(1.2, 2.0, n)?;
            let t = sound_crossing_time(&p);
            let run = evolve(
                &init_equilibrium(&p),
                &p,
                t,
                t / 20.0,
                &EvolveOptions::default(),
            )?;
            let worst = run
                .diagnostics
                .samples
                .iter()
                .map(|s| s.norm)
                .fold(0.0, f64::max);
            rel.push(worst / p.total_mass());
        }
        let orders: Vec<f64> = rel.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        let order_ok = orders.iter().all(|o| (o - 2.0).abs() <= self.tol(0.3));
        check(
            rel[0] <= self.tol(1e-4) && order_ok,
            format!(
                "max norm / M at N={base}: {:.3e}; orders {}",
                rel[0],
                orders
                    .iter()
                    .map(|o| format!("{o:.3}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        )
    }

    fn headline(&self) -> Result<(StarProfile, ModeResult, f64)> {
        let p = solve_liquid_star(DYN_GAMMA, DYN_KAPPA, self.dyn_cells())?;
        let mode = growth_rate_of(&p)?;
        let rate = mode
            .growth_rate
            .ok_or_else(|| invalid("headline star is not unstable"))?;
        Ok((p, mode, rate))
    }

    fn linear_growth(&mut self) -> Result<Check> {
        let (p, mode, rate) = self.headline()?;
        let delta = 1e-6;
        let ceiling = THETA0 / 10.0;
        let unit = LinearState::from_mode(&mode, 1.0);
        let t_end = 1.2 * (ceiling / delta).ln() / rate;
        let dt = (0.5 * linear_step_limit(&p)?).min(t_end / 400.0);
        let (diag, _) = evolve_linearized(&p, &unit, t_end, dt)?;
        let n0 = diag.samples[0].norm;
        let lin = fit_growth_rate(&diag.samples, 10.0 * n0, ceiling / delta * n0)?;
        let (nonlin, _) =
            nonlinear_growth_rate(&p, &mode, delta, ceiling, &EvolveOptions::default())?;
        let (el, en) = (lin.slope / rate - 1.0, nonlin.slope / rate - 1.0);
        let tol = self.tol(0.02);
        check(
            el.abs() <= tol && en.abs() <= tol,
            format!(
                "sqrt(mu0) {rate:.6}; linearized {:.6} ({el:+.2e}), nonlinear {:.6} ({en:+.2e})",
                lin.slope, nonlin.slope
            ),
        )
    }

    fn escape_law(&mut self) -> Result<Check> {
        let (p, mode, _) = self.headline()?;
        let result = escape_experiment(
            &p,
            &mode,
            &[1e-4, 1e-5, 1e-6],
            &[THETA0, 1e-3, 1e-1],
            &EvolveOptions::default(),
        )?;
        let primary = &result.fits[0];
        let spread = result
            .fits
            .iter()
            .map(|f| format!("{:.2e}", f.relative_error))
            .collect::<Vec<_>>()
            .join("/");
        check(
            primary.relative_error <= self.tol(0.05),
            format!(
                "slope {:.6} vs 1/sqrt(mu0) {:.6} ({:.2e}); theta0 1e-2/1e-3/1e-1 errors {spread}",
                primary.slope, primary.predicted_slope, primary.relative_error
            ),
        )
    }

    fn quadratic_correction(&mut self) -> Result<Check> {
        let (p, mode, rate) = self.headline()?;
        let delta = 1e-6;
        let c = nonlinear_correction(&p, &mode, delta, (THETA0 / delta).ln() / rate, 0.4)?;
        check(
            (c.ratio - 4.0).abs() <= self.tol(0.5),
            format!(
                "max defect {:.3e} at delta, {:.3e} at delta/2, ratio {:.4}",
                c.max_defect, c.max_defect_half, c.ratio
            ),
        )
    }

    /// Seeded headline star with initial norm 0.1, so the run is nonlinear
    /// and the time-step error is visible above roundoff.
    fn energy_conservation(&mut self) -> Result<Check> {
        let (p, mode, _) = self.headline()?;
        let base = discrete_equilibrium(&p)?;
        let seeded = seed_mode_on(&base, &mode, 0.1 / norm_per_amplitude(&base, &p, &mode)?)?;
        let t = sound_crossing_time(&p);
        let mut drifts = Vec::new();
        for cfl in [0.4, 0.2] {
            let opts = EvolveOptions {
                cfl,
                ..EvolveOptions::default()
            };
            drifts.push(
                evolve(&seeded, &p, t, t / 50.0, &opts)?
                    .diagnostics
                    .relative_energy_drift(),
            );
        }
        let order = (drifts[0] / drifts[1]).log2();
        check(
            drifts[0] <= self.tol(1e-5) && (order - 2.0).abs() <= self.tol(0.3),
            format!(
                "relative drift {:.3e} at CFL 0.4, {:.3e} at 0.2, order {order:.3}",
                drifts[0], drifts[1]
            ),
        )
    }

    fn taylor_sign(&mut self) -> Result<Check> {
        for gamma in [1.25, 1.2, 1.1] {
            if !self.sweeps.iter().any(|(g, _)| *g == gamma) {
                self.sweep_for(gamma)?;
            }
        }
        let margins: Vec<f64> = self
            .sweeps
            .iter()
            .flat_map(|(_, r)| r.iter().map(|r| r.taylor_margin))
            .collect();
        let worst = margins.iter().copied().fold(f64::INFINITY, f64::min);
        check(
            !margins.is_empty() && margins.iter().all(|m| *m > 0.0),
            format!("{} profiles, smallest margin {worst:.4e}", margins.len()),
        )
    }
}

fn regime_pass(v: &RegimeVerdict) -> bool {
    v.checks.iter().all(|c| c.pass)
}

fn summarize(v: &RegimeVerdict) -> String {
    v.checks
        .iter()
        .map(|c| {
            format!(
                "{} {:.4}{}",
                c.name,
                c.value,
                if c.pass { "" } else { " (fail)" }
            )
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// Run the selected criteria in order on the current rayon pool.
pub fn run_all(opts: &VerifyOptions) -> Vec<CriterionResult> {
    let mut suite = Suite {
        opts: opts.clone(),
        sweeps: Vec::new(),
    };
    CRITERIA
        .iter()
        .filter(|(id, _, _)| opts.only.is_empty() || opts.only.contains(id))
        .map(|&(id, name, budget)| {
            let start = Instant::now();
            let outcome = suite.run(id);
            let seconds = start.elapsed().as_secs_f64();
            let (mut pass, mut detail) = match outcome {
                Ok(c) => (c.pass, c.detail),
                Err(e) => (false, format!("error: {e}")),
            };
            let budgeted = opts.enforce_budgets && opts.scale == Scale::Full && budget > 0.0;
            if budgeted && seconds > budget {
                pass = false;
                detail.push_str(&format!("; over the {budget} s budget"));
            }
            CriterionResult {
                id,
                name,
                pass,
                detail,
                seconds,
                budget_seconds: budget,
            }
        })
        .collect()
}
