use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use lsl_core::dynamics::{
    discrete_equilibrium, escape_experiment, evolve as run_evolve, evolve_linearized,
    init_equilibrium, linear_step_limit, nonlinear_correction, norm_per_amplitude, seed_mode_on,
    sound_crossing_time, state_table, EvolveOptions, LinearState,
};
use lsl_core::io::{fmt_f64, Table};
use lsl_core::scaling::{
    case1_form_asymptotics, case_of, geometric_kappas, records_to_csv, sweep, verify_regime,
    RegimeOptions, SweepOptions,
};
use lsl_core::spectral::{assemble, growth_rate_of, power_law_trial_quotient_in, ModeResult};
use lsl_core::steady_state::{solve_gaseous_reference, solve_liquid_star, StarProfile};
use lsl_core::verification::{run_all, Scale, VerifyOptions, CRITERIA};

use crate::config::{config_error, merge, CliError, CliResult, OutputRoot};

type ConfigFile<'a> = Option<&'a Map<String, Value>>;

/// Star given either as a profile file or by its parameters.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct StarArgs {
    /// Profile CSV written by `lsl steady`; replaces gamma, kappa and n.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Central density, greater than 1.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// Number of grid cells.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

impl StarArgs {
    fn load(&mut self, default_n: usize) -> CliResult<StarProfile> {
        if let Some(path) = &self.profile {
            if self.gamma.is_some() || self.kappa.is_some() || self.n.is_some() {
                return Err(config_error(
                    "give either --profile or --gamma/--kappa/--n, not both",
                ));
            }
            let text = fs::read_to_string(path).map_err(|e| {
                config_error(format!("cannot read profile {}: {e}", path.display()))
            })?;
            let p = StarProfile::from_csv(&text)
                .map_err(|e| config_error(format!("profile {}: {e}", path.display())))?;
            return Ok(p);
        }
        let gamma = *self.gamma.get_or_insert(1.2);
        let kappa = *self.kappa.get_or_insert(1e3);
        let n = *self.n.get_or_insert(default_n);
        validate_star(gamma, kappa, n)?;
        Ok(solve_liquid_star(gamma, kappa, n)?)
    }
}

fn validate_star(gamma: f64, kappa: f64, n: usize) -> CliResult<()> {
    lsl_core::steady_state::EquationOfState::new(gamma)?;
    if !(kappa > 1.0 && kappa.is_finite()) {
        return Err(config_error(format!(
            "kappa must satisfy kappa > 1 (central density above the boundary density), got {kappa}"
        )));
    }
    if n < 4 {
        return Err(config_error(format!("n must be at least 4, got {n}")));
    }
    Ok(())
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(config_error(format!("{name} must be positive, got {v}")))
    }
}

/// `# command=` and `# config=` preamble lines echoing the effective parameters.
fn provenance(command: &str, effective: &impl Serialize) -> Vec<(String, String)> {
    let config = serde_json::to_string(effective).expect("parameters serialize");
    vec![
        ("command".into(), command.into()),
        ("config".into(), config),
    ]
}

fn with_provenance(mut table: Table, prov: &[(String, String)]) -> Table {
    let mut comments = prov.to_vec();
    comments.append(&mut table.comments);
    table.comments = comments;
    table
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

fn announce(path: &Path) {
    println!("wrote {}", path.display());
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct SteadyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub star: StarArgs,
    /// Output CSV.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

pub fn steady(flags: &SteadyArgs, file: ConfigFile, out: &OutputRoot) -> CliResult<()> {
    let mut a = merge(flags, file)?;
    if a.star.profile.is_some() {
        return Err(config_error(
            "steady solves a star; --profile is not accepted",
        ));
    }
    let p = a.star.load(2048)?;
    let path = a.out.get_or_insert_with(|| "profile.csv".into()).clone();
    let table = with_provenance(p.to_table(), &provenance("steady", &a));
    announce(&out.write(&path, &table.to_csv())?);
    Ok(())
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct GaseousArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Truncation density when the star has no compact support.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_floor: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

pub fn gaseous(flags: &GaseousArgs, file: ConfigFile, out: &OutputRoot) -> CliResult<()> {
    let mut a = merge(flags, file)?;
    let gamma = *a.gamma.get_or_insert(1.2);
    let n = *a.n.get_or_insert(2048);
    let floor = *a.rho_floor.get_or_insert(1e-6);
    let p = solve_gaseous_reference(gamma, n, floor)?;
    let path = a.out.get_or_insert_with(|| "gaseous.csv".into()).clone();
    let table = with_provenance(p.to_table(), &provenance("gaseous", &a));
    announce(&out.write(&path, &table.to_csv())?);
    Ok(())
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ModesArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub star: StarArgs,
    /// Eigenfunction CSV.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Summary JSON.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
}

fn mode_summary(p: &StarProfile, mode: &ModeResult) -> Value {
    json!({
        "gamma": p.gamma(),
        "kappa": p.kappa(),
        "cells": p.nodes().len() - 1,
        "radius": p.radius(),
        "unstable": mode.is_unstable(),
        "mu_star": mode.mu_star,
        "mu0": mode.mu0,
        "growth_rate": mode.growth_rate,
        "residual": mode.residual,
        "bracket": [mode.bracket.0, mode.bracket.1],
        "sign_changes": mode.sign_changes,
        "robin_defect": mode.robin_defect(),
    })
}

pub fn modes(flags: &ModesArgs, file: ConfigFile, out: &OutputRoot) -> CliResult<()> {
    let mut a = merge(flags, file)?;
    let p = a.star.load(2048)?;
    let mode = growth_rate_of(&p)?;
    let csv = a.out.get_or_insert_with(|| "mode.csv".into()).clone();
    let summary = a.summary.get_or_insert_with(|| "mode.json".into()).clone();
    let prov = provenance("modes", &a);
    announce(&out.write(&csv, &with_provenance(mode.to_table(), &prov).to_csv())?);
    let mut s = mode_summary(&p, &mode);
    s["config"] = serde_json::to_value(&a).expect("parameters serialize");
    announce(&out.write(&summary, &json_text(&s))?);
    Ok(())
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct RayleighArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub star: StarArgs,
    /// Eigenfunction CSV (`y,chi`) to evaluate.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi: Option<PathBuf>,
    /// Breakpoint factor of the power-law trial function.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    /// Exponent of the power-law trial function.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

pub fn rayleigh(flags: &RayleighArgs, file: ConfigFile, out: &OutputRoot) -> CliResult<()> {
    let mut a = merge(flags, file)?;
    let p = a.star.load(2048)?;
    let pencil = assemble(&p)?;
    let mut result = json!({
        "gamma": p.gamma(),
        "kappa": p.kappa(),
        "constant": pencil.rayleigh_quotient(&vec![1.0; pencil.len()])?,
    });
    if let Some(path) = &a.chi {
        let text = fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        let mode = ModeResult::from_csv(&text)?;
        result["chi"] = json!(pencil.rayleigh_quotient(&mode.chi)?);
    }
    match (a.nu, a.a) {
        (Some(nu), Some(exp)) => {
            result["power_law"] = json!({
                "nu": nu,
                "a": exp,
                "quotient": power_law_trial_quotient_in(&pencil, &p, nu, exp)?,
                "scaled": power_law_trial_quotient_in(&pencil, &p, nu, exp)? / p.kappa().powf(p.gamma() / 2.0),
            });
        }
        (None, None) => {}
        _ => return Err(config_error("the power-law trial needs both --nu and --a")),
    }
    let path = a.out.get_or_insert_with(|| "rayleigh.json".into()).clone();
    result["config"] = serde_json::to_value(&a).expect("parameters serialize");
    print!("{}", json_text(&result));
    announce(&out.write(&path, &json_text(&result))?);
    Ok(())
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ScalingArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_min: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_decade: Option<usize>,
    /// Fixed cell count; by default it grows with log10 kappa.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cells: Option<usize>,
    /// Half-width of the accepted slope intervals.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope_tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<PathBuf>,
}

pub fn scaling(flags: &ScalingArgs, file: ConfigFile, out: &OutputRoot) -> CliResult<()> {
    let mut a = merge(flags, file)?;
    let gamma = *a.gamma.get_or_insert(1.25);
    let lo = *a.kappa_min.get_or_insert(1e2);
    let hi = *a.kappa_max.get_or_insert(1e5);
    let per = *a.per_decade.get_or_insert(8);
    let slope_tol = positive("slope_tol", *a.slope_tol.get_or_insert(0.1))?;
    case_of(gamma)?;
    let kappas = geometric_kappas(lo, hi, per)?;
    let opts = SweepOptions {
        cells: a.cells,
        ..SweepOptions::default()
    };
    let records = sweep(gamma, &kappas, &opts)?;
    let regime = RegimeOptions {
        slope_tol,
        ..RegimeOptions::default()
    };
    let csv = a.out.get_or_insert_with(|| "sweep.csv".into()).clone();
    let verdict_path = a
        .verdict
        .get_or_insert_with(|| "verdict.json".into())
        .clone();
    let prov = provenance("scaling", &a);
    announce(&out.write(&csv, &records_to_csv(&prov, &records))?);
    let verdict = verify_regime(gamma, &records, &regime)?;
    let mut v = serde_json::to_value(&verdict).expect("verdict serializes");
    if case_of(gamma)? == 1 {
        v["form_asymptotics"] = serde_json::to_value(case1_form_asymptotics(gamma, &records)?)
            .expect("asymptotics serialize");
    }
    v["config"] = serde_json::to_value(&a).expect("parameters serialize");
    announce(&out.write(&verdict_path, &json_text(&v))?);
    for c in &verdict.checks {
        println!(
            "{} {} = {} (expected {})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.expected
        );
    }
    if verdict.pass {
        Ok(())
    } else {
        Err(CliError::Verification("scaling verdict failed".into()))
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct EvolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub star: StarArgs,
    /// Initial perturbation norm of the seeded mode; 0 evolves the equilibrium.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_norm: Option<f64>,
    /// End time; defaults to one sound-crossing time.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_dt: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
    /// Fixed time step; overrides the CFL choice.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Artificial viscosity coefficient; 0 disables it.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub viscosity: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Final state CSV (`y,eta,vel`).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state_out: Option<PathBuf>,
}

fn evolve_options(cfl: f64, dt: Option<f64>, viscosity: f64) -> CliResult<EvolveOptions> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(config_error(format!("cfl must lie in (0, 1], got {cfl}")));
    }
    if let Some(dt) = dt {
        positive("dt", dt)?;
    }
    if !(viscosity >= 0.0) {
        return Err(config_error(format!(
            "viscosity must be nonnegative, got {viscosity}"
        )));
    }
    Ok(EvolveOptions {
        cfl,
        dt,
        viscosity,
        thresholds: Vec::new(),
    })
}

pub fn evolve(flags: &EvolveArgs, file: ConfigFile, out: &OutputRoot) -> CliResult<()> {
    let mut a = merge(flags, file)?;
    let p = a.star.load(800)?;
    let seed = *a.seed_norm.get_or_insert(0.0);
    if !(seed >= 0.0 && seed.is_finite()) {
        return Err(config_error(format!(
            "seed_norm must be nonnegative, got {seed}"
        )));
    }
    let t_end = positive(
        "t_end",
        *a.t_end.get_or_insert_with(|| sound_crossing_time(&p)),
    )?;
    let sample_dt = positive("sample_dt", *a.sample_dt.get_or_insert(t_end / 100.0))?;
    let opts = evolve_options(
        *a.cfl.get_or_insert(0.4),
        a.dt,
        *a.viscosity.get_or_insert(0.0),
    )?;
    let state = if seed == 0.0 {
        init_equilibrium(&p)
    } else {
        let mode = growth_rate_of(&p)?;
        if !mode.is_unstable() {
            return Err(config_error(
                "seeding needs an unstable star; use seed_norm 0",
            ));
        }
        let base = discrete_equilibrium(&p)?;
        seed_mode_on(&base, &mode, seed / norm_per_amplitude(&base, &p, &mode)?)?
    };
    let run = run_evolve(&state, &p, t_end, sample_dt, &opts)?;
    let csv = a.out.get_or_insert_with(|| "evolve.csv".into()).clone();
    let final_state = a
        .state_out
        .get_or_insert_with(|| "state.csv".into())
        .clone();
    let prov = provenance("evolve", &a);
    let mut diag = run.diagnostics.to_table(&prov);
    diag = diag.comment(
        "energy_drift",
        fmt_f64(run.diagnostics.relative_energy_drift()),
    );
    announce(&out.write(&csv, &diag.to_csv())?);
    announce(&out.write(&final_state, &state_table(&run.state, &prov).to_csv())?);
    println!("status {}", run.diagnostics.status.label());
    Ok(())
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct LinearArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub star: StarArgs,
    /// Multiple of the normalized eigenmode used as initial data.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    /// End time; defaults to one e-folding time (one sound crossing if stable).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// Time step; defaults to half the stability limit.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

pub fn linear(flags: &LinearArgs, file: ConfigFile, out: &OutputRoot) -> CliResult<()> {
    let mut a = merge(flags, file)?;
    let p = a.star.load(800)?;
    let mode = growth_rate_of(&p)?;
    let amplitude = *a.amplitude.get_or_insert(1.0);
    if !amplitude.is_finite() {
        return Err(config_error("amplitude must be finite"));
    }
    let default_end = mode
        .growth_rate
        .map(|r| 1.0 / r)
        .unwrap_or_else(|| sound_crossing_time(&p));
    let t_end = positive("t_end", *a.t_end.get_or_insert(default_end))?;
    let limit = linear_step_limit(&p)?;
    let dt = positive("dt", *a.dt.get_or_insert((0.5 * limit).min(t_end / 100.0)))?;
    let (diag, last) = evolve_linearized(&p, &LinearState::from_mode(&mode, amplitude), t_end, dt)?;
    let csv = a.out.get_or_insert_with(|| "linear.csv".into()).clone();
    let table = diag
        .to_table(&provenance("linear", &a))
        .comment("robin_defect", fmt_f64(last.robin_defect(p.nodes())));
    announce(&out.write(&csv, &table.to_csv())?);
    Ok(())
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct EscapeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub star: StarArgs,
    /// Initial perturbation norms, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    /// Escape threshold of the perturbation norm.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta0: Option<f64>,
    /// Further thresholds fitted for sensitivity, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extra_thresholds: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub viscosity: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Fit JSON.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<PathBuf>,
}

pub fn escape(flags: &EscapeArgs, file: ConfigFile, out: &OutputRoot) -> CliResult<()> {
    let mut a = merge(flags, file)?;
    let p = a.star.load(800)?;
    let deltas = a
        .deltas
        .get_or_insert_with(|| vec![1e-4, 1e-5, 1e-6])
        .clone();
    let theta0 = positive("theta0", *a.theta0.get_or_insert(1e-2))?;
    let mut thresholds = vec![theta0];
    thresholds.extend(
        a.extra_thresholds
            .get_or_insert_with(|| vec![1e-3, 1e-1])
            .iter(),
    );
    for t in &thresholds {
        positive("threshold", *t)?;
    }
    let opts = evolve_options(
        *a.cfl.get_or_insert(0.4),
        None,
        *a.viscosity.get_or_insert(0.0),
    )?;
    let mode = growth_rate_of(&p)?;
    if !mode.is_unstable() {
        return Err(config_error("escape needs an unstable star"));
    }
    let result = escape_experiment(&p, &mode, &deltas, &thresholds, &opts)?;
    let smallest = deltas.iter().copied().fold(f64::INFINITY, f64::min);
    let rate = result.growth_rate;
    let correction = nonlinear_correction(
        &p,
        &mode,
        smallest,
        (theta0 / smallest).ln() / rate,
        opts.cfl,
    )?;

    let columns: Vec<String> = std::iter::once("delta".to_string())
        .chain(thresholds.iter().map(|t| format!("t_{}", fmt_f64(*t))))
        .collect();
    let names: Vec<&str> = columns.iter().map(String::as_str).collect();
    let csv = a.out.get_or_insert_with(|| "escape.csv".into()).clone();
    let fit_path = a.fit.get_or_insert_with(|| "escape.json".into()).clone();
    let mut table = Table::new(&names);
    table.comments = provenance("escape", &a);
    for r in &result.runs {
        let mut row = vec![r.delta];
        row.extend(r.times.iter().map(|t| t.unwrap_or(f64::NAN)));
        table.push_row(row);
    }
    announce(&out.write(&csv, &table.to_csv())?);
    let mut v = serde_json::to_value(&result).expect("escape result serializes");
    v["correction"] = serde_json::to_value(&correction).expect("correction serializes");
    v["config"] = serde_json::to_value(&a).expect("parameters serialize");
    announce(&out.write(&fit_path, &json_text(&v))?);
    let f = &result.fits[0];
    println!(
        "slope {} vs 1/sqrt(mu0) {} (relative error {:.3e}); correction ratio {:.4}",
        f.slope, f.predicted_slope, f.relative_error, correction.ratio
    );
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleArg {
    Reduced,
    Full,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<ScaleArg>,
    /// Multiplies every tolerance; 0 makes every tolerance check fail.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Criterion numbers to run, comma separated; all by default.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criteria: Option<Vec<u8>>,
    /// Optional JSON report.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

pub fn verify(flags: &VerifyArgs, file: ConfigFile, out: &OutputRoot) -> CliResult<()> {
    let mut a = merge(flags, file)?;
    let scale = match *a.scale.get_or_insert(ScaleArg::Reduced) {
        ScaleArg::Reduced => Scale::Reduced,
        ScaleArg::Full => Scale::Full,
    };
    let tolerance = *a.tolerance.get_or_insert(1.0);
    if !(tolerance >= 0.0 && tolerance.is_finite()) {
        return Err(config_error(format!(
            "tolerance must be nonnegative, got {tolerance}"
        )));
    }
    let only = a.criteria.clone().unwrap_or_default();
    if let Some(bad) = only
        .iter()
        .find(|id| !CRITERIA.iter().any(|(c, _, _)| c == *id))
    {
        return Err(config_error(format!("no criterion {bad}")));
    }
    let results = run_all(&VerifyOptions {
        scale,
        tolerance_scale: tolerance,
        only,
        enforce_budgets: true,
    });
    for r in &results {
        println!("{}", r.line());
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if let Some(path) = &a.out {
        let report = json!({ "config": a, "results": results });
        announce(&out.write(path, &json_text(&report))?);
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Verification(format!("{failed} criteria failed")))
    }
}
