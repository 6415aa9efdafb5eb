use std::f64::consts::PI;

use super::state::{cube_diff, Mesh};
use super::*;
use crate::error::Error;
use crate::numerics::RadialGrid;
use crate::spectral::{growth_rate_of, ModeResult};
use crate::steady_state::{solve_liquid_star, StarProfile};

fn constant_star(rho: f64, radius: f64, n: usize) -> StarProfile {
    let grid = RadialGrid::uniform(radius, n).unwrap();
    let mass = grid
        .nodes()
        .iter()
        .map(|y| 4.0 * PI / 3.0 * rho * y.powi(3))
        .collect();
    StarProfile::from_samples(1.2, rho, rho, grid, vec![rho; n + 1], mass).unwrap()
}

fn unstable(n: usize) -> (StarProfile, ModeResult) {
    let p = solve_liquid_star(1.2, 1e3, n).unwrap();
    let mode = growth_rate_of(&p).unwrap();
    assert!(mode.is_unstable());
    (p, mode)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a: f64, x| a.max(x.abs()))
}

#[test]
fn equilibrium_residual_decays_under_refinement() {
    let residual = |n: usize| {
        let p = solve_liquid_star(1.2, 2.0, n).unwrap();
        let a = acceleration(&init_equilibrium(&p), &p).unwrap();
        (max_abs(&a[..n]), a[n].abs())
    };
    let (i1, b1) = residual(200);
    let (i2, b2) = residual(400);
    assert!(
        (i1 / i2).log2() > 1.8,
        "interior order {}",
        (i1 / i2).log2()
    );
    assert!(
        (b1 / b2).log2() > 0.9,
        "boundary order {}",
        (b1 / b2).log2()
    );
}

#[test]
fn discrete_equilibrium_is_at_rest() {
    let p = solve_liquid_star(1.2, 100.0, 400).unwrap();
    let eq = discrete_equilibrium(&p).unwrap();
    let scale = p.total_mass() / p.radius().powi(2);
    assert!(max_abs(&acceleration(&eq, &p).unwrap()) < 1e-10 * scale);
    let shift = eq
        .eta
        .iter()
        .zip(p.nodes())
        .map(|(e, y)| (e - y).abs())
        .fold(0.0, f64::max);
    assert!(shift > 0.0 && shift < 1e-3 * p.radius());
    assert_eq!(perturbation_norm(&eq, &p).unwrap(), 0.0);
}

#[test]
fn uniform_dilation_scales_every_jacobian() {
    let p = constant_star(3.0, 0.7, 64);
    let mut s = init_equilibrium(&p);
    let eps = 0.013;
    for e in &mut s.eta {
        *e *= 1.0 + eps;
    }
    for j in s.jacobians() {
        assert!((j / (1.0 + eps).powi(3) - 1.0).abs() < 1e-14);
    }
}

#[test]
fn zero_step_is_identity() {
    let (p, mode) = unstable(200);
    let s = seed_mode(&p, &mode, 1e-6).unwrap();
    assert_eq!(step(&s, &p, 0.0).unwrap(), s);
}

#[test]
fn oversized_step_is_rejected() {
    let p = solve_liquid_star(1.2, 10.0, 100).unwrap();
    let s = init_equilibrium(&p);
    let limit = cfl_limit(&s, &p).unwrap();
    assert!(step(&s, &p, 0.5 * limit).is_ok());
    assert!(matches!(
        step(&s, &p, 1.01 * limit),
        Err(Error::CflViolation { .. })
    ));
    let opts = EvolveOptions {
        dt: Some(2.0 * limit),
        ..Default::default()
    };
    assert!(matches!(
        evolve(&s, &p, 1.0, 0.1, &opts),
        Err(Error::CflViolation { .. })
    ));
}

#[test]
fn equilibrium_norm_is_zero() {
    let p = solve_liquid_star(1.25, 50.0, 300).unwrap();
    assert!(perturbation_norm(&init_equilibrium(&p), &p).unwrap() <= 1e-12);
}

#[test]
fn velocity_only_norm_matches_closed_form() {
    let p = constant_star(1.0, 1.0, 400);
    let mut s = init_equilibrium(&p);
    s.vel = p.nodes().to_vec();
    let norm = perturbation_norm(&s, &p).unwrap();
    let exact = 4.0 * PI / 5.0;
    assert!((norm * norm / exact - 1.0).abs() < 1e-4);
}

#[test]
fn seeded_norm_is_linear_in_amplitude() {
    let (p, mode) = unstable(400);
    let n1 = perturbation_norm(&seed_mode(&p, &mode, 1e-9).unwrap(), &p).unwrap();
    let n2 = perturbation_norm(&seed_mode(&p, &mode, 2e-9).unwrap(), &p).unwrap();
    assert!((n2 / n1 - 2.0).abs() < 1e-6);
    let base = init_equilibrium(&p);
    let per = norm_per_amplitude(&base, &p, &mode).unwrap();
    assert!((per * 1e-9 / n1 - 1.0).abs() < 1e-6);
}

#[test]
fn oversized_seed_is_rejected() {
    let (p, mode) = unstable(200);
    assert!(seed_mode(&p, &mode, 1e3).is_err());
    assert_eq!(seed_mode(&p, &mode, 0.0).unwrap(), init_equilibrium(&p));
}

#[test]
fn energy_is_even_in_velocity() {
    let (p, mode) = unstable(200);
    let s = seed_mode(&p, &mode, 1e-4).unwrap();
    let mut flipped = s.clone();
    for v in &mut flipped.vel {
        *v = -*v;
    }
    assert_eq!(
        total_energy(&s, &p).unwrap(),
        total_energy(&flipped, &p).unwrap()
    );
}

#[test]
fn equilibrium_energy_matches_profile_quadrature() {
    let energy = |n: usize| {
        let p = solve_liquid_star(1.2, 10.0, n).unwrap();
        let discrete = total_energy(&init_equilibrium(&p), &p).unwrap();
        let eos = p.eos();
        let (y, rho, m) = (p.nodes(), p.rho(), p.mass());
        let integrand = |i: usize| {
            let g = if i == 0 { 0.0 } else { m[i] / y[i] };
            4.0 * PI * y[i] * y[i] * rho[i] * (eos.internal_energy(rho[i]) - g)
        };
        let quad: f64 = (0..n)
            .map(|i| 0.5 * (integrand(i) + integrand(i + 1)) * (y[i + 1] - y[i]))
            .sum();
        (discrete - quad).abs() / quad.abs()
    };
    let (e1, e2) = (energy(200), energy(400));
    assert!(e2 < 1e-4);
    assert!((e1 / e2).log2() > 1.7, "order {}", (e1 / e2).log2());
}

#[test]
fn linearized_acceleration_matches_finite_difference() {
    let (p, mode) = unstable(300);
    let base = discrete_equilibrium(&p).unwrap();
    let xi: Vec<f64> = p
        .nodes()
        .iter()
        .zip(&mode.chi)
        .map(|(y, c)| y * c)
        .collect();
    let eps = 1e-7;
    let mut moved = base.clone();
    for (e, x) in moved.eta.iter_mut().zip(&xi) {
        *e += eps * x;
    }
    let a0 = acceleration(&base, &p).unwrap();
    let a1 = acceleration(&moved, &p).unwrap();
    let fd: Vec<f64> = a1.iter().zip(&a0).map(|(a, b)| (a - b) / eps).collect();
    let lin = linearized_acceleration(&base, &p, &xi).unwrap();
    let diff: Vec<f64> = fd.iter().zip(&lin).map(|(a, b)| a - b).collect();
    assert!(max_abs(&diff) < 1e-4 * max_abs(&lin));
}

#[test]
fn seeded_acceleration_is_linear_in_amplitude() {
    let (p, mode) = unstable(300);
    let base = discrete_equilibrium(&p).unwrap();
    let a0 = acceleration(&base, &p).unwrap();
    let per = norm_per_amplitude(&base, &p, &mode).unwrap();
    let relative = |norm: f64| {
        let delta = norm / per;
        let s = seed_mode_on(&base, &mode, delta).unwrap();
        let xi: Vec<f64> = p
            .nodes()
            .iter()
            .zip(&mode.chi)
            .map(|(y, c)| delta * y * c)
            .collect();
        let a = acceleration(&s, &p).unwrap();
        let lin = linearized_acceleration(&base, &p, &xi).unwrap();
        let diff: Vec<f64> = a
            .iter()
            .zip(&lin)
            .zip(&a0)
            .map(|((a, l), b)| a - b - l)
            .collect();
        max_abs(&diff) / max_abs(&lin)
    };
    let (r1, r2) = (relative(2e-2), relative(1e-2));
    assert!(r1 < 1e-2);
    assert!((r1 / r2 - 2.0).abs() < 0.1, "ratio {}", r1 / r2);
}

#[test]
fn eigenmode_grows_at_its_rate_in_the_linear_system() {
    let (p, mode) = unstable(400);
    let rate = mode.growth_rate.unwrap();
    let initial = LinearState::from_mode(&mode, 1.0);
    let t_end = 1.0 / rate;
    let (diag, last) = evolve_linearized(&p, &initial, t_end, 2e-3 * t_end).unwrap();
    let grow = (rate * t_end).exp();
    let worst = last
        .zeta
        .iter()
        .zip(&mode.chi)
        .map(|(z, c)| (z - grow * c).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-2 * grow * max_abs(&mode.chi));
    let (n0, n1) = (diag.samples[0].norm, diag.samples.last().unwrap().norm);
    assert!(((n1 / n0).ln() / t_end / rate - 1.0).abs() < 1e-2);
    assert!(last.robin_defect(p.nodes()).abs() < 0.05);
}

#[test]
fn zero_linear_data_stays_zero() {
    let p = solve_liquid_star(1.2, 100.0, 100).unwrap();
    let n = p.nodes().len();
    let (diag, last) = evolve_linearized(&p, &LinearState::zeros(n), 0.1, 5e-4).unwrap();
    assert_eq!(last.zeta, vec![0.0; n]);
    assert_eq!(last.sigma, vec![0.0; n]);
    assert!(diag
        .samples
        .iter()
        .all(|s| s.norm == 0.0 && s.energy == 0.0));
}

#[test]
fn linear_energy_is_conserved_to_second_order() {
    let p = solve_liquid_star(1.2, 2.0, 200).unwrap();
    let n = p.nodes().len();
    let mut initial = LinearState::zeros(n);
    let r = p.radius();
    initial.zeta = p.nodes().iter().map(|y| (PI * y / r).cos()).collect();
    let drift = |dt: f64| {
        let (diag, _) = evolve_linearized(&p, &initial, 1.0, dt).unwrap();
        diag.relative_energy_drift()
    };
    let (d1, d2) = (drift(2e-4), drift(1e-4));
    assert!(d1 < 1e-3);
    assert!(
        ((d1 / d2).log2() - 2.0).abs() < 0.3,
        "order {}",
        (d1 / d2).log2()
    );
}

#[test]
fn linear_step_above_limit_is_rejected() {
    let p = solve_liquid_star(1.2, 10.0, 100).unwrap();
    let n = p.nodes().len();
    assert!(matches!(
        evolve_linearized(&p, &LinearState::zeros(n), 1.0, 1.0),
        Err(Error::CflViolation { .. })
    ));
}

#[test]
fn nonlinear_energy_drift_is_second_order_in_dt() {
    let (p, mode) = unstable(200);
    let base = discrete_equilibrium(&p).unwrap();
    let per = norm_per_amplitude(&base, &p, &mode).unwrap();
    let s = seed_mode_on(&base, &mode, 0.1 / per).unwrap();
    let t = sound_crossing_time(&p);
    let drift = |cfl: f64| {
        let opts = EvolveOptions {
            cfl,
            ..Default::default()
        };
        evolve(&s, &p, t, t / 50.0, &opts)
            .unwrap()
            .diagnostics
            .relative_energy_drift()
    };
    let (d1, d2) = (drift(0.4), drift(0.2));
    assert!(d1 < 1e-5);
    assert!(
        ((d1 / d2).log2() - 2.0).abs() < 0.3,
        "order {}",
        (d1 / d2).log2()
    );
}

#[test]
fn inversion_is_flagged_not_fatal() {
    let p = solve_liquid_star(1.2, 10.0, 100).unwrap();
    let mut s = init_equilibrium(&p);
    s.vel[50] = -1e3;
    let run = evolve(&s, &p, 1.0, 0.1, &EvolveOptions::default()).unwrap();
    assert!(matches!(run.diagnostics.status, RunStatus::Inverted { .. }));
    assert!(run.state.validate().is_ok());
    assert!(run.diagnostics.status.label().starts_with("inverted"));
}

#[test]
fn cell_masses_are_label_fixed() {
    let (p, mode) = unstable(200);
    let s = seed_mode(&p, &mode, 1e-6).unwrap();
    let run = evolve(&s, &p, 0.05, 0.01, &EvolveOptions::default()).unwrap();
    assert_eq!(run.state.cell_rho0, s.cell_rho0);
    assert_eq!(run.state.labels, s.labels);
    let y = p.nodes();
    let mesh = Mesh::of(&run.state, &p).unwrap();
    let f = mesh.densities(&run.state.eta, run.state.time).unwrap();
    for c in 0..f.len() {
        let m0 = s.cell_rho0[c] * cube_diff(y[c], y[c + 1]);
        let m1 = f[c] * cube_diff(run.state.eta[c], run.state.eta[c + 1]);
        assert!((m1 / m0 - 1.0).abs() < 1e-13);
    }
}

#[test]
fn samples_fall_on_the_requested_grid() {
    let p = solve_liquid_star(1.2, 10.0, 100).unwrap();
    let run = evolve(
        &init_equilibrium(&p),
        &p,
        0.3,
        0.1,
        &EvolveOptions::default(),
    )
    .unwrap();
    let ts: Vec<f64> = run.diagnostics.samples.iter().map(|s| s.t).collect();
    assert_eq!(ts.len(), 4);
    for (t, want) in ts.iter().zip([0.0, 0.1, 0.2, 0.3]) {
        assert!((t - want).abs() < 1e-12);
    }
    assert_eq!(run.diagnostics.status, RunStatus::Completed);
    let table = run.diagnostics.to_table(&[]);
    assert!(table
        .to_csv()
        .contains("t,norm,energy,boundary_radius,max_jacobian_dev"));
}

#[test]
fn thresholds_stop_the_run_at_the_crossing() {
    let (p, mode) = unstable(200);
    let base = discrete_equilibrium(&p).unwrap();
    let per = norm_per_amplitude(&base, &p, &mode).unwrap();
    let s = seed_mode_on(&base, &mode, 1e-6 / per).unwrap();
    let opts = EvolveOptions {
        thresholds: vec![1e-4],
        ..Default::default()
    };
    let run = evolve(&s, &p, 10.0, 10.0, &opts).unwrap();
    assert_eq!(run.diagnostics.status, RunStatus::ReachedThreshold);
    let t = run.crossings[0].unwrap();
    let rate = mode.growth_rate.unwrap();
    assert!((t * rate / 100f64.ln() - 1.0).abs() < 0.02);
}

#[test]
fn growth_fit_is_exact_on_exponentials() {
    let samples: Vec<DiagnosticSample> = (0..50)
        .map(|k| {
            let t = 0.01 * k as f64;
            DiagnosticSample {
                t,
                norm: 1e-6 * (7.0 * t).exp(),
                energy: 0.0,
                boundary_radius: 1.0,
                max_jacobian_dev: 0.0,
            }
        })
        .collect();
    let fit = fit_growth_rate(&samples, 1e-5, 1e-5 * 7f64.exp()).unwrap();
    assert!((fit.slope - 7.0).abs() < 1e-10);
    assert!(fit_growth_rate(&samples, 1.0, 2.0).is_err());
}

#[test]
fn escape_fit_is_exact_on_exponentials() {
    let (rate, theta0) = (3.5, 1e-2f64);
    let points: Vec<(f64, f64)> = [1e-4, 1e-6]
        .iter()
        .map(|&d| (d, (theta0 / d).ln() / rate))
        .collect();
    let fit = fit_escape_times(&points, theta0, rate).unwrap();
    assert!(fit.relative_error < 1e-12);
    assert!((fit.intercept - theta0.ln() / rate).abs() < 1e-12);
}

#[test]
fn escape_experiment_validates_input() {
    let (p, mode) = unstable(100);
    let opts = EvolveOptions::default();
    assert!(escape_experiment(&p, &mode, &[1e-4], &[1e-2], &opts).is_err());
    assert!(escape_experiment(&p, &mode, &[1e-1, 1e-4], &[1e-2], &opts).is_err());
    assert!(escape_experiment(&p, &mode, &[1e-5, 1e-4], &[], &opts).is_err());
    let stable = solve_liquid_star(1.2, 2.0, 100).unwrap();
    let smode = growth_rate_of(&stable).unwrap();
    assert!(escape_experiment(&stable, &smode, &[1e-5, 1e-4], &[1e-2], &opts).is_err());
}

#[test]
fn tangent_linear_needs_a_rest_state() {
    let (p, mode) = unstable(100);
    let s = seed_mode(&p, &mode, 1e-6).unwrap();
    assert!(TangentLinear::new(&s, &p).is_err());
    assert!(TangentLinear::new(&init_equilibrium(&p), &p).is_ok());
}

#[test]
fn nonlinear_remainder_is_quadratic() {
    let (p, mode) = unstable(200);
    let rate = mode.growth_rate.unwrap();
    let c = nonlinear_correction(&p, &mode, 1e-5, (1e-2f64 / 1e-5).ln() / rate, 0.4).unwrap();
    assert!((c.ratio - 4.0).abs() < 0.1, "ratio {}", c.ratio);
}

#[test]
fn state_table_round_trips_positions() {
    let p = solve_liquid_star(1.2, 10.0, 20).unwrap();
    let s = init_equilibrium(&p);
    let csv = state_table(&s, &[("gamma".into(), "1.2".into())]).to_csv();
    assert!(csv.starts_with("# gamma=1.2\n"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 22);
}
