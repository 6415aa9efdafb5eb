use std::f64::consts::PI;

use super::*;
use crate::error::Error;
use crate::numerics::{fit_loglog, RadialGrid, Spacing};

/// Enclosed mass of the γ = 6/5 closed-form star, `4π y³ / (3a (a + b y²)^{3/2})`.
fn six_fifths_mass(kappa: f64, y: f64) -> f64 {
    let a = kappa.powf(-0.4);
    let b = 2.0 * PI / 9.0 * kappa.powf(0.4);
    4.0 * PI * y.powi(3) / (3.0 * a * (a + b * y * y).powf(1.5))
}

fn max_rel_density_error(p: &StarProfile) -> f64 {
    p.nodes()
        .iter()
        .zip(p.rho())
        .map(|(&y, &r)| (r / six_fifths_density(p.kappa(), y) - 1.0).abs())
        .fold(0.0, f64::max)
}

#[test]
fn six_fifths_matches_closed_form() {
    for kappa in [2.0, 10.0, 100.0, 1e4] {
        let p = solve_liquid_star(1.2, kappa, 2048).unwrap();
        let r_exact = six_fifths_radius(kappa);
        assert!(
            (p.radius() / r_exact - 1.0).abs() < 1e-8,
            "kappa {kappa}: R {} vs {r_exact}",
            p.radius()
        );
        let err = max_rel_density_error(&p);
        assert!(err < 1e-6, "kappa {kappa}: density error {err}");
        let merr = (p.total_mass() / six_fifths_mass(kappa, r_exact) - 1.0).abs();
        assert!(merr < 1e-7, "kappa {kappa}: mass error {merr}");
    }
}

#[test]
fn explicit_profile_endpoints() {
    let kappa = 37.0;
    let (rho0, r) = explicit_profile_six_fifths(kappa, 0.0).unwrap();
    assert!((rho0 / kappa - 1.0).abs() < 1e-14);
    let (rho_r, _) = explicit_profile_six_fifths(kappa, r).unwrap();
    assert!((rho_r - 1.0).abs() < 1e-13);
    assert!(explicit_profile_six_fifths(kappa, 1.01 * r).is_err());
    assert!(explicit_profile_six_fifths(1.0, 0.0).is_err());
}

#[test]
fn explicit_profile_at_half_radius_for_kappa_100() {
    // Frozen from an independent 50-digit evaluation (mpmath):
    // y = R/2 with R = (3/sqrt(2π)) κ^{-2/5} (κ^{2/5} - 1)^{1/2}, κ = 100.
    let (rho, r) = explicit_profile_six_fifths(100.0, 0.5 * six_fifths_radius(100.0)).unwrap();
    assert!((r / 0.437_080_203_718_006_13 - 1.0).abs() < 1e-14, "{r}");
    assert!((rho / 12.101_118_730_580_812 - 1.0).abs() < 1e-13, "{rho}");
}

#[test]
fn near_unit_kappa_degenerates() {
    let p = solve_liquid_star(1.2, 1.0 + 1e-6, 64).unwrap();
    let r = six_fifths_radius(1.0 + 1e-6);
    assert!(p.radius() < 1e-3);
    assert!((p.radius() / r - 1.0).abs() < 1e-6);
}

#[test]
fn rejects_invalid_parameters() {
    assert!(matches!(
        solve_liquid_star(1.2, 1.0, 64),
        Err(Error::InvalidParameter(_))
    ));
    assert!(matches!(
        solve_liquid_star(1.2, 0.5, 64),
        Err(Error::InvalidParameter(_))
    ));
    assert!(matches!(
        solve_liquid_star(1.4, 10.0, 64),
        Err(Error::InvalidParameter(_))
    ));
    assert!(matches!(
        solve_liquid_star(0.9, 10.0, 64),
        Err(Error::InvalidParameter(_))
    ));
    assert!(matches!(
        solve_liquid_star(1.2, 10.0, 8),
        Err(Error::InvalidParameter(_))
    ));
}

#[test]
fn bracketing_failure_is_reported() {
    let opts = SolverOptions {
        max_radius_factor: 1e-3,
        ..SolverOptions::default()
    };
    assert!(matches!(
        solve_liquid_star_with(1.2, 10.0, 64, &opts),
        Err(Error::NotBracketed { .. })
    ));
}

/// Oracle: the same ODE at 8x the node count with a much finer internal step,
/// Richardson-combined with the 4x solution.
#[test]
fn gamma_125_matches_refined_integration() {
    let n = 2048;
    let p = solve_liquid_star(1.25, 10.0, n).unwrap();
    let fine_opts = SolverOptions {
        steps_per_scale: 3200.0,
        ..SolverOptions::default()
    };
    let half_opts = SolverOptions {
        steps_per_scale: 1600.0,
        ..SolverOptions::default()
    };
    let f8 = solve_liquid_star_with(1.25, 10.0, 8 * n, &fine_opts).unwrap();
    let f4 = solve_liquid_star_with(1.25, 10.0, 4 * n, &half_opts).unwrap();
    let r_oracle = (16.0 * f8.radius() - f4.radius()) / 15.0;
    assert!((p.radius() / r_oracle - 1.0).abs() < 1e-8);
    // compare at relative positions so that the radius difference does not enter twice
    for i in (0..=n).step_by(64) {
        let o = (16.0 * f8.rho()[8 * i] - f4.rho()[4 * i]) / 15.0;
        let rel = (p.rho()[i] / o - 1.0).abs();
        assert!(rel < 1e-8, "node {i}: {rel}");
    }
}

#[test]
fn radius_converges_under_refinement() {
    let r = |k: f64| {
        let opts = SolverOptions {
            steps_per_scale: k,
            ..SolverOptions::default()
        };
        solve_liquid_star_with(1.25, 100.0, 256, &opts)
            .unwrap()
            .radius()
    };
    let (a, b, c) = (r(80.0), r(160.0), r(320.0));
    let order = ((a - b) / (b - c)).abs().log2();
    assert!(order > 3.5, "order {order}");
}

#[test]
fn profile_invariants_hold() {
    for (gamma, kappa) in [(1.0, 50.0), (1.1, 1e3), (1.25, 1e4), (1.3, 5.0)] {
        let p = solve_liquid_star(gamma, kappa, 512).unwrap();
        p.validate_equilibrium().unwrap();
        assert!(p.mass().windows(2).all(|w| w[1] >= w[0]));
        assert!(taylor_sign_margin(&p).unwrap() > 0.0);
    }
}

#[test]
fn hydrostatic_residual_is_second_order() {
    let res = |n| {
        solve_liquid_star(1.2, 10.0, n)
            .unwrap()
            .hydrostatic_residual()
    };
    let order = (res(256) / res(512)).log2();
    assert!((order - 2.0).abs() < 0.3, "order {order}");
}

#[test]
fn geometric_grid_is_supported() {
    let opts = SolverOptions {
        spacing: Spacing::Geometric { ratio: 1.002 },
        ..SolverOptions::default()
    };
    let p = solve_liquid_star_with(1.2, 1e4, 1024, &opts).unwrap();
    assert!(matches!(p.grid().spacing(), Spacing::Geometric { .. }));
    assert!(max_rel_density_error(&p) < 1e-7);
}

#[test]
fn gaseous_six_fifths_matches_plummer() {
    let p = solve_gaseous_reference(1.2, 4096, 1e-3).unwrap();
    assert_eq!(p.kappa(), 1.0);
    let err = p
        .nodes()
        .iter()
        .zip(p.rho())
        .map(|(&y, &r)| (r / six_fifths_density(1.0, y) - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-7, "{err}");
    assert!((p.rho().last().unwrap() / 1e-3 - 1.0).abs() < 1e-8);
}

#[test]
fn gaseous_case1_has_compact_support() {
    let p = solve_gaseous_reference(1.25, 2048, 1e-3).unwrap();
    assert_eq!(*p.rho().last().unwrap(), 0.0);
    assert!(p.radius().is_finite() && p.radius() > 1.0);
    // oracle: refined integration of the same ODE
    let opts = SolverOptions {
        steps_per_scale: 3200.0,
        ..SolverOptions::default()
    };
    let fine = solve_gaseous_reference_with(1.25, 8 * 2048, 1e-3, &opts).unwrap();
    assert!((p.total_mass() / fine.total_mass() - 1.0).abs() < 1e-8);
    assert!((p.radius() / fine.radius() - 1.0).abs() < 1e-9);
}

#[test]
fn gaseous_case3_far_field_law() {
    let gamma: f64 = 1.1;
    let p = solve_gaseous_reference(gamma, 200_000, 1e-9).unwrap();
    let amp = (gamma * (4.0 - 3.0 * gamma) / (2.0 * PI * (2.0 - gamma).powi(2)))
        .powf(1.0 / (2.0 - gamma));
    let expo = 2.0 / (2.0 - gamma);
    let dev = |frac: f64| {
        let i = (frac * (p.nodes().len() - 1) as f64) as usize;
        let y = p.nodes()[i];
        (y.powf(expo) * p.rho()[i] / amp - 1.0).abs()
    };
    // the approach is oscillatory in ln r with a slowly shrinking envelope
    let near = (1..=10)
        .map(|k| dev(0.05 + 0.005 * k as f64))
        .fold(0.0, f64::max);
    let far = (1..=10)
        .map(|k| dev(0.5 + 0.05 * k as f64))
        .fold(0.0, f64::max);
    assert!(far < 0.15, "far-field deviation {far}");
    assert!(far < 0.6 * near, "{far} vs {near}");
    let start = p.nodes().len() / 10;
    let pts: Vec<(f64, f64)> = p.nodes()[start..]
        .iter()
        .copied()
        .zip(p.rho()[start..].iter().copied())
        .collect();
    let fit = fit_loglog(&pts).unwrap();
    assert!((fit.slope + expo).abs() < 0.1, "slope {}", fit.slope);
}

#[test]
fn scaled_profile_matches_closed_form_for_six_fifths() {
    let reference = solve_gaseous_reference(1.2, 8192, 1e-4).unwrap();
    for kappa in [10.0, 1e3] {
        let p = scaled_profile(&reference, kappa, 1024).unwrap();
        assert!((p.radius() / six_fifths_radius(kappa) - 1.0).abs() < 1e-6);
        let err = max_rel_density_error(&p);
        assert!(err < 1e-5, "kappa {kappa}: {err}");
    }
}

#[test]
fn scaled_profile_matches_direct_solve_case1() {
    let reference = solve_gaseous_reference(1.25, 4096, 1e-3).unwrap();
    let scaled = scaled_profile(&reference, 100.0, 4096).unwrap();
    let direct = solve_liquid_star(1.25, 100.0, 4096).unwrap();
    assert!((scaled.radius() / direct.radius() - 1.0).abs() < 1e-4);
    let dev = scaled
        .nodes()
        .iter()
        .zip(scaled.rho())
        .map(|(&y, &r)| (r / direct.sample(y.min(direct.radius())).0 - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(dev < 1e-4, "{dev}");
}

#[test]
fn scaled_profile_rejects_unresolved_reference() {
    let reference = solve_gaseous_reference(1.1, 256, 1e-2).unwrap();
    assert!(scaled_profile(&reference, 1e3, 256).is_err());
    assert!(scaled_profile(&reference, 1.0, 256).is_err());
}

#[test]
fn taylor_margin_closed_form() {
    let kappa = 4.0;
    let p = solve_liquid_star(1.2, kappa, 2048).unwrap();
    let r = six_fifths_radius(kappa);
    let expected = six_fifths_mass(kappa, r) / (r * r);
    let got = taylor_sign_margin(&p).unwrap();
    assert!((got / expected - 1.0).abs() < 1e-8, "{got} vs {expected}");
}

#[test]
fn taylor_margin_vanishes_as_kappa_tends_to_one() {
    let m1 = taylor_sign_margin(&solve_liquid_star(1.2, 1.01, 64).unwrap()).unwrap();
    let m2 = taylor_sign_margin(&solve_liquid_star(1.2, 1.0001, 64).unwrap()).unwrap();
    // margin ~ R for a nearly uniform star
    assert!(m2 > 0.0 && m2 < 0.2 * m1, "{m2} vs {m1}");
}

#[test]
fn synthetic_profile_with_bad_margin_is_rejected() {
    let grid = RadialGrid::uniform(1.0, 4).unwrap();
    let p = StarProfile::from_samples(
        1.2,
        2.0,
        1.0,
        grid,
        vec![2.0, 1.8, 1.5, 1.2, 1.0],
        vec![0.0; 5],
    )
    .unwrap();
    assert!(taylor_sign_margin(&p).is_err());
}

#[test]
fn csv_round_trip_is_bit_exact() {
    let p = solve_liquid_star(1.15, 30.0, 64).unwrap();
    let text = p.to_csv();
    assert!(text.starts_with("# gamma=1.15\n# kappa=30.0\n# R="));
    let back = StarProfile::from_csv(&text).unwrap();
    assert_eq!(back, p);
}

#[test]
fn sample_interpolates_between_nodes() {
    let p = solve_liquid_star(1.2, 100.0, 256).unwrap();
    for k in 0..50 {
        let y = p.radius() * (k as f64 + 0.37) / 50.0;
        let (rho, _) = p.sample(y);
        assert!((rho / six_fifths_density(100.0, y) - 1.0).abs() < 1e-7);
    }
}
