use std::f64::consts::PI;

use super::*;
use crate::numerics::{gauss_composite, RadialGrid};
use crate::steady_state::{six_fifths_radius, solve_liquid_star, StarProfile};

fn synthetic(
    kappas: &[f64],
    mu0: impl Fn(f64) -> f64,
    c1: impl Fn(f64) -> f64,
) -> Vec<ScalingRecord> {
    kappas
        .iter()
        .map(|&k| ScalingRecord {
            kappa: k,
            radius: 1.0,
            mu_star: -mu0(k),
            mu0: Some(mu0(k)),
            c1: c1(k),
            c1_radius: f64::NAN,
            q_const: 0.0,
            form_l11: 0.0,
            weight_11: 1.0,
            taylor_margin: 1.0,
            residual: 0.0,
            sign_changes: 0,
            status: RecordStatus::Unstable,
        })
        .collect()
}

fn check<'a>(v: &'a RegimeVerdict, name: &str) -> &'a ClaimCheck {
    v.checks
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("no check {name}"))
}

#[test]
fn constant_density_coefficient_sits_on_the_boundary() {
    let (c, radius, n) = (2.5, 0.8, 200);
    let grid = RadialGrid::uniform(radius, n).unwrap();
    let mass: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|y| 4.0 * PI / 3.0 * c * y.powi(3))
        .collect();
    let p = StarProfile::from_samples(1.2, c, c, grid, vec![c; n + 1], mass).unwrap();
    let (c1, at) = compute_c1(&p);
    assert!((c1 / (4.0 * PI / 3.0 * c * radius) - 1.0).abs() < 1e-14);
    assert_eq!(at, radius);
}

#[test]
fn coefficient_agrees_with_fine_grid_maximum() {
    let coarse = solve_liquid_star(1.25, 100.0, 2048).unwrap();
    let fine = solve_liquid_star(1.25, 100.0, 16 * 2048).unwrap();
    let brute = (1..fine.nodes().len())
        .map(|i| fine.gravity(i))
        .fold(0.0, f64::max);
    let (c1, _) = compute_c1(&coarse);
    assert!((c1 / brute - 1.0).abs() < 1e-4, "{c1} vs {brute}");
}

#[test]
fn six_fifths_maximizer_matches_closed_form() {
    for kappa in [1e2, 1e3, 1e4] {
        let p = solve_liquid_star(1.2, kappa, 2048).unwrap();
        let (_, at) = compute_c1(&p);
        assert!(
            (at / six_fifths_maximizer(kappa) - 1.0).abs() < 1e-3,
            "kappa {kappa}: {at}"
        );
    }
}

#[test]
fn six_fifths_constant_form_matches_quadrature() {
    let kappa: f64 = 1e3;
    let p = solve_liquid_star(1.2, kappa, default_cells(kappa)).unwrap();
    let r = scaling_record(&p, &Default::default()).unwrap();
    let (a, b) = (kappa.powf(-0.4), 2.0 * PI / 9.0 * kappa.powf(0.4));
    let radius = six_fifths_radius(kappa);
    // (4 − 3γ) y³ ∂_y ρ^γ with ρ^γ = (a + b y²)^{−3}
    let integrand = |y: f64| 0.4 * y.powi(3) * (-6.0 * b * y) * (a + b * y * y).powi(-4);
    let exact = gauss_composite(integrand, 0.0, radius, 4000) + 3.6 * radius.powi(3);
    assert!(
        (r.form_l11 / exact - 1.0).abs() < 1e-4,
        "{} vs {exact}",
        r.form_l11
    );
}

#[test]
fn record_invariants_hold() {
    let recs = sweep(1.2, &[1e2, 1e3, 1e4], &SweepOptions::default()).unwrap();
    for r in &recs {
        assert!(r.is_unstable(), "kappa {} should be unstable", r.kappa);
        assert!(r.c1 >= 0.0 && r.radius > 0.0 && r.taylor_margin > 0.0);
        assert_eq!(r.q_const, r.form_l11 / r.weight_11);
        assert!(r.mu_star <= r.q_const);
        assert_eq!(r.sign_changes, 0);
    }
    assert!(recs.windows(2).all(|w| w[0].c1 <= w[1].c1));
}

#[test]
fn single_point_sweep_is_the_composition() {
    let p = solve_liquid_star(1.25, 300.0, 1024).unwrap();
    let opts = SweepOptions {
        cells: Some(1024),
        ..Default::default()
    };
    let rec = sweep(1.25, &[300.0], &opts).unwrap().remove(0);
    let mode = crate::spectral::growth_rate_of(&p).unwrap();
    assert_eq!(rec.mu_star, mode.mu_star);
    assert_eq!((rec.c1, rec.c1_radius), compute_c1(&p));
}

#[test]
fn sweep_is_invariant_under_input_order() {
    let opts = SweepOptions {
        cells: Some(512),
        ..Default::default()
    };
    let a = sweep(1.1, &[20.0, 200.0, 50.0], &opts).unwrap();
    let b = sweep(1.1, &[200.0, 50.0, 20.0], &opts).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        a.iter().map(|r| r.kappa).collect::<Vec<_>>(),
        vec![20.0, 50.0, 200.0]
    );
}

#[test]
fn sweep_rejects_bad_input() {
    assert!(sweep(1.2, &[], &SweepOptions::default()).is_err());
    assert!(sweep(1.2, &[1.0], &SweepOptions::default()).is_err());
    assert!(sweep(2.5, &[10.0], &SweepOptions::default()).is_err());
}

#[test]
fn failures_are_recorded_not_fatal() {
    let opts = SweepOptions {
        cells: Some(1),
        ..Default::default()
    };
    let recs = sweep(1.2, &[10.0, 100.0], &opts).unwrap();
    assert_eq!(recs.len(), 2);
    assert!(recs
        .iter()
        .all(|r| matches!(r.status, RecordStatus::Failed(_))));
}

#[test]
fn geometric_kappas_cover_the_range() {
    let ks = geometric_kappas(1e2, 1e5, 8).unwrap();
    assert_eq!(ks.len(), 25);
    assert!((ks[0] - 1e2).abs() < 1e-9 && (ks[24] / 1e5 - 1.0).abs() < 1e-12);
    assert!((ks[8] / 1e3 - 1.0).abs() < 1e-12);
    assert!(geometric_kappas(1.0, 10.0, 8).is_err());
    assert_eq!(default_cells(1e2), 4096);
    assert_eq!(default_cells(150.0), 6144);
}

#[test]
fn linear_growth_passes_case_one_exactly() {
    let ks = geometric_kappas(1e2, 1e5, 8).unwrap();
    let recs = synthetic(&ks, |k| k, |k| k.powf(0.625));
    let v = verify_regime(1.25, &recs, &RegimeOptions::default()).unwrap();
    assert!(v.pass, "{v:?}");
    assert_eq!(v.case_id, 1);
    assert!((v.slopes["mu0"] - 1.0).abs() < 1e-12);
    assert!(v.residuals["mu0"] < 1e-12);
    assert!((v.slopes["C1"] - 0.625).abs() < 1e-12);
}

#[test]
fn wrong_growth_exponent_fails_case_one() {
    let ks = geometric_kappas(1e2, 1e5, 4).unwrap();
    let recs = synthetic(&ks, |k| k.powf(0.8), |k| k.powf(0.625));
    let v = verify_regime(1.25, &recs, &RegimeOptions::default()).unwrap();
    assert!(!v.pass);
    assert!(!check(&v, "mu0_slope").pass);
    assert!(check(&v, "C1_slope").pass);
}

#[test]
fn log_corrected_growth_passes_case_two() {
    let ks = geometric_kappas(1e2, 1e5, 8).unwrap();
    let recs = synthetic(&ks, |k| 3.0 * k / k.ln(), |k| k.powf(0.6));
    let v = verify_regime(1.2, &recs, &RegimeOptions::default()).unwrap();
    assert!(v.pass, "{v:?}");
    assert!(check(&v, "mu0_log_kappa_over_kappa_spread").value.abs() < 1e-12);
}

#[test]
fn case_three_needs_the_margin() {
    let ks = geometric_kappas(1e2, 1e5, 4).unwrap();
    let fast = synthetic(&ks, |k| k.powf(0.8), |k| k.powf(0.55));
    assert!(
        verify_regime(1.1, &fast, &RegimeOptions::default())
            .unwrap()
            .pass
    );
    let slow = synthetic(&ks, |k| k.powf(0.6), |k| k.powf(0.55));
    assert!(
        !verify_regime(1.1, &slow, &RegimeOptions::default())
            .unwrap()
            .pass
    );
}

#[test]
fn stable_records_are_insufficient() {
    let ks = geometric_kappas(1e2, 1e5, 2).unwrap();
    let mut recs = synthetic(&ks, |k| k, |k| k);
    for r in &mut recs {
        r.mu0 = None;
        r.mu_star = 1.0;
        r.status = RecordStatus::Stable;
    }
    let err = verify_regime(1.25, &recs, &RegimeOptions::default()).unwrap_err();
    assert!(
        err.to_string().contains("insufficient unstable records"),
        "{err}"
    );
    let short = synthetic(&[1e2, 2e2, 5e2, 1e3], |k| k, |k| k);
    assert!(verify_regime(1.25, &short, &RegimeOptions::default()).is_err());
}

#[test]
fn case_ids_follow_gamma() {
    assert_eq!(case_of(1.0).unwrap(), 3);
    assert_eq!(case_of(1.1).unwrap(), 3);
    assert_eq!(case_of(1.2).unwrap(), 2);
    assert_eq!(case_of(1.3).unwrap(), 1);
    assert!(case_of(4.0 / 3.0).is_err());
    assert!(case_of(0.9).is_err());
}

#[test]
fn slopes_are_invariant_under_kappa_rescaling() {
    let ks = geometric_kappas(1e2, 1e5, 4).unwrap();
    let base = synthetic(&ks, |k| 2.0 * k.powf(1.03), |k| k.powf(0.6));
    let shifted: Vec<ScalingRecord> = base
        .iter()
        .map(|r| ScalingRecord {
            kappa: r.kappa * 7.0,
            ..r.clone()
        })
        .collect();
    let a = verify_regime(1.25, &base, &RegimeOptions::default()).unwrap();
    let b = verify_regime(1.25, &shifted, &RegimeOptions::default()).unwrap();
    assert!((a.slopes["mu0"] - b.slopes["mu0"]).abs() < 1e-12);
    assert!((a.slopes["C1"] - b.slopes["C1"]).abs() < 1e-12);
}

#[test]
fn verdict_serializes_to_json() {
    let ks = geometric_kappas(1e2, 1e5, 2).unwrap();
    let v = verify_regime(
        1.25,
        &synthetic(&ks, |k| k, |k| k.powf(0.625)),
        &RegimeOptions::default(),
    )
    .unwrap();
    let json: serde_json::Value = serde_json::from_str(&v.to_json()).unwrap();
    for key in ["gamma", "case_id", "slopes", "residuals", "pass"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert_eq!(json["case_id"], 1);
}

#[test]
fn power_law_form_gives_exact_slope() {
    let ks = geometric_kappas(1e2, 1e5, 8).unwrap();
    let recs: Vec<ScalingRecord> = synthetic(&ks, |k| k, |k| k)
        .into_iter()
        .map(|r| ScalingRecord {
            form_l11: -r.kappa.powf(0.125),
            weight_11: r.kappa.powf(-0.875),
            ..r
        })
        .collect();
    let f = case1_form_asymptotics(1.25, &recs).unwrap();
    assert!((f.form_slope - 0.125).abs() < 1e-12);
    assert!((f.form_slope_full - 0.125).abs() < 1e-12);
    assert!((f.ratio_slope - 1.0).abs() < 1e-12);
    assert!((f.weight_slope + 0.875).abs() < 1e-12);
    assert!(f.negative_at_large_kappa);
    assert!(case1_form_asymptotics(1.2, &recs).is_err());
}

#[test]
fn positive_form_is_flagged() {
    let ks = geometric_kappas(1e2, 1e5, 2).unwrap();
    let recs: Vec<ScalingRecord> = synthetic(&ks, |k| k, |k| k)
        .into_iter()
        .map(|r| ScalingRecord {
            form_l11: r.kappa,
            ..r
        })
        .collect();
    assert!(
        !case1_form_asymptotics(1.25, &recs)
            .unwrap()
            .negative_at_large_kappa
    );
}

#[test]
fn sweep_csv_round_trips() {
    let ks = [1e2, 1e3];
    let mut recs = synthetic(&ks, |k| k * 0.3, |k| k.sqrt());
    recs.push(ScalingRecord {
        mu0: None,
        status: RecordStatus::Stable,
        ..recs[0].clone()
    });
    recs.push(ScalingRecord {
        status: RecordStatus::Failed("no boundary, really".into()),
        ..recs[0].clone()
    });
    let csv = records_to_csv(&[("gamma".into(), "1.2".into())], &recs);
    assert!(
        csv.starts_with("# gamma=1.2\nkappa,R,mu_star,mu0,C1,q_const,form_L11,weight_11,status\n")
    );
    let back = records_from_csv(&csv).unwrap();
    assert_eq!(back.len(), recs.len());
    for (a, b) in back.iter().zip(&recs) {
        assert_eq!(
            (a.kappa, a.mu_star, a.mu0, a.c1),
            (b.kappa, b.mu_star, b.mu0, b.c1)
        );
        assert_eq!(
            (a.q_const, a.form_l11, a.weight_11),
            (b.q_const, b.form_l11, b.weight_11)
        );
    }
    assert_eq!(back[2].status, RecordStatus::Stable);
    assert_eq!(
        back[3].status,
        RecordStatus::Failed("no boundary; really".into())
    );
    assert!(records_from_csv("kappa,R\n1,2\n").is_err());
}

#[test]
fn escape_time_closed_form() {
    assert_eq!(escape_time(1e-2, 1e-2, 3.0).unwrap(), 0.0);
    assert!((escape_time(1.0, std::f64::consts::E, 1.0).unwrap() - 1.0).abs() < 1e-15);
    let t = escape_time(1e-6, 1e-2, 4.0).unwrap();
    assert!((t - 0.5 * 1e4f64.ln()).abs() < 1e-12);
    assert!(escape_time(1e-1, 1e-2, 1.0).is_err());
    assert!(escape_time(0.0, 1e-2, 1.0).is_err());
    assert!(escape_time(1e-4, 1e-2, 0.0).is_err());
}
