use std::f64::consts::PI;

use kapitza::potential::{PhysicalParams, WhittakerHillParams};
use kapitza::series::oscillatory_energy_0;
use kapitza::{Error, PendulumParams, Well};
use proptest::prelude::*;

fn params(a: f64, b: f64) -> PendulumParams {
    PendulumParams::new(a, b).unwrap()
}

#[test]
fn summit_examples() {
    let g = params(2.0, 10.0).geometry().unwrap();
    assert!((g.summit_cos + 0.1).abs() < 1e-15);
    assert!((g.summit_height - 10.1).abs() < 1e-12);
    assert!((params(2.0, 10.0).potential(g.summit_angle) - 10.1).abs() < 1e-12);
    assert!(matches!(params(10.0, 4.0).geometry(), Err(Error::NotDoubleWell { .. })));
}

#[test]
fn turning_point_near_harmonic_estimate() {
    let p = params(0.0, 1e4);
    let e = oscillatory_energy_0(&p, 0, 3).value;
    let (l, r) = p.turning_points(e, Well::Zero).unwrap();
    assert_eq!(l, -r);
    let s2 = r.sin().powi(2);
    assert!((s2 / 0.01 - 1.0).abs() < 0.1, "sin^2 = {s2}");
    assert!(matches!(params(0.0, 10.0).turning_points(-1.0, Well::Zero), Err(Error::EnergyOutOfRange { .. })));
}

#[test]
fn pi_well_turning_points_bracket_pi() {
    let p = params(1.0, 50.0);
    let (l, r) = p.turning_points(10.0, Well::Pi).unwrap();
    assert!(l < PI && PI < r);
    assert!((l + r - 2.0 * PI).abs() < 1e-12);
}

#[test]
fn whittaker_hill_examples() {
    let wh = params(1.0, 4.0).to_whittaker_hill(0.0);
    assert_eq!(wh.theta2 / wh.theta1, 2.0);
    assert_eq!(params(0.0, 3.0).to_whittaker_hill(1.0).theta1, 0.0);
}

#[test]
fn critical_frequency_gives_half_ratio() {
    let base = PhysicalParams { mass: 1.3, length: 0.7, omega0: 2.0, omega: 1.0, z0: 0.2, hbar: 0.9 };
    let (_, wc) = PendulumParams::from_physical(&base).unwrap();
    let (p, _) = PendulumParams::from_physical(&PhysicalParams { omega: wc, ..base }).unwrap();
    assert!((p.b / p.a - 0.5).abs() < 1e-14);
    let (q, _) = PendulumParams::from_physical(&PhysicalParams { hbar: base.hbar / 2.0, ..base }).unwrap();
    let (p0, _) = PendulumParams::from_physical(&base).unwrap();
    assert!((q.a / p0.a - 4.0).abs() < 1e-13 && (q.b / p0.b - 4.0).abs() < 1e-13);
    assert!(matches!(
        PendulumParams::from_physical(&PhysicalParams { z0: 0.0, ..base }),
        Err(Error::NonPositiveInput("z0"))
    ));
}

proptest! {
    #[test]
    fn potential_symmetries(a in -50.0..50.0f64, b in 0.01..500.0f64, phi in -10.0..10.0f64) {
        let p = params(a, b);
        let u = p.potential(phi);
        let tol = 1e-12 * (a.abs() + b);
        prop_assert!((u - p.potential(-phi)).abs() <= tol);
        prop_assert!((u - p.potential(phi + 2.0 * PI)).abs() <= tol);
        prop_assert!((p.potential(phi + PI) - p.mirrored().potential(phi)).abs() <= tol);
    }

    #[test]
    fn summit_is_grid_maximum(a in -20.0..20.0f64, b in 10.5..200.0f64) {
        let p = params(a, b);
        let g = p.geometry().unwrap();
        let grid_max = (0..=20000)
            .map(|i| p.potential(PI * i as f64 / 20000.0))
            .fold(f64::MIN, f64::max);
        prop_assert!(grid_max <= g.summit_height * (1.0 + 1e-12));
        prop_assert!((grid_max - g.summit_height).abs() <= 1e-6 * g.summit_height);
        prop_assert!((p.potential(g.summit_angle) - g.summit_height).abs() <= 1e-12 * g.summit_height);
    }

    #[test]
    fn turning_points_solve(a in -5.0..5.0f64, b in 10.0..1000.0f64, frac in 0.01..0.99f64, pi_well in any::<bool>()) {
        let p = params(a, b);
        let well = if pi_well { Well::Pi } else { Well::Zero };
        let g = p.geometry().unwrap();
        let bottom = p.potential(well.center());
        let e = bottom + frac * (g.summit_height - bottom);
        let (l, r) = p.turning_points(e, well).unwrap();
        let tol = 1e-10 * e.abs().max(1.0);
        prop_assert!((p.potential(l) - e).abs() < tol);
        prop_assert!((p.potential(r) - e).abs() < tol);
        prop_assert!(l < well.center() && well.center() < r);
    }

    #[test]
    fn whittaker_hill_round_trip(a in -100.0..100.0f64, b in 0.01..1000.0f64, e in -100.0..1000.0f64) {
        let p = params(a, b);
        let wh = p.to_whittaker_hill(e);
        let (q, e2) = PendulumParams::from_whittaker_hill(&wh).unwrap();
        prop_assert!((q.a - a).abs() <= 1e-14 * a.abs());
        prop_assert!((q.b - b).abs() <= 1e-14 * b);
        prop_assert!((e2 - e).abs() <= 1e-14 * (e.abs() + b));
    }

    // psi'' + (E - u) psi = 0 in x = phi/2 reads psi_xx + (theta0 + theta1 cos 2x + theta2 cos 4x) psi = 0.
    #[test]
    fn whittaker_hill_coefficients_match_potential(a in -10.0..10.0f64, b in 0.1..100.0f64, e in -20.0..200.0f64, phi in -4.0..4.0f64) {
        let p = params(a, b);
        let WhittakerHillParams { theta0, theta1, theta2 } = p.to_whittaker_hill(e);
        let lhs = theta0 + theta1 * phi.cos() + theta2 * (2.0 * phi).cos();
        prop_assert!((lhs - 4.0 * (e - p.potential(phi))).abs() <= 1e-11 * (e.abs() + a.abs() + b));
    }

    #[test]
    fn double_well_iff_above_critical(
        mass in 0.1..3.0f64, length in 0.1..3.0f64, omega0 in 0.1..3.0f64,
        omega in 0.1..30.0f64, z0 in 0.01..1.0f64, hbar in 0.1..2.0f64,
    ) {
        let q = PhysicalParams { mass, length, omega0, omega, z0, hbar };
        let (p, wc) = PendulumParams::from_physical(&q).unwrap();
        prop_assume!((omega / wc - 1.0).abs() > 1e-9);
        prop_assert_eq!(p.is_double_well(), omega > wc);
        prop_assert_eq!(p.geometry().is_ok(), omega > wc);
    }
}
