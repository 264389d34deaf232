use std::f64::consts::PI;

use kapitza::contour::Branch;
use kapitza::oracle::{band_edges, bloch_energy, well_state};
use kapitza::series::{
    energy0_series, mathieu_reference, oscillatory_energy, oscillatory_energy_0, oscillatory_energy_pi, rotating_energy,
    rotating_parity_pair, rotating_wavefunction, rotating_wavefunction_normalized, EstimateKind, MathieuRegime,
    PRINTED_ENERGY_TERMS, ROTATING_TERMS,
};
use kapitza::{PendulumParams, Well};
use proptest::prelude::*;

fn params(a: f64, b: f64) -> PendulumParams {
    PendulumParams::new(a, b).unwrap()
}

fn fixture(h: f64, n: u64) -> (f64, Option<f64>) {
    let rows: Vec<serde_json::Value> = serde_json::from_str(include_str!("fixtures/mathieu.json")).unwrap();
    let row = rows
        .iter()
        .find(|r| r["h"].as_f64() == Some(h) && r["n"].as_u64() == Some(n))
        .unwrap();
    let parse = |v: &serde_json::Value| v.as_str().unwrap().parse::<f64>().unwrap();
    (parse(&row["a"]), row.get("b").map(parse))
}

#[test]
fn ground_state_example() {
    let v = oscillatory_energy_0(&params(0.0, 1e4), 0, PRINTED_ENERGY_TERMS);
    assert!((v.value - 99.749375).abs() < 1e-12);
    assert_eq!(v.terms.len(), 3);
}

#[test]
fn rotating_example() {
    let v = rotating_energy(&params(0.0, 1.0), 10.0, 3);
    assert!((v.value - 100.5003125).abs() < 1e-12);
    assert_eq!(v.estimate_kind, EstimateKind::NextTerm);
    assert!(v.advisory.is_none());
    assert!(rotating_energy(&params(0.0, 400.0), 10.0, 3).advisory.is_some());
}

#[test]
fn shallow_well_advisory() {
    assert!(oscillatory_energy_0(&params(0.0, 100.0), 0, 3).advisory.is_none());
    assert!(oscillatory_energy_0(&params(0.0, 100.0), 3, 3).advisory.is_some());
}

#[test]
fn series_carries_printed_then_generated_terms() {
    let s = energy0_series();
    assert_eq!(s.len(), 5);
    assert_eq!(s.power(0), 1);
    assert_eq!(s.power(4), -3);
}

#[test]
fn strong_coupling_reference_approaches_fixture() {
    for n in 0..3u64 {
        let mut last = f64::INFINITY;
        for h in [5.0, 25.0] {
            let r = mathieu_reference(n as u32, h, MathieuRegime::Strong).unwrap();
            let (a, _) = fixture(h, n);
            let err = (r.a - a).abs();
            assert!(err < last, "n={n} h={h}: {err}");
            last = err;
        }
        assert!(last < 0.2 * (n as f64 + 1.0), "n={n}: {last}");
    }
}

#[test]
fn strong_coupling_pairs_b_with_next_a() {
    let r = mathieu_reference(2, 25.0, MathieuRegime::Strong).unwrap();
    let lower = mathieu_reference(1, 25.0, MathieuRegime::Strong).unwrap();
    assert_eq!(r.b, Some(lower.a));
}

// The weak series is the common part of a_n and b_n; the splitting enters at h^n.
#[test]
fn weak_coupling_reference_against_oracle() {
    let h = 0.1;
    let edges = band_edges(&params(0.0, 4.0 * h), 4).unwrap();
    for n in 2..=4usize {
        let r = mathieu_reference(n as u32, h, MathieuRegime::Weak).unwrap();
        let e = &edges[n];
        let mean = 0.5 * (e.a + e.b.unwrap()) - 2.0 * h;
        assert!((r.a - mean).abs() < 1e-5, "n={n}: {} vs {mean}", r.a);
    }
    let (a, b) = fixture(1.0, 3);
    let r = mathieu_reference(3, 1.0, MathieuRegime::Weak).unwrap();
    assert!((r.a - 0.5 * (a + b.unwrap())).abs() < 1e-3);
}

#[test]
fn oscillatory_error_shrinks_with_depth() {
    for (a, mu) in [(0.0, 0u32), (2.0, 1), (-3.0, 2)] {
        let mut last = f64::INFINITY;
        for b in [400.0, 1600.0, 6400.0] {
            let p = params(a, b);
            let exact = well_state(&p, Well::Zero, mu).unwrap().energy;
            let err = (oscillatory_energy_0(&p, mu, 3).value - exact).abs();
            assert!(err < last, "A={a} mu={mu} B={b}: {err}");
            last = err;
        }
    }
}

#[test]
fn pi_well_series_against_oracle() {
    let p = params(1.5, 2500.0);
    for mu in 0..3 {
        let exact = well_state(&p, Well::Pi, mu).unwrap().energy;
        let v = oscillatory_energy_pi(&p, mu, 3);
        assert!((v.value - exact).abs() < 3.0 * v.error_estimate.max(1e-9), "mu={mu}: {} vs {exact}", v.value);
    }
}

#[test]
fn well_difference_tends_to_twice_a() {
    let a = 2.0;
    let mut last = f64::INFINITY;
    for b in [400.0, 1600.0, 6400.0] {
        let p = params(a, b);
        let diff = well_state(&p, Well::Pi, 0).unwrap().energy - well_state(&p, Well::Zero, 0).unwrap().energy;
        let dev = (diff / (2.0 * a) - 1.0).abs();
        assert!(dev < last, "B={b}: {dev}");
        last = dev;
    }
    assert!(last < 0.01);
}

#[test]
fn rotating_series_against_bloch_oracle() {
    let p = params(1.0, 4.0);
    for nu in [10.0, 10.5, 15.0] {
        let exact = bloch_energy(&p, nu).unwrap();
        let v = rotating_energy(&p, nu, ROTATING_TERMS).value;
        assert!(((v - exact) / exact).abs() < 1e-4, "nu={nu}: {v} vs {exact}");
    }
}

#[test]
fn rotating_normalized_wavefunction_has_unit_norm() {
    let p = params(0.5, 2.0);
    let n = 400;
    let h = 2.0 * PI / n as f64;
    let norm: f64 = (0..n)
        .map(|i| rotating_wavefunction_normalized(&p, 12.0, i as f64 * h, Branch::Plus, 3).norm_sqr() * h)
        .sum();
    assert!((norm - 1.0).abs() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pi_well_is_a_reflection(a in -10.0..10.0f64, b in 100.0..1e5f64, mu in 0u32..6, terms in 1usize..=5) {
        let p = params(a, b);
        let x = oscillatory_energy(&p, Well::Pi, mu, terms).value;
        let y = oscillatory_energy_0(&params(-a, b), mu, terms).value;
        prop_assert_eq!(x.to_bits(), y.to_bits());
    }

    #[test]
    fn energy_increases_with_mu(a in -5.0..5.0f64, b in 1e3..1e6f64, mu in 0u32..5) {
        let p = params(a, b);
        prop_assert!(oscillatory_energy_0(&p, mu + 1, 3).value > oscillatory_energy_0(&p, mu, 3).value);
    }

    #[test]
    fn next_term_estimate_is_omitted_term(a in -5.0..5.0f64, b in 1e3..1e6f64, mu in 0u32..4, terms in 1usize..=4) {
        let p = params(a, b);
        let short = oscillatory_energy_0(&p, mu, terms);
        let long = oscillatory_energy_0(&p, mu, terms + 1);
        prop_assert_eq!(short.estimate_kind, EstimateKind::NextTerm);
        let omitted = long.terms[terms].abs();
        if omitted > 0.0 {
            prop_assert!((short.error_estimate - omitted).abs() <= 1e-12 * omitted);
        }
    }

    #[test]
    fn rotating_energy_even_in_nu(a in -2.0..2.0f64, b in 0.1..4.0f64, nu in 3.0..30.0f64) {
        let p = params(a, b);
        prop_assert_eq!(rotating_energy(&p, nu, 4).value, rotating_energy(&p, -nu, 4).value);
    }

    #[test]
    fn rotating_pair_parity_and_conjugation(a in -2.0..2.0f64, b in 0.1..4.0f64, nu in 3.0..30.0f64, phi in -3.0..3.0f64) {
        let p = params(a, b);
        let plus = rotating_wavefunction(&p, nu, phi, Branch::Plus, 3);
        let minus = rotating_wavefunction(&p, nu, phi, Branch::Minus, 3);
        prop_assert!((plus - minus.conj()).norm() < 1e-12 * plus.norm().max(1.0));
        let (c, s) = rotating_parity_pair(&p, nu, phi, 3);
        let (c2, s2) = rotating_parity_pair(&p, nu, -phi, 3);
        prop_assert!((c - c2).norm() < 1e-12 * c.norm().max(1.0));
        prop_assert!((s + s2).norm() < 1e-12 * s.norm().max(1.0));
        prop_assert!(c.im.abs() < 1e-12 * c.norm().max(1.0));
        prop_assert!(s.re.abs() < 1e-12 * s.norm().max(1.0));
    }
}
