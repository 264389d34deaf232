//! Acceptance suite. Every test prints one `PASS`/`FAIL` line and asserts the verdict.

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kapitza::contour::{
    energy_coefficients, exact_order_integral, invert_to_energy, numeric_order_integral, reversion_residual,
    ExponentSeries, PathSpec,
};
use kapitza::exact::{Poly, Var};
use kapitza::oracle::{
    band_edges, bloch_energy, characteristic_exponent, count_nodes, eigenfunction, eigenvalues, well_spectrum,
    FourierMatrixSpec, Sector,
};
use kapitza::quadrature::integrate;
use kapitza::series::{oscillatory_energy_0, oscillatory_energy_pi, printed_energy0_coefficients, rotating_energy, ROTATING_TERMS};
use kapitza::tunneling::{splitting_report, tunneling_coupling, ActionChoice};
use kapitza::wavefn::{
    canonical_monodromy, parabolic_cylinder_all, parabolic_cylinder_complex, sips_coefficients,
    sips_coefficients_recursive, BarrierForm, BarrierWave, Kind,
};
use kapitza::{PendulumParams, Well};

fn verdict(id: &str, ok: bool, detail: String) {
    println!("{} criterion {id}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {id}: {detail}");
}

fn params(a: f64, b: f64) -> PendulumParams {
    PendulumParams::new(a, b).unwrap()
}

#[test]
fn criterion_01_eigenvalue_series_against_oracle() {
    let start = Instant::now();
    let mut worst_ratio = 0.0f64;
    let mut failures = Vec::new();
    for a in [0.0, 1.0, 5.0] {
        for b in [2500.0, 1e4] {
            let p = params(a, b);
            let (_, states) = well_spectrum(&p, 16).unwrap();
            for mu in 0..=3u32 {
                let exact = states.iter().find(|s| s.well == Well::Zero && s.mu == mu).unwrap().energy;
                let errors: Vec<f64> = (1..=5).map(|t| (oscillatory_energy_0(&p, mu, t).value - exact).abs()).collect();
                if !errors.windows(2).all(|w| w[1] < w[0]) {
                    failures.push(format!("A={a} B={b} mu={mu}: not monotone {errors:?}"));
                }
                for terms in 1..=3 {
                    let est = oscillatory_energy_0(&p, mu, terms).error_estimate;
                    let ratio = errors[terms - 1] / est;
                    worst_ratio = worst_ratio.max(ratio);
                    if ratio > 10.0 {
                        failures.push(format!("A={a} B={b} mu={mu} terms={terms}: error/estimate {ratio:.2}"));
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = failures.is_empty() && secs < 10.0;
    verdict("1", ok, format!("worst error/estimate {worst_ratio:.2} (<= 10), monotone in order, {secs:.2} s; {failures:?}"));
}

#[test]
fn criterion_02_pi_well_symmetry() {
    let mut bits_equal = true;
    let mut worst = 0.0f64;
    for a in [0.3, 1.0, 5.0] {
        for b in [100.0, 2500.0, 1e4] {
            for mu in 0..4 {
                for terms in 1..=5 {
                    let x = oscillatory_energy_pi(&params(a, b), mu, terms).value;
                    let y = oscillatory_energy_0(&params(-a, b), mu, terms).value;
                    bits_equal &= x.to_bits() == y.to_bits();
                }
            }
            for sector in [Sector::Periodic, Sector::Antiperiodic] {
                let e1 = eigenvalues(&FourierMatrixSpec::auto(params(a, b), sector), 12).unwrap();
                let e2 = eigenvalues(&FourierMatrixSpec::auto(params(-a, b), sector), 12).unwrap();
                for (x, y) in e1.energies.iter().zip(&e2.energies) {
                    worst = worst.max((x - y).abs());
                }
            }
        }
    }
    verdict("2", bits_equal && worst < 1e-10, format!("series bit-identical: {bits_equal}; oracle max |E(A) - E(-A)| = {worst:.2e}"));
}

#[test]
fn criterion_03_residue_calculus() {
    let mut rng = ChaCha8Rng::seed_from_u64(20261015);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let a = rng.gen_range(-5.0..5.0);
        let b: f64 = rng.gen_range(400.0..1e4);
        let mu = rng.gen_range(0..4) as f64;
        let energy = -a + 2.0 * b.sqrt() * (mu + 0.5);
        for l in -1..=6 {
            let numeric = numeric_order_integral(l, energy, a, &PathSpec::default()).unwrap();
            let exact = exact_order_integral(l, energy, a);
            worst = worst.max((numeric.mu - Complex64::new(exact, 0.0)).norm() / exact.abs().max(1.0));
        }
    }
    let zero_point = ExponentSeries::generate(2).at(0);
    let exact_half = zero_point == Poly::ratio(-1, 2);
    verdict("3", worst < 1e-8 && exact_half, format!("max relative deviation {worst:.2e} over 20 points, l = -1..=6; v_0 term = {zero_point}"));
}

#[test]
fn criterion_04_series_reversion() {
    let generated = invert_to_energy(3).coefficients;
    let printed = printed_energy0_coefficients();
    let reproduces = generated == printed;
    let round_trip = (1..=6).all(|n| reversion_residual(&energy_coefficients(n)).iter().all(|r| r.is_zero()));
    verdict("4", reproduces && round_trip, format!("printed coefficients reproduced: {reproduces}; exact round trip through 6 terms: {round_trip}"));
}

fn mathieu_fixture() -> Vec<(f64, usize, f64, Option<f64>)> {
    let rows: Vec<serde_json::Value> = serde_json::from_str(include_str!("fixtures/mathieu.json")).unwrap();
    let parse = |v: &serde_json::Value| v.as_str().unwrap().parse::<f64>().unwrap();
    rows.iter()
        .map(|r| (r["h"].as_f64().unwrap(), r["n"].as_u64().unwrap() as usize, parse(&r["a"]), r.get("b").map(parse)))
        .collect()
}

#[test]
fn criterion_05a_mathieu_characteristic_values() {
    let mut worst = 0.0f64;
    for (h, n, a, b) in mathieu_fixture() {
        let edges = band_edges(&params(0.0, 4.0 * h), 3).unwrap();
        worst = worst.max((edges[n].a - 2.0 * h - a).abs());
        if let (Some(x), Some(y)) = (edges[n].b, b) {
            worst = worst.max((x - 2.0 * h - y).abs());
        }
    }
    verdict("5a", worst < 1e-8, format!("max |oracle - reference| = {worst:.2e} for h in {{1, 5, 25}}, n <= 3"));
}

#[test]
fn criterion_05b_strong_coupling_pairing() {
    let mut fitted = Vec::new();
    for h in [1.0, 5.0, 25.0] {
        let edges = band_edges(&params(0.0, 4.0 * h), 3).unwrap();
        for n in 0..=2 {
            let gap = (edges[n].a - edges[n + 1].b.unwrap()).abs();
            fitted.push((h, n, gap * (4.0 * (2.0 * h).sqrt()).exp()));
        }
    }
    let c = fitted.iter().map(|t| t.2).fold(0.0, f64::max);
    let ok = c <= 10.0;
    let at_25: Vec<String> = fitted.iter().filter(|t| t.0 == 25.0).map(|t| format!("n={}: {:.2e}", t.1, t.2)).collect();
    verdict("5b", ok, format!("fitted C = max |a_n - b_(n+1)| e^(4 sqrt(2h)) = {c:.2e} (order unity required); at h = 25: {}", at_25.join(", ")));
}

#[test]
fn criterion_06a_recursion_reproduces_printed_table() {
    let printed = sips_coefficients(Kind::C, Well::Zero, 2).unwrap();
    let rec = sips_coefficients_recursive(Kind::C, Well::Zero, 2).unwrap();
    let keys: std::collections::BTreeSet<_> = printed.entries.keys().chain(rec.entries.keys()).copied().collect();
    let mismatches: Vec<String> = keys
        .into_iter()
        .filter(|&(l, j)| printed.get(l, j) != rec.get(l, j))
        .map(|(l, j)| format!("C_{{{l},{j}}}"))
        .collect();
    verdict("6a", mismatches.is_empty(), format!("entries differing from the printed table: {mismatches:?}"));
}

#[test]
fn criterion_06b_kind_pattern() {
    let c = sips_coefficients_recursive(Kind::C, Well::Zero, 3).unwrap();
    let s = sips_coefficients_recursive(Kind::S, Well::Zero, 3).unwrap();
    let minus_a = -&Poly::var(Var::A);
    let keys: std::collections::BTreeSet<_> = c.entries.keys().chain(s.entries.keys()).copied().collect();
    let broken: Vec<String> = keys
        .into_iter()
        .filter(|&(l, j)| {
            let mapped = c.get(l, j).substitute(Var::A, &minus_a);
            let expect = if (j / 2).rem_euclid(2) == 0 { mapped } else { -&mapped };
            s.get(l, j) != expect
        })
        .map(|(l, j)| format!("(l={l}, 2m={j})"))
        .collect();
    verdict("6b", broken.is_empty(), format!("entries violating S = (-1)^m C(-A) for l <= 3: {broken:?}"));
}

#[test]
fn criterion_07_parabolic_cylinder() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_identity = 0.0f64;
    for _ in 0..400 {
        let z: f64 = rng.gen_range(-20.0..20.0);
        let d = parabolic_cylinder_all(9, z);
        for n in 1..=8usize {
            let scale = (n as f64 * d[n - 1]).abs().max(d[n + 1].abs()).max((z * d[n]).abs());
            if scale > 1e-300 {
                worst_identity = worst_identity.max((z * d[n] - n as f64 * d[n - 1] - d[n + 1]).abs() / scale);
            }
            let h = 1e-20;
            let deriv = parabolic_cylinder_complex(n as u32, Complex64::new(z, h)).im / h;
            let expect = 0.5 * n as f64 * d[n - 1] - 0.5 * d[n + 1];
            let dscale = (0.5 * n as f64 * d[n - 1]).abs().max((0.5 * d[n + 1]).abs());
            if dscale > 1e-300 {
                worst_identity = worst_identity.max((deriv - expect).abs() / dscale);
            }
        }
    }
    let mut worst_orth = 0.0f64;
    for m in 0..=8u32 {
        for n in 0..=m {
            let r = integrate(|z: f64| parabolic_cylinder_all(m, z)[m as usize] * parabolic_cylinder_all(n, z)[n as usize], -30.0, 30.0, 1e-13, 1e-13);
            let norm = (1..=n).map(f64::from).product::<f64>() * (2.0 * PI).sqrt();
            let expect = if m == n { norm } else { 0.0 };
            worst_orth = worst_orth.max((r.value - expect).abs() / norm);
        }
    }
    verdict("7", worst_identity < 1e-12 && worst_orth < 1e-8, format!("identities max relative residual {worst_identity:.2e}; orthogonality max deviation {worst_orth:.2e}"));
}

#[test]
fn criterion_08_node_counting() {
    let mut failures = Vec::new();
    for a in [0.0, 1.0, 5.0] {
        let p = params(a, 1e4);
        let (result, states) = well_spectrum(&p, 14).unwrap();
        for mu in 0..=5u32 {
            let s = states.iter().find(|s| s.well == Well::Zero && s.mu == mu).unwrap();
            let nodes = count_nodes(eigenfunction(&result, s.index), (-FRAC_PI_2, FRAC_PI_2), 256).unwrap();
            if nodes != mu as usize {
                failures.push(format!("A={a} mu={mu}: {nodes}"));
            }
        }
    }
    verdict("8", failures.is_empty(), format!("sign changes in (-pi/2, pi/2) equal mu for mu <= 5, B = 1e4, A in {{0, 1, 5}}; mismatches {failures:?}"));
}

#[test]
fn criterion_09_monodromy() {
    let mut worst = 0.0f64;
    for (a, b) in [(0.0, 1e4), (1.0, 2500.0), (-3.0, 1e4)] {
        let p = params(a, b);
        for mu in 0..=3u32 {
            for branch in [kapitza::contour::Branch::Plus, kapitza::contour::Branch::Minus] {
                let w = BarrierWave::new(&p, mu, Well::Zero, branch, 2, BarrierForm::Printed);
                let expect = canonical_monodromy(mu, branch, Well::Zero);
                for rho in [-2.5, -1.0, -0.4, -0.05] {
                    worst = worst.max((w.numeric_monodromy(rho) - expect).norm());
                }
            }
        }
    }
    verdict("9", worst < 1e-8, format!("max |psi(rho + i pi)/psi(rho) - ideal| = {worst:.2e}"));
}

#[test]
fn criterion_10a_tunneling_splitting() {
    let start = Instant::now();
    let mut ratios = Vec::new();
    for b in [100.0, 400.0, 900.0] {
        let p = params(0.0, b);
        let edges = band_edges(&p, 1).unwrap();
        let gap = edges[1].b.unwrap() - edges[0].a;
        let gamma = tunneling_coupling(&p, 0, ActionChoice::Leading).unwrap();
        ratios.push(gap / (2.0 * gamma));
    }
    let in_band = ratios.iter().all(|r| (0.5..=2.0).contains(r));
    let trending = ratios.windows(2).all(|w| (w[1] - 1.0).abs() <= (w[0] - 1.0).abs());
    let secs = start.elapsed().as_secs_f64();
    verdict("10a", in_band && trending && secs < 60.0, format!("(b_1 - a_0)/(2 gamma) at B = 100, 400, 900: {ratios:?}; {secs:.2} s"));
}

#[test]
fn criterion_10b_mixing_angle_trends() {
    let start = Instant::now();
    let a_values = [0.1, 0.2, 0.5, 1.0, 2.0];
    let mut failures = Vec::new();
    for b in [100.0, 400.0, 900.0] {
        let theta = |a: f64, mu: u32, choice| splitting_report(&params(a, b), mu, choice).unwrap().theta;
        for mu in 0..5u32 {
            if !a_values.windows(2).all(|w| theta(w[1], mu, ActionChoice::Leading) < theta(w[0], mu, ActionChoice::Leading)) {
                failures.push(format!("B={b} mu={mu}: not decreasing in A"));
            }
        }
        for &a in &a_values {
            if !(0..4).all(|mu| theta(a, mu + 1, ActionChoice::Leading) > theta(a, mu, ActionChoice::Leading)) {
                failures.push(format!("B={b} A={a}: not increasing in mu"));
            }
        }
    }
    let symmetrized_ok = [100.0, 400.0, 900.0].iter().all(|&b| {
        a_values.iter().all(|&a| {
            (0..4).all(|mu| {
                let t = |m| splitting_report(&params(a, b), m, ActionChoice::SeriesSymmetrized).unwrap().theta;
                t(mu + 1) > t(mu)
            })
        })
    });
    let secs = start.elapsed().as_secs_f64();
    let shown: Vec<&String> = failures.iter().take(4).collect();
    verdict(
        "10b",
        failures.is_empty() && secs < 60.0,
        format!("5x5 grid A x mu at B in {{100, 400, 900}}, default action: {} violations {shown:?}; with the series action the mu trend holds: {symmetrized_ok}", failures.len()),
    );
}

#[test]
fn criterion_11_rotating_states() {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for a in [0.5, 1.0, 2.0] {
        for b in [0.5, 1.0, 2.0] {
            let p = params(a, b);
            let mut errors = Vec::new();
            for nu in [10.0, 15.0] {
                let exact = bloch_energy(&p, nu).unwrap();
                let half_trace = characteristic_exponent(&p, exact).unwrap().half_trace;
                if (half_trace - (2.0 * PI * nu).cos()).abs() > 1e-6 {
                    failures.push(format!("A={a} B={b} nu={nu}: monodromy half trace {half_trace}"));
                }
                let rel = ((rotating_energy(&p, nu, ROTATING_TERMS).value - exact) / exact).abs();
                worst = worst.max(rel);
                errors.push(rel);
            }
            if errors[0] > 1e-4 || errors[1] > 1e-4 || errors[1] >= errors[0] {
                failures.push(format!("A={a} B={b}: {errors:?}"));
            }
        }
    }
    verdict("11", failures.is_empty(), format!("max relative error {worst:.2e}, improving from nu = 10 to 15; {failures:?}"));
}

fn acceptance_run(dir: &std::path::Path, threads: &str) -> Vec<u8> {
    let runs: [&[&str]; 5] = [
        &["chart", "--A", "range:0:2:3", "--B", "range:4:100:3", "--order", "3"],
        &["compare", "--A", "range:0:5:3", "--B", "range:2500:10000:2", "--mu", "0,1,2,3", "--format", "json"],
        &["wavefunction", "--A", "1", "--B", "10000", "--mu", "0,1,2"],
        &["tunneling", "--A", "range:0:2:5", "--B", "range:100:900:3", "--mu", "0,1,2,3,4", "--format", "json"],
        &["chart", "--A", "1", "--B", "25", "--sector", "antiperiodic"],
    ];
    let mut all = Vec::new();
    for (i, args) in runs.iter().enumerate() {
        let path = dir.join(format!("run-{i}.out"));
        let status = Command::new(env!("CARGO_BIN_EXE_kapitza"))
            .args(*args)
            .arg("--out")
            .arg(&path)
            .env("KAPITZA_THREADS", threads)
            .status()
            .unwrap();
        assert!(status.success(), "{args:?}");
        all.extend(std::fs::read(&path).unwrap());
    }
    all
}

#[test]
fn criterion_12_determinism() {
    let dir = std::env::temp_dir().join(format!("kapitza-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let first = acceptance_run(&dir, "1");
    let second = acceptance_run(&dir, "8");
    std::fs::remove_dir_all(&dir).unwrap();
    verdict("12", first == second, format!("two CLI runs ({} bytes) byte-identical: {}", first.len(), first == second));
}
