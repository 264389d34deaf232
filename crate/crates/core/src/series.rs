//! Closed-form perturbative series: rotating states at large energy, oscillatory
//! states at large `B` in either well, and the Mathieu reference expansions.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour;
use crate::error::{Error, Result};
use crate::exact::{rat, Point, Poly, Var};
use crate::potential::{PendulumParams, Well};

/// Expansion variable of a [`HalfPowerSeries`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expansion {
    /// `x = B^{1/2}`.
    SqrtB,
    /// `x = nu`.
    Nu,
}

/// `sum_j c_j x^{anchor - step * j}` with exact coefficients in `(mu_tilde, A, B)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPowerSeries {
    pub expansion: Expansion,
    pub anchor: i32,
    pub step: i32,
    pub coefficients: Vec<Poly>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimateKind {
    /// Magnitude of the first nonvanishing omitted coefficient.
    NextTerm,
    /// No further coefficient is known; last kept term times its ratio to the one before.
    Geometric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    /// Kept terms, in order.
    pub terms: Vec<f64>,
    pub error_estimate: f64,
    pub estimate_kind: EstimateKind,
    /// Set when the series is evaluated outside its regime of validity.
    pub advisory: Option<String>,
}

impl HalfPowerSeries {
    pub fn new(expansion: Expansion, anchor: i32, step: i32, coefficients: Vec<Poly>) -> Self {
        Self { expansion, anchor, step, coefficients }
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn power(&self, j: usize) -> i32 {
        self.anchor - self.step * j as i32
    }

    /// Term `j` at `x`, with its coefficient evaluated exactly first.
    pub fn term(&self, j: usize, x: f64, point: &Point) -> f64 {
        self.coefficients[j].eval(point) * x.powi(self.power(j))
    }

    /// Sum of the first `kept` terms.
    pub fn evaluate(&self, x: f64, point: &Point, kept: usize) -> SeriesValue {
        let kept = kept.min(self.len());
        let terms: Vec<f64> = (0..kept).map(|j| self.term(j, x, point)).collect();
        let value = terms.iter().sum();
        let next = (kept..self.len())
            .find(|&j| !self.coefficients[j].eval_exact(point).eq(&num_traits::Zero::zero()))
            .map(|j| self.term(j, x, point).abs());
        let (error_estimate, estimate_kind) = match next {
            Some(e) => (e, EstimateKind::NextTerm),
            None => {
                let last = terms.iter().rev().find(|t| **t != 0.0).copied().unwrap_or(0.0);
                let prev = terms.iter().rev().filter(|t| **t != 0.0).nth(1).copied();
                let ratio = prev.map(|p| (last / p).abs()).unwrap_or(1.0);
                (last.abs() * ratio, EstimateKind::Geometric)
            }
        };
        SeriesValue { value, terms, error_estimate, estimate_kind, advisory: None }
    }
}

fn mt() -> Poly {
    Poly::var(Var::MuTilde)
}

fn a() -> Poly {
    Poly::var(Var::A)
}

fn b() -> Poly {
    Poly::var(Var::B)
}

/// The three printed coefficients of the `phi = 0` eigenvalue series:
/// `2 mu~`, `-A - (4 mu~^2 + 1)/8`, `-(4 mu~^3 + 3 mu~ - 16 A mu~)/32`.
pub fn printed_energy0_coefficients() -> Vec<Poly> {
    let m = mt();
    let c0 = m.scale(&rat(2, 1));
    let c1 = &(-&a()) - &(&m.pow(2).scale(&rat(4, 1)) + &Poly::one()).scale(&rat(1, 8));
    let c2 = (&(&m.pow(3).scale(&rat(4, 1)) + &m.scale(&rat(3, 1))) - &(&a() * &m).scale(&rat(16, 1)))
        .scale(&rat(-1, 32));
    vec![c0, c1, c2]
}

pub const PRINTED_ENERGY_TERMS: usize = 3;

/// Coefficients kept beyond the printed ones for error estimates and higher orders.
pub const GENERATED_ENERGY_TERMS: usize = 5;

/// Printed coefficients followed by the contour-generated ones.
pub fn energy0_series() -> HalfPowerSeries {
    let mut coefficients = printed_energy0_coefficients();
    let generated = contour::energy_coefficients(GENERATED_ENERGY_TERMS);
    coefficients.extend(generated.into_iter().skip(PRINTED_ENERGY_TERMS));
    HalfPowerSeries::new(Expansion::SqrtB, 1, 1, coefficients)
}

/// Energy of the `mu`-th oscillatory state of the `phi = 0` well, keeping `terms`
/// coefficients of the `B^{1/2}` series (3 reproduces the printed truncation).
pub fn oscillatory_energy_0(p: &PendulumParams, mu: u32, terms: usize) -> SeriesValue {
    let point = Point::new().with(Var::MuTilde, mu as f64 + 0.5).with(Var::A, p.a);
    let mut v = energy0_series().evaluate(p.b.sqrt(), &point, terms);
    if !p.is_deep_well(mu) {
        v.advisory = Some(format!("shallow well: mu~ = {} exceeds 0.1 B^(1/2)", mu as f64 + 0.5));
    }
    v
}

/// Energy in the `phi = pi` well: the `phi = 0` series at `A -> -A`.
pub fn oscillatory_energy_pi(p: &PendulumParams, mu: u32, terms: usize) -> SeriesValue {
    oscillatory_energy_0(&p.mirrored(), mu, terms)
}

pub fn oscillatory_energy(p: &PendulumParams, well: Well, mu: u32, terms: usize) -> SeriesValue {
    oscillatory_energy_0(&p.seen_from(well), mu, terms)
}

/// Printed rotating-state coefficients in powers `nu^2, nu^0, nu^-2, nu^-4`.
pub fn rotating_energy_series() -> HalfPowerSeries {
    let c0 = Poly::one();
    let c1 = b().scale(&rat(1, 2));
    let c2 = (&b().pow(2) + &a().pow(2).scale(&rat(2, 1))).scale(&rat(1, 32));
    let c3 = (&(&b().pow(2).scale(&rat(2, 1)) - &(&a().pow(2) * &b()).scale(&rat(3, 1)))
        + &a().pow(2).scale(&rat(2, 1)))
        .scale(&rat(1, 64));
    HalfPowerSeries::new(Expansion::Nu, 2, 2, vec![c0, c1, c2, c3])
}

pub const ROTATING_TERMS: usize = 4;

pub fn rotating_energy(p: &PendulumParams, nu: f64, terms: usize) -> SeriesValue {
    let point = Point::new().with(Var::A, p.a).with(Var::B, p.b);
    let mut v = rotating_energy_series().evaluate(nu, &point, terms);
    if nu * nu < p.b {
        v.advisory = Some(format!("nu^2 = {} below B = {}", nu * nu, p.b));
    }
    v
}

/// Printed normalization `sqrt(2 pi) [1 - B/8nu^2 + (B^2 - 8B + 6A^2)/64nu^4]`, first `terms` terms.
pub fn rotating_normalization(p: &PendulumParams, nu: f64, terms: usize) -> f64 {
    let (a, b) = (p.a, p.b);
    let parts = [1.0, -b / (8.0 * nu * nu), (b * b - 8.0 * b + 6.0 * a * a) / (64.0 * nu.powi(4))];
    (2.0 * PI).sqrt() * parts.iter().take(terms.max(1)).sum::<f64>()
}

/// Bracketed factor of the rotating wavefunction, without the `C exp(+-i nu phi)` prefactor.
fn rotating_envelope(p: &PendulumParams, nu: f64, phi: f64, branch: contour::Branch, terms: usize) -> Complex64 {
    let (a, b) = (p.a, p.b);
    let sgn = branch.sign();
    let mut out = Complex64::new(1.0, 0.0);
    if terms >= 2 {
        let first = b * (2.0 * phi).sin() + 4.0 * a * phi.sin();
        out += Complex64::new(0.0, sgn * first / (8.0 * nu));
    }
    if terms >= 3 {
        let second = b * b * (4.0 * phi).cos() + 8.0 * a * b * (3.0 * phi).cos()
            - 16.0 * (2.0 * b - a * a) * (2.0 * phi).cos()
            - 8.0 * a * (b + 8.0) * phi.cos();
        out += second / (256.0 * nu * nu);
    }
    out
}

/// `psi_+-(phi)` with the printed normalization.
pub fn rotating_wavefunction(p: &PendulumParams, nu: f64, phi: f64, branch: contour::Branch, terms: usize) -> Complex64 {
    let phase = Complex64::from_polar(1.0, branch.sign() * nu * phi);
    rotating_normalization(p, nu, terms) * phase * rotating_envelope(p, nu, phi, branch, terms)
}

/// `psi_+-` rescaled so that `int_0^{2 pi} |psi|^2 = 1`.
pub fn rotating_wavefunction_normalized(p: &PendulumParams, nu: f64, phi: f64, branch: contour::Branch, terms: usize) -> Complex64 {
    let n = 512;
    let h = 2.0 * PI / n as f64;
    let norm: f64 = (0..n)
        .map(|i| rotating_envelope(p, nu, i as f64 * h, branch, terms).norm_sqr() * h)
        .sum();
    let phase = Complex64::from_polar(1.0, branch.sign() * nu * phi);
    phase * rotating_envelope(p, nu, phi, branch, terms) / norm.sqrt()
}

/// Even and odd combinations `psi_C = psi_+ + psi_-`, `psi_S = psi_+ - psi_-`.
pub fn rotating_parity_pair(p: &PendulumParams, nu: f64, phi: f64, terms: usize) -> (Complex64, Complex64) {
    let plus = rotating_wavefunction(p, nu, phi, contour::Branch::Plus, terms);
    let minus = rotating_wavefunction(p, nu, phi, contour::Branch::Minus, terms);
    (plus + minus, plus - minus)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MathieuRegime {
    Weak,
    Strong,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MathieuPair {
    pub a: f64,
    /// `b_0` does not exist.
    pub b: Option<f64>,
}

/// Reference expansions of the Mathieu characteristic values `a_n(h)`, `b_n(h)`.
///
/// Weak coupling: the common series `n^2 + h^2/2(n^2-1) + (5n^2+7)h^4/32(n^2-1)^3(n^2-4)`;
/// the `h^4` term has a pole at `n = 2` and is dropped there. Strong coupling:
/// `a_n ~ b_{n+1} ~ -2h + 4(n+1/2)h^{1/2} - [4(n+1/2)^2 + 1]/8`.
pub fn mathieu_reference(n: u32, h: f64, regime: MathieuRegime) -> Result<MathieuPair> {
    match regime {
        MathieuRegime::Weak => {
            if n <= 1 {
                return Err(Error::WeakSeriesSingular { n });
            }
            let nn = (n * n) as f64;
            let mut v = nn + h * h / (2.0 * (nn - 1.0));
            if n != 2 {
                v += (5.0 * nn + 7.0) * h.powi(4) / (32.0 * (nn - 1.0).powi(3) * (nn - 4.0));
            }
            Ok(MathieuPair { a: v, b: Some(v) })
        }
        MathieuRegime::Strong => {
            let strong = |m: u32| {
                let w = m as f64 + 0.5;
                -2.0 * h + 4.0 * w * h.sqrt() - (4.0 * w * w + 1.0) / 8.0
            };
            Ok(MathieuPair { a: strong(n), b: if n == 0 { None } else { Some(strong(n - 1)) } })
        }
    }
}
