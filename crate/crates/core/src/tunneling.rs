//! Two-level model of tunneling between the wells at `phi = 0` and `phi = pi`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::PendulumParams;
use crate::quadrature::integrate;
use crate::series::{oscillatory_energy_0, oscillatory_energy_pi, PRINTED_ENERGY_TERMS};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelResult {
    pub e0: f64,
    pub e_pi: f64,
    pub gamma: f64,
    pub e_plus: f64,
    pub e_minus: f64,
    /// Broadened bias `sqrt((E_pi - E_0)^2 + 4 gamma^2)`.
    pub delta: f64,
    /// Mixing angle in `[0, pi/4]`.
    pub theta: f64,
    pub s_plus: Option<f64>,
    pub s_minus: Option<f64>,
}

/// Barrier action `int sqrt(2 (u - E)) dphi` across the barrier on `(0, pi)`.
///
/// The limits are the turning points on either side of the summit; where a well
/// bottom lies above `E` the limit is that saddle. The substitution
/// `phi = c + h sin(theta)` removes the square-root behaviour at the limits.
pub fn wkb_action_numeric(p: &PendulumParams, energy: f64) -> Result<f64> {
    let geo = p.geometry()?;
    if !(energy < geo.summit_height) {
        return Err(Error::EnergyOutOfRange { energy, lower: f64::NEG_INFINITY, upper: geo.summit_height });
    }
    let f = |phi: f64| p.potential(phi) - energy;
    let s = geo.summit_angle;
    let left = if f(0.0) < 0.0 { root(f, 0.0, s) } else { 0.0 };
    let right = if f(PI) < 0.0 { root(f, PI, s) } else { PI };
    let c = 0.5 * (left + right);
    let h = 0.5 * (right - left);
    let g = |theta: f64| {
        let phi = c + h * theta.sin();
        (2.0 * f(phi)).max(0.0).sqrt() * h * theta.cos()
    };
    Ok(integrate(g, -FRAC_PI_2, FRAC_PI_2, 1e-10, 1e-13).value)
}

fn root(f: impl Fn(f64) -> f64, inside: f64, outside: f64) -> f64 {
    let (mut lo, mut hi) = (inside, outside);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Printed actions `S_+ = 2 sqrt2 B^{1/2} - (9 mu~ - 2 mu~ ln(mu~^2 / 4B)) / 2 sqrt2` and
/// `S_- = S_+ - 3A / (2 sqrt2 B^{1/2})`.
pub fn wkb_action_series(p: &PendulumParams, mu: u32) -> (f64, f64) {
    let m = mu as f64 + 0.5;
    let sb = p.b.sqrt();
    let s_plus = 2.0 * SQRT_2 * sb - (9.0 * m - 2.0 * m * (m * m / (4.0 * p.b)).ln()) / (2.0 * SQRT_2);
    let s_minus = s_plus - 3.0 * p.a / (2.0 * SQRT_2 * sb);
    (s_plus, s_minus)
}

/// `g_mu = sqrt(2 pi) mu~^mu~ e^{-mu~} / mu!`.
pub fn furry_factor(mu: u32) -> f64 {
    let m = mu as f64 + 0.5;
    let ln_fact: f64 = (2..=mu).map(|k| (k as f64).ln()).sum();
    ((2.0 * PI).sqrt().ln() + m * m.ln() - m - ln_fact).exp()
}

/// `sqrt(Omega_0 Omega_pi) = 2 B^{1/2} (1 - A^2/4B^2)^{1/4}`.
pub fn frequency_product(p: &PendulumParams) -> f64 {
    2.0 * p.b.sqrt() * (1.0 - p.a * p.a / (4.0 * p.b * p.b)).powf(0.25)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActionChoice {
    /// `S = 2 sqrt2 B^{1/2}`, which keeps the two-level Hamiltonian symmetric.
    #[default]
    Leading,
    /// `(S_+ + S_-)/2` from the printed action series.
    SeriesSymmetrized,
}

impl ActionChoice {
    pub fn action(self, p: &PendulumParams, mu: u32) -> f64 {
        match self {
            ActionChoice::Leading => 2.0 * SQRT_2 * p.b.sqrt(),
            ActionChoice::SeriesSymmetrized => {
                let (sp, sm) = wkb_action_series(p, mu);
                0.5 * (sp + sm)
            }
        }
    }
}

/// `gamma = 2 g_mu sqrt(Omega_0 Omega_pi) / pi * e^{-S}`.
pub fn tunneling_coupling(p: &PendulumParams, mu: u32, choice: ActionChoice) -> Result<f64> {
    if p.a.abs() >= 2.0 * p.b {
        return Err(Error::ParameterDomain(format!("|A| = {} must be below 2B = {}", p.a.abs(), 2.0 * p.b)));
    }
    Ok(2.0 * furry_factor(mu) * frequency_product(p) / PI * (-choice.action(p, mu)).exp())
}

/// Diagonalize `[[E_0, -gamma], [-gamma, E_pi]]`.
pub fn two_level_solve(e0: f64, e_pi: f64, gamma: f64) -> TwoLevelResult {
    let bias = e_pi - e0;
    let delta = (bias * bias + 4.0 * gamma * gamma).sqrt();
    let mean = 0.5 * (e0 + e_pi);
    let theta = if bias == 0.0 { FRAC_PI_4 } else { 0.5 * (2.0 * gamma / bias.abs()).atan() };
    TwoLevelResult {
        e0,
        e_pi,
        gamma,
        e_plus: mean + 0.5 * delta,
        e_minus: mean - 0.5 * delta,
        delta,
        theta,
        s_plus: None,
        s_minus: None,
    }
}

/// Small-coupling estimate `tan 2 theta ~ gamma/A (1 + mu~ / 2 B^{1/2})`; diagnostic only.
pub fn mixing_angle_approx(p: &PendulumParams, mu: u32, gamma: f64) -> f64 {
    let m = mu as f64 + 0.5;
    0.5 * (gamma / p.a.abs() * (1.0 + m / (2.0 * p.b.sqrt()))).atan()
}

/// Perturbative energies of both wells coupled through `gamma`.
pub fn splitting_report(p: &PendulumParams, mu: u32, choice: ActionChoice) -> Result<TwoLevelResult> {
    let e0 = oscillatory_energy_0(p, mu, PRINTED_ENERGY_TERMS).value;
    let e_pi = oscillatory_energy_pi(p, mu, PRINTED_ENERGY_TERMS).value;
    let gamma = tunneling_coupling(p, mu, choice)?;
    let (sp, sm) = wkb_action_series(p, mu);
    let mut r = two_level_solve(e0, e_pi, gamma);
    r.s_plus = Some(sp);
    r.s_minus = Some(sm);
    Ok(r)
}
