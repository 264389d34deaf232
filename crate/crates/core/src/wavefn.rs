//! Piecewise eigenfunctions of the oscillatory states.
//!
//! Inside a well the state is a Sips–Meixner sum of parabolic cylinder functions in
//! `z = sqrt(2) B^{1/4} sin(phi)`; under the barrier it is the exponential of the
//! integrated Riccati series. The canonical coordinate `rho = ln tan(phi/2)` turns
//! the imaginary contour into the shift `rho -> rho + i pi`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::{self, Branch, TrigLaurentSum};
use crate::error::{Error, Result};
use crate::exact::{rat, Point, Poly, Rational, Var};
use crate::potential::{PendulumParams, Well};
use crate::quadrature::integrate;
use crate::series::{oscillatory_energy_0, PRINTED_ENERGY_TERMS};

// ---------------------------------------------------------------------------
// Parabolic cylinder functions

/// `D_n(z) = 2^{-n/2} e^{-z^2/4} H_n(z / sqrt 2)` by the recurrence `D_{n+1} = z D_n - n D_{n-1}`.
pub fn parabolic_cylinder(n: u32, z: f64) -> f64 {
    parabolic_cylinder_all(n, z)[n as usize]
}

/// `D_0(z), ..., D_n(z)`.
pub fn parabolic_cylinder_all(n: u32, z: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push((-0.25 * z * z).exp());
    if n >= 1 {
        out.push(z * out[0]);
    }
    for k in 1..n as usize {
        let next = z * out[k] - k as f64 * out[k - 1];
        out.push(next);
    }
    out
}

pub fn parabolic_cylinder_complex(n: u32, z: Complex64) -> Complex64 {
    let mut prev = (-0.25 * z * z).exp();
    if n == 0 {
        return prev;
    }
    let mut cur = z * prev;
    for k in 1..n as usize {
        let next = z * cur - prev * k as f64;
        prev = cur;
        cur = next;
    }
    cur
}

// ---------------------------------------------------------------------------
// Sips–Meixner coefficients

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    /// `psi_C = C_0 sum ...`.
    C,
    /// `psi_S = S_0 cos(phi) sum ...`.
    S,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoefficientSource {
    /// The printed table (`l <= 2`), extended to the other kind and well by the printed relations.
    Printed,
    /// Generated by balancing the equation order by order.
    Recursive,
}

/// Coefficients `C_{l,2m}` (or `S_{l,2m}`, and their `phi = pi` counterparts) as exact
/// polynomials in `(mu, A)`, keyed by `(l, 2m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SipsCoefficientTable {
    pub kind: Kind,
    pub well: Well,
    pub max_order: usize,
    pub entries: BTreeMap<(usize, i32), Poly>,
}

impl SipsCoefficientTable {
    pub fn get(&self, l: usize, two_m: i32) -> Poly {
        self.entries.get(&(l, two_m)).cloned().unwrap_or_default()
    }

    /// Row `l` evaluated at integer `mu` and real `A`.
    pub fn row(&self, l: usize, mu: u32, a: f64) -> Vec<(i32, f64)> {
        let point = Point::new().with(Var::Mu, mu as f64).with(Var::A, a);
        self.entries
            .range((l, i32::MIN)..=(l, i32::MAX))
            .map(|(&(_, j), c)| (j, c.eval(&point)))
            .filter(|(j, c)| *c != 0.0 && mu as i32 + j >= 0)
            .collect()
    }

    /// `A -> -A` in every entry, with an extra factor `sign(m)` per entry.
    fn mapped(&self, well: Well, sign: impl Fn(i32) -> i64) -> Self {
        let minus_a = -&Poly::var(Var::A);
        let entries = self
            .entries
            .iter()
            .map(|(&(l, j), c)| ((l, j), c.substitute(Var::A, &minus_a).scale(&rat(sign(j / 2), 1))))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        Self { kind: self.kind, well, max_order: self.max_order, entries }
    }
}

fn mu() -> Poly {
    Poly::var(Var::Mu)
}

/// `mu (mu - 1) ... (mu - k + 1)`, i.e. `mu! / (mu - k)!`.
fn falling(k: i64) -> Poly {
    let mut p = Poly::one();
    for i in 0..k {
        p = &p * &(&mu() - &Poly::int(i));
    }
    p
}

fn printed_c_table() -> BTreeMap<(usize, i32), Poly> {
    let m = mu();
    let a = Poly::var(Var::A);
    let mut t = BTreeMap::new();
    t.insert((0, 0), Poly::one());
    t.insert((1, 4), Poly::ratio(-1, 16));
    t.insert((1, 2), Poly::ratio(-1, 4));
    t.insert((1, -2), (&m - &Poly::one()).scale(&rat(-1, 4)));
    t.insert((1, -4), falling(2).scale(&rat(1, 16)));
    t.insert((2, 8), Poly::ratio(1, 512));
    t.insert((2, 6), Poly::ratio(1, 64));
    t.insert((2, 4), (&m + &Poly::int(2)).scale(&rat(-1, 16)));
    let c22 = &(&(&m.pow(2) - &m.scale(&rat(25, 1))) - &Poly::int(36)) - &a.scale(&rat(16, 1));
    t.insert((2, 2), c22.scale(&rat(1, 64)));
    let inner = &(&(&m.pow(2) + &m.scale(&rat(27, 1))) - &Poly::int(10)) - &a.scale(&rat(16, 1));
    t.insert((2, -2), (&falling(2) * &inner).scale(&rat(-1, 64)));
    t.insert((2, -4), (&(&m - &Poly::one()) * &falling(4)).scale(&rat(1, 16)));
    t.insert((2, -6), falling(6).scale(&rat(-1, 64)));
    t.insert((2, -8), falling(8).scale(&rat(-1, 512)));
    t
}

pub const PRINTED_MAX_ORDER: usize = 2;

/// The printed coefficient table. `S` follows from `S_{l,2m}(mu, A) = (-1)^m C_{l,2m}(mu, -A)`,
/// the `phi = pi` well from `C^_{l,2m} = (-1)^m C_{l,2m}(mu, -A)` and
/// `S^_{l,2m} = (-1)^{m+1} S_{l,2m}(mu, -A)`.
pub fn sips_coefficients(kind: Kind, well: Well, max_order: usize) -> Result<SipsCoefficientTable> {
    if max_order > PRINTED_MAX_ORDER {
        return Err(Error::OrderBeyondTable { requested: max_order, max: PRINTED_MAX_ORDER });
    }
    let mut entries = printed_c_table();
    entries.retain(|&(l, _), _| l <= max_order);
    let c0 = SipsCoefficientTable { kind: Kind::C, well: Well::Zero, max_order, entries };
    let alt = |m: i32| if m.rem_euclid(2) == 0 { 1 } else { -1 };
    let s0 = || {
        let mut s = c0.mapped(Well::Zero, alt);
        s.kind = Kind::S;
        s
    };
    Ok(match (kind, well) {
        (Kind::C, Well::Zero) => c0.clone(),
        (Kind::S, Well::Zero) => s0(),
        (Kind::C, Well::Pi) => c0.mapped(Well::Pi, alt),
        (Kind::S, Well::Pi) => s0().mapped(Well::Pi, |m| -alt(m)),
    })
}

/// A combination `sum_j c_j D_{mu + j}` with symbolic `mu`.
type DSum = BTreeMap<i32, Poly>;

fn dsum_add(target: &mut DSum, j: i32, c: Poly) {
    if c.is_zero() {
        return;
    }
    let slot = target.entry(j).or_default();
    *slot += &c;
    if slot.is_zero() {
        target.remove(&j);
    }
}

fn index_poly(j: i32) -> Poly {
    &mu() + &Poly::int(j as i64)
}

/// `z D_n = n D_{n-1} + D_{n+1}`.
fn mul_z(f: &DSum) -> DSum {
    let mut out = DSum::new();
    for (&j, c) in f {
        dsum_add(&mut out, j - 1, c * &index_poly(j));
        dsum_add(&mut out, j + 1, c.clone());
    }
    out
}

/// `D_n' = (n/2) D_{n-1} - (1/2) D_{n+1}`.
fn deriv(f: &DSum) -> DSum {
    let mut out = DSum::new();
    for (&j, c) in f {
        dsum_add(&mut out, j - 1, (c * &index_poly(j)).scale(&rat(1, 2)));
        dsum_add(&mut out, j + 1, c.scale(&rat(-1, 2)));
    }
    out
}

fn scale_dsum(f: &DSum, c: &Poly) -> DSum {
    let mut out = DSum::new();
    for (&j, v) in f {
        dsum_add(&mut out, j, v * c);
    }
    out
}

fn add_into(target: &mut DSum, f: &DSum) {
    for (&j, c) in f {
        dsum_add(target, j, c.clone());
    }
}

/// `binom(1/2, k) (-1)^k`, the coefficients of `sqrt(1 - x)`.
fn sqrt_coefficient(k: usize) -> Rational {
    let mut c = Rational::from_integer(1.into());
    for i in 0..k as i64 {
        c *= rat(1 - 2 * i, 2 * (i + 1));
        c = -c;
    }
    c
}

static RECURSIVE: Mutex<Vec<(Kind, usize, SipsCoefficientTable)>> = Mutex::new(Vec::new());

/// Coefficients generated by substituting the expansion into the `z`-form of the
/// equation and balancing each power of `tau = 1/(2 B^{1/2})`:
///
/// `L psi_l = z^2 psi''_{l-1} + k z psi'_{l-1} - sum_j w_j psi_{l-j}`, `L D_{mu+j} = -j D_{mu+j}`,
///
/// with `k = 1` for the C kind and `k = 3` for the S kind (whose equation is that of
/// `psi / cos(phi)`). The weights `w_j` collect the eigenvalue series and the expansion
/// of `A cos(phi) = A sqrt(1 - tau z^2)`. The gauge `C_{l,0} = 0` is imposed; a nonzero
/// projection onto `D_mu` signals an inconsistent eigenvalue series.
///
/// In the `phi = pi` well `cos(phi) = -sqrt(1 - tau z^2)`, so the equations are those of
/// the `phi = 0` well at `-A`.
pub fn sips_coefficients_recursive(kind: Kind, well: Well, max_order: usize) -> Result<SipsCoefficientTable> {
    if max_order < 1 {
        return Err(Error::Config("recursive Sips table needs max_order >= 1".into()));
    }
    let base = {
        let cache = RECURSIVE.lock().unwrap_or_else(|e| e.into_inner());
        cache
            .iter()
            .find(|(k, l, _)| *k == kind && *l >= max_order)
            .map(|(_, _, t)| t.clone())
    };
    let base = match base {
        Some(t) => t,
        None => {
            let t = generate_recursive(kind, max_order)?;
            RECURSIVE.lock().unwrap_or_else(|e| e.into_inner()).push((kind, max_order, t.clone()));
            t
        }
    };
    let mut table = base;
    table.entries.retain(|&(l, _), _| l <= max_order);
    table.max_order = max_order;
    Ok(match well {
        Well::Zero => table,
        Well::Pi => table.mapped(Well::Pi, |_| 1),
    })
}

fn generate_recursive(kind: Kind, max_order: usize) -> Result<SipsCoefficientTable> {
    let half = Poly::ratio(1, 2);
    let mu_tilde = &mu() + &half;
    let energy: Vec<Poly> = contour::energy_coefficients(max_order + 1)
        .into_iter()
        .map(|e| e.substitute(Var::MuTilde, &mu_tilde))
        .collect();
    let a = Poly::var(Var::A);
    let k_first = match kind {
        Kind::C => 1,
        Kind::S => 3,
    };
    let mut psi: Vec<DSum> = vec![DSum::from([(0, Poly::one())])];
    for l in 1..=max_order {
        let prev = &psi[l - 1];
        let d1 = deriv(prev);
        let mut rhs = mul_z(&mul_z(&deriv(&d1)));
        add_into(&mut rhs, &scale_dsum(&mul_z(&d1), &Poly::int(k_first)));
        for j in 1..=l {
            let pow2 = Poly::constant(Rational::from_integer((1i64 << (j - 1)).into()));
            let mut w_const = &energy[j] * &pow2;
            if j == 1 && kind == Kind::S {
                w_const -= &Poly::one();
            }
            let target = &psi[l - j];
            let mut term = scale_dsum(target, &w_const);
            let mut zpow = target.clone();
            for _ in 0..2 * (j - 1) {
                zpow = mul_z(&zpow);
            }
            add_into(&mut term, &scale_dsum(&zpow, &a.scale(&sqrt_coefficient(j - 1))));
            add_into(&mut rhs, &scale_dsum(&term, &Poly::int(-1)));
        }
        if rhs.get(&0).is_some_and(|c| !c.is_zero()) {
            return Err(Error::GaugeConflict { order: l });
        }
        let next: DSum = rhs
            .into_iter()
            .filter(|(j, _)| *j != 0)
            .map(|(j, c)| (j, c.scale(&rat(-1, j as i64))))
            .collect();
        psi.push(next);
    }
    let mut entries = BTreeMap::new();
    for (l, row) in psi.into_iter().enumerate() {
        for (j, c) in row {
            entries.insert((l, j), c);
        }
    }
    Ok(SipsCoefficientTable { kind, well: Well::Zero, max_order, entries })
}

// ---------------------------------------------------------------------------
// Well wavefunctions

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub c: f64,
    pub s: f64,
}

/// The printed constants
/// `C_0 = (B^{1/4}/pi^{1/2} mu!)^{1/2} (1 + (2mu+1)/B^{1/2} + (mu^4+2mu^3+263mu^2+262mu+108)/512B)^{-1/2}`
/// and `S_0` likewise; the `phi = pi` constants coincide at this order.
pub fn normalization_constants(p: &PendulumParams, mu: u32) -> Normalization {
    let m = mu as f64;
    let fact: f64 = (1..=mu).map(|k| k as f64).product();
    let lead = (p.b.powf(0.25) / (PI.sqrt() * fact)).sqrt();
    let sb = p.b.sqrt();
    let c_corr = 1.0 + (2.0 * m + 1.0) / sb
        + (m.powi(4) + 2.0 * m.powi(3) + 263.0 * m * m + 262.0 * m + 108.0) / (512.0 * p.b);
    let s_corr = 1.0 - (2.0 * m + 1.0) / sb
        + (m.powi(4) + 2.0 * m.powi(3) - 121.0 * m * m - 122.0 * m - 84.0) / (512.0 * p.b);
    Normalization { c: lead / c_corr.sqrt(), s: lead / s_corr.sqrt() }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum NormalizationChoice {
    Printed,
    /// `int psi^2 = 1` over the half circle centred on the well, by quadrature.
    Quadrature,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WellOptions {
    pub source: CoefficientSource,
    pub normalization: NormalizationChoice,
}

impl Default for WellOptions {
    fn default() -> Self {
        Self { source: CoefficientSource::Recursive, normalization: NormalizationChoice::Printed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WellValue {
    pub value: f64,
    /// Magnitude of the first omitted order `(2B^{1/2})^{-(L+1)} psi^{(L+1)}`, normalized alike.
    pub estimate: f64,
    pub advisory: Option<String>,
}

/// Well-region wavefunction with the coefficient rows resolved at fixed `(mu, A)`.
#[derive(Clone, Debug)]
pub struct WellExpansion {
    pub params: PendulumParams,
    pub mu: u32,
    pub kind: Kind,
    pub well: Well,
    pub order: usize,
    rows: Vec<Vec<(i32, f64)>>,
    next_row: Vec<(i32, f64)>,
    pub norm: f64,
}

impl WellExpansion {
    pub fn new(p: &PendulumParams, mu: u32, kind: Kind, well: Well, order: usize, options: WellOptions) -> Result<Self> {
        let table = match options.source {
            CoefficientSource::Printed => sips_coefficients(kind, well, order)?,
            CoefficientSource::Recursive => sips_coefficients_recursive(kind, well, order.max(1))?,
        };
        let next = sips_coefficients_recursive(kind, well, order + 1)?;
        let rows = (0..=order).map(|l| table.row(l, mu, p.a)).collect();
        let next_row = next.row(order + 1, mu, p.a);
        let mut w = Self { params: *p, mu, kind, well, order, rows, next_row, norm: 1.0 };
        w.norm = match options.normalization {
            NormalizationChoice::Printed => {
                let n = normalization_constants(p, mu);
                match kind {
                    Kind::C => n.c,
                    Kind::S => n.s,
                }
            }
            NormalizationChoice::Quadrature => {
                // Panels keep the adaptive rule from mistaking a narrow odd state for zero.
                let c = well.center();
                let panels = 64;
                let width = PI / panels as f64;
                let total: f64 = (0..panels)
                    .map(|i| {
                        let lo = c - PI / 2.0 + i as f64 * width;
                        integrate(|phi: f64| w.raw(phi).0.powi(2), lo, lo + width, 1e-15, 1e-12).value
                    })
                    .sum();
                1.0 / total.sqrt()
            }
        };
        Ok(w)
    }

    fn z(&self, phi: f64) -> f64 {
        2f64.sqrt() * self.params.b.powf(0.25) * phi.sin()
    }

    /// Unnormalized sum and first omitted order.
    fn raw(&self, phi: f64) -> (f64, f64) {
        let z = self.z(phi);
        let top = self.mu as i32 + 4 * (self.order as i32 + 1);
        let d = parabolic_cylinder_all(top as u32, z);
        let tau = 0.5 / self.params.b.sqrt();
        let row_sum = |row: &[(i32, f64)]| -> f64 {
            row.iter().map(|&(j, c)| c * d[(self.mu as i32 + j) as usize]).sum()
        };
        let mut total = 0.0;
        for (l, row) in self.rows.iter().enumerate() {
            total += tau.powi(l as i32) * row_sum(row);
        }
        let omitted = tau.powi(self.order as i32 + 1) * row_sum(&self.next_row);
        let pref = match self.kind {
            Kind::C => 1.0,
            Kind::S => phi.cos(),
        };
        (pref * total, (pref * omitted).abs())
    }

    pub fn eval(&self, phi: f64) -> WellValue {
        let (v, e) = self.raw(phi);
        let sin2 = phi.sin().powi(2);
        let m = self.mu as f64 + 0.5;
        let wrong_half = match self.well {
            Well::Zero => phi.cos() <= 0.0,
            Well::Pi => phi.cos() >= 0.0,
        };
        let advisory = if wrong_half {
            Some("outside the well half-circle".to_string())
        } else if sin2 > 4.0 * m / self.params.b.sqrt() {
            Some("barrier region".to_string())
        } else {
            None
        };
        WellValue { value: self.norm * v, estimate: self.norm * e, advisory }
    }
}

pub fn well_wavefunction(
    p: &PendulumParams,
    mu: u32,
    kind: Kind,
    well: Well,
    phi: f64,
    order: usize,
    options: WellOptions,
) -> Result<WellValue> {
    Ok(WellExpansion::new(p, mu, kind, well, order, options)?.eval(phi))
}

// ---------------------------------------------------------------------------
// Canonical coordinate

/// `rho = ln tan(phi/2)` on the real branch `phi in (0, pi)`.
pub fn to_canonical(phi: f64) -> Result<f64> {
    if !(phi > 0.0 && phi < PI) {
        return Err(Error::BranchViolation { phi });
    }
    Ok((0.5 * phi).tan().ln())
}

pub fn from_canonical(rho: f64) -> f64 {
    2.0 * rho.exp().atan()
}

/// Principal-branch continuation of `ln tan(phi/2)` for complex `phi`.
pub fn to_canonical_complex(phi: Complex64) -> Complex64 {
    (0.5 * phi).tan().ln()
}

/// Ideal multiplier of `psi_+-` under `rho -> rho + i pi`.
pub fn canonical_monodromy(mu: u32, branch: Branch, well: Well) -> Complex64 {
    let m = mu as f64;
    let plain = Complex64::from_polar(1.0, PI * m);
    let shifted = Complex64::from_polar(1.0, -PI * (m + 1.0));
    match (well, branch) {
        (Well::Zero, Branch::Plus) | (Well::Pi, Branch::Minus) => plain,
        (Well::Zero, Branch::Minus) | (Well::Pi, Branch::Plus) => shifted,
    }
}

// ---------------------------------------------------------------------------
// Barrier wavefunctions

/// Elementary functions of `phi` entering the barrier exponent, with the logarithms on
/// an explicitly chosen branch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BarrierArgs {
    pub phi: Complex64,
    /// `ln tan(phi/2)`.
    pub rho: Complex64,
    pub sin: Complex64,
    pub cos: Complex64,
    pub ln_sin: Complex64,
    pub sin_half_sq: Complex64,
    pub ln_sin_half_sq: Complex64,
    pub ln_cos_half_sq: Complex64,
}

impl BarrierArgs {
    /// Principal logarithms at a real angle.
    pub fn real(phi: f64) -> Self {
        let z = Complex64::new(phi, 0.0);
        let sh = (0.5 * phi).sin().powi(2);
        let ch = (0.5 * phi).cos().powi(2);
        Self {
            phi: z,
            rho: to_canonical_complex(z),
            sin: Complex64::new(phi.sin(), 0.0),
            cos: Complex64::new(phi.cos(), 0.0),
            ln_sin: Complex64::new(phi.sin(), 0.0).ln(),
            sin_half_sq: Complex64::new(sh, 0.0),
            ln_sin_half_sq: Complex64::new(sh.ln(), 0.0),
            ln_cos_half_sq: Complex64::new(ch.ln(), 0.0),
        }
    }

    /// From the canonical coordinate, with `ln cosh(rho)` supplied on the caller's branch.
    ///
    /// Uses `sin = 1/cosh rho`, `cos = -tanh rho`, `sin^2(phi/2) = e^{2 rho}/(1 + e^{2 rho})`
    /// and `cos^2(phi/2) = 1/(1 + e^{2 rho})`; `ln(1 + e^{2 rho})` is principal, which is
    /// continuous for `Re rho < 0`.
    pub fn from_rho(rho: Complex64, ln_cosh: Complex64) -> Self {
        let e2 = (2.0 * rho).exp();
        let l1 = (1.0 + e2).ln();
        Self {
            phi: 2.0 * rho.exp().atan(),
            rho,
            sin: rho.cosh().inv(),
            cos: -rho.tanh(),
            ln_sin: -ln_cosh,
            sin_half_sq: e2 / (1.0 + e2),
            ln_sin_half_sq: 2.0 * rho - l1,
            ln_cos_half_sq: -l1,
        }
    }

    /// Arguments at `pi - phi`.
    pub fn reflected(&self) -> Self {
        Self {
            phi: PI - self.phi,
            rho: -self.rho,
            sin: self.sin,
            cos: -self.cos,
            ln_sin: self.ln_sin,
            sin_half_sq: 1.0 - self.sin_half_sq,
            ln_sin_half_sq: self.ln_cos_half_sq,
            ln_cos_half_sq: self.ln_sin_half_sq,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BarrierForm {
    /// The printed exponents, with `E` already replaced by its series.
    Printed,
    /// Antiderivatives of the Riccati orders at the numerical energy.
    Generated,
}

/// Printed exponent of `psi_+-` (order 0: through the logarithms; 1: `B^{-1/2}`; 2: `B^{-1}`).
pub fn printed_barrier_exponent(p: &PendulumParams, mu: u32, well: Well, branch: Branch, x: &BarrierArgs, order: usize) -> Complex64 {
    let sg = branch.sign();
    let s = p.b.sqrt();
    let m = mu as f64 + 0.5;
    let a = p.a;
    let q = 3.0 + 4.0 * m * m;
    let sin2 = x.sin * x.sin;
    let cube = 38.0 * m + 8.0 * m.powi(3);
    match well {
        Well::Zero => {
            let mut out = sg * s * x.cos - 0.5 * x.ln_sin + sg * m * x.rho;
            if order >= 1 {
                let br = (sg * 8.0 * m - q * x.cos) / sin2 + 8.0 * a * x.ln_cos_half_sq;
                out += sg * br / (16.0 * s);
            }
            if order >= 2 {
                let br = (12.0 + 32.0 * m * m - sg * cube * x.cos) / (sin2 * sin2)
                    - (q * (sg * m * x.cos + 2.0) + 32.0 * a * (1.0 + sg * m) * x.sin_half_sq) / sin2;
                out += br / (64.0 * p.b);
            }
            out
        }
        Well::Pi => {
            let cos2 = x.cos * x.cos;
            let mut out = -sg * s * x.cos - 0.5 * x.ln_sin - sg * m * x.rho;
            if order >= 1 {
                let br = (sg * 8.0 * m + q * x.cos) / sin2 - 8.0 * a * x.ln_sin_half_sq;
                out += sg * br / (16.0 * s);
            }
            if order >= 2 {
                let br = (12.0 + 32.0 * m * m + sg * cube * x.cos) / (sin2 * sin2)
                    - (q * (-sg * m * x.cos + 2.0) - 32.0 * a * (1.0 + sg * m) * x.sin_half_sq) / cos2;
                out += br / (64.0 * p.b);
            }
            out
        }
    }
}

/// Antiderivative of a [`TrigLaurentSum`]: a trigonometric part plus multiples of
/// `ln tan(phi/2)`, `ln sin(phi)` and `phi`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Antiderivative {
    pub trig: TrigLaurentSum,
    pub ln_tan: Poly,
    pub ln_sin: Poly,
    pub linear: Poly,
}

impl Antiderivative {
    pub fn of(v: &TrigLaurentSum) -> Self {
        let mut out = Self::default();
        for (e, k, c) in v.terms() {
            out.add_term(e, k, c);
        }
        out
    }

    fn add_term(&mut self, e: u8, k: i32, c: &Poly) {
        match (e, k) {
            (1, 1) => self.ln_sin += c,
            // int cos sin^-k = sin^{1-k} / (1-k)
            (1, k) => {
                let f = Rational::from_integer((1 - k).into());
                self.trig = self.trig.add(&TrigLaurentSum::term(0, k - 1, c.scale(&(Rational::from_integer(1.into()) / f))));
            }
            (0, 0) => self.linear += c,
            (0, 1) => self.ln_tan += c,
            // int sin = -cos
            (0, -1) => self.trig = self.trig.add(&TrigLaurentSum::term(1, 0, -c)),
            // int csc^k = -cos csc^{k-1}/(k-1) + (k-2)/(k-1) int csc^{k-2}
            (0, k) if k >= 2 => {
                let km1 = Rational::from_integer((k - 1).into());
                self.trig = self.trig.add(&TrigLaurentSum::term(1, k - 1, c.scale(&(-Rational::from_integer(1.into()) / km1.clone()))));
                let rest = c.scale(&(Rational::from_integer((k - 2).into()) / km1));
                if !rest.is_zero() {
                    self.add_term(0, k - 2, &rest);
                }
            }
            _ => unreachable!("Riccati orders only contain sin^-k with k >= -1"),
        }
    }

    pub fn numeric(&self, energy: f64, a: f64) -> NumericAntiderivative {
        let v = [energy, a, 0.0, 0.0, 0.0];
        NumericAntiderivative {
            trig: self.trig.numeric(energy, a),
            ln_tan: self.ln_tan.eval_f64(v),
            ln_sin: self.ln_sin.eval_f64(v),
            linear: self.linear.eval_f64(v),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NumericAntiderivative {
    pub trig: contour::NumericTrigSum,
    pub ln_tan: f64,
    pub ln_sin: f64,
    pub linear: f64,
}

impl NumericAntiderivative {
    pub fn eval(&self, x: &BarrierArgs) -> Complex64 {
        let inv = x.sin.inv();
        let trig: Complex64 = self
            .trig
            .terms
            .iter()
            .map(|&(e, k, c)| {
                let base = if k >= 0 { inv.powi(k) } else { x.sin.powi(-k) };
                c * if e == 1 { base * x.cos } else { base }
            })
            .sum();
        trig + self.ln_tan * x.rho + self.ln_sin * x.ln_sin + self.linear * x.phi
    }
}

/// Barrier wavefunction `psi_+-` of the state `(well, mu)` in either representation.
#[derive(Clone, Debug)]
pub struct BarrierWave {
    pub params: PendulumParams,
    pub mu: u32,
    pub well: Well,
    pub branch: Branch,
    pub order: usize,
    pub form: BarrierForm,
    /// Energy used by the generated form.
    pub energy: f64,
    generated: Vec<(NumericAntiderivative, f64)>,
}

impl BarrierWave {
    /// `order` counts powers of `B^{-1/2}` beyond the logarithmic terms; the generated
    /// form keeps Riccati orders `v_{-1} .. v_{order + 1}`, whose log-derivative is the
    /// contour integrand at that truncation.
    pub fn new(p: &PendulumParams, mu: u32, well: Well, branch: Branch, order: usize, form: BarrierForm) -> Self {
        let local = p.seen_from(well);
        let energy = oscillatory_energy_0(&local, mu, PRINTED_ENERGY_TERMS).value;
        let s = branch.sign() * p.b.sqrt();
        let generated = match form {
            BarrierForm::Printed => Vec::new(),
            BarrierForm::Generated => contour::riccati_orders(order + 1)
                .iter()
                .enumerate()
                .map(|(i, v)| (Antiderivative::of(v).numeric(energy, local.a), s.powi(-(i as i32 - 1))))
                .collect(),
        };
        Self { params: *p, mu, well, branch, order, form, energy, generated }
    }

    /// Exponent at the given arguments (branch choices are the caller's).
    pub fn exponent(&self, x: &BarrierArgs) -> Complex64 {
        match self.form {
            BarrierForm::Printed => printed_barrier_exponent(&self.params, self.mu, self.well, self.branch, x, self.order),
            BarrierForm::Generated => {
                let y = match self.well {
                    Well::Zero => *x,
                    Well::Pi => x.reflected(),
                };
                self.generated.iter().map(|(f, w)| f.eval(&y) * *w).sum()
            }
        }
    }

    /// `psi(phi)` on the principal branch for real `phi`.
    pub fn eval(&self, phi: f64) -> Complex64 {
        self.exponent(&BarrierArgs::real(phi)).exp()
    }

    /// `d ln psi / d phi` at real `phi` by a five-point stencil on the exponent.
    pub fn log_derivative(&self, phi: f64) -> f64 {
        let h = 1e-4;
        let f = |x: f64| self.exponent(&BarrierArgs::real(x)).re;
        (f(phi - 2.0 * h) - 8.0 * f(phi - h) + 8.0 * f(phi + h) - f(phi + 2.0 * h)) / (12.0 * h)
    }

    /// Whether `phi` lies in the region `sin^2 phi > mu~ / B^{1/2}`.
    pub fn in_region(&self, phi: f64) -> bool {
        phi.sin().powi(2) > (self.mu as f64 + 0.5) / self.params.b.sqrt()
    }

    /// `psi(rho + i pi) / psi(rho)` along the straight path from real `rho < 0`, tracking
    /// `ln cosh` continuously.
    pub fn numeric_monodromy(&self, rho: f64) -> Complex64 {
        let steps = 256;
        let mut ln_cosh = Complex64::new(rho.cosh().ln(), 0.0);
        let start = self.exponent(&BarrierArgs::from_rho(Complex64::new(rho, 0.0), ln_cosh));
        let mut prev = Complex64::new(rho, 0.0).cosh();
        for i in 1..=steps {
            let z = Complex64::new(rho, PI * i as f64 / steps as f64);
            let c = z.cosh();
            let mut d = (c / prev).arg();
            if d > PI {
                d -= 2.0 * PI;
            }
            ln_cosh += Complex64::new((c.norm() / prev.norm()).ln(), d);
            prev = c;
        }
        let end = self.exponent(&BarrierArgs::from_rho(Complex64::new(rho, PI), ln_cosh));
        (end - start).exp()
    }
}

pub fn barrier_wavefunction(
    p: &PendulumParams,
    mu: u32,
    well: Well,
    branch: Branch,
    phi: f64,
    order: usize,
    form: BarrierForm,
) -> BarrierValue {
    let w = BarrierWave::new(p, mu, well, branch, order, form);
    BarrierValue { value: w.eval(phi), in_region: w.in_region(phi) }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BarrierValue {
    pub value: Complex64,
    /// `false` raises the region advisory: `sin^2 phi <= mu~ / B^{1/2}`.
    pub in_region: bool,
}

/// Printed and generated barrier log-derivatives at `phi`, for flagging disagreements
/// larger than `tolerance`.
pub fn barrier_form_mismatch(p: &PendulumParams, mu: u32, well: Well, branch: Branch, phi: f64, order: usize) -> f64 {
    let a = BarrierWave::new(p, mu, well, branch, order, BarrierForm::Printed).log_derivative(phi);
    let b = BarrierWave::new(p, mu, well, branch, order, BarrierForm::Generated).log_derivative(phi);
    (a - b).abs()
}
