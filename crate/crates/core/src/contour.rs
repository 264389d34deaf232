//! Contour quantization of the oscillatory states at the `phi = 0` saddle.
//!
//! The Riccati integrand `v = psi'/psi` solves `v' + v^2 = u - E`. Expanding
//! `v = sum_l v_l(phi) / B^{l/2}` gives orders that are finite sums of
//! `cos^e(phi) / sin^k(phi)` with exact coefficients polynomial in `(E, A)`.
//! Integrating them along the imaginary contour through the pole at `phi = 0`
//! reduces to a finite residue table, which yields `mu(E)`; reverting that series
//! gives the dispersion relation `E(mu)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{rat, rat_to_f64, Point, Poly, Rational, Var};
use crate::potential::PendulumParams;
use crate::quadrature::integrate;
use crate::series::{Expansion, HalfPowerSeries};

/// Highest Riccati order generated by default. The printed eigenvalue series needs
/// orders up to 5; its first omitted coefficient needs 7, the one after that 9.
pub const DEFAULT_MAX_ORDER: usize = 9;

/// Exact `sum c_{e,k}(E, A) cos^e(phi) / sin^k(phi)` with `e` in `{0, 1}`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TrigLaurentSum {
    terms: BTreeMap<(u8, i32), Poly>,
}

impl TrigLaurentSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(e: u8, k: i32, c: Poly) -> Self {
        let mut s = Self::zero();
        s.add_term(e, k, c);
        s
    }

    fn add_term(&mut self, e: u8, k: i32, c: Poly) {
        debug_assert!(e <= 2);
        if c.is_zero() {
            return;
        }
        if e == 2 {
            // cos^2 = 1 - sin^2
            self.add_term(0, k - 2, -&c);
            self.add_term(0, k, c);
            return;
        }
        let slot = self.terms.entry((e, k)).or_default();
        *slot += &c;
        if slot.is_zero() {
            self.terms.remove(&(e, k));
        }
    }

    pub fn coefficient(&self, e: u8, k: i32) -> Poly {
        self.terms.get(&(e, k)).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u8, i32, &Poly)> {
        self.terms.iter().map(|(&(e, k), c)| (e, k, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, k, c) in other.terms() {
            out.add_term(e, k, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(key, c)| (*key, -c)).collect(),
        }
    }

    pub fn scale(&self, c: &Poly) -> Self {
        let mut out = Self::zero();
        for (e, k, v) in self.terms() {
            out.add_term(e, k, v * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (e1, k1, c1) in self.terms() {
            for (e2, k2, c2) in other.terms() {
                out.add_term(e1 + e2, k1 + k2, c1 * c2);
            }
        }
        out
    }

    /// `d/dphi`, using `d(sin^-k) = -k cos sin^-(k+1)` and
    /// `d(cos sin^-k) = (k-1) sin^-(k-1) - k sin^-(k+1)`.
    pub fn derivative(&self) -> Self {
        let mut out = Self::zero();
        for (e, k, c) in self.terms() {
            let kk = Rational::from_integer(k.into());
            if e == 0 {
                out.add_term(1, k + 1, c.scale(&-kk));
            } else {
                out.add_term(0, k - 1, c.scale(&(kk.clone() - Rational::one())));
                out.add_term(0, k + 1, c.scale(&-kk));
            }
        }
        out
    }

    /// Multiply by `sin^-1`.
    pub fn div_sin(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(&(e, k), c)| ((e, k + 1), c.clone())).collect(),
        }
    }

    /// `(1 / i pi)` times the contour integral, as an exact polynomial in `(E, A)`.
    pub fn residue_sum(&self) -> Poly {
        let mut out = Poly::zero();
        for (e, k, c) in self.terms() {
            let r = residue_integral(e, k);
            if !r.is_zero() {
                out += &c.scale(&r);
            }
        }
        out
    }

    /// Coefficients evaluated at numeric `(E, A)` for fast evaluation.
    pub fn numeric(&self, energy: f64, a: f64) -> NumericTrigSum {
        let values = [energy, a, 0.0, 0.0, 0.0];
        NumericTrigSum {
            terms: self.terms().map(|(e, k, c)| (e, k, c.eval_f64(values))).collect(),
        }
    }

    /// Serializable form with exact numerators and denominators.
    pub fn to_table(&self) -> Vec<TrigTerm> {
        self.terms()
            .map(|(e, k, c)| TrigTerm { cos_power: e, inv_sin_power: k, coefficient: c.clone() })
            .collect()
    }

    pub fn from_table(table: &[TrigTerm]) -> Self {
        let mut out = Self::zero();
        for t in table {
            out.add_term(t.cos_power, t.inv_sin_power, t.coefficient.clone());
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub cos_power: u8,
    pub inv_sin_power: i32,
    pub coefficient: Poly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NumericTrigSum {
    pub terms: Vec<(u8, i32, f64)>,
}

impl NumericTrigSum {
    pub fn eval(&self, phi: Complex64) -> Complex64 {
        let s = phi.sin();
        let c = phi.cos();
        let inv = s.inv();
        self.terms
            .iter()
            .map(|&(e, k, coef)| {
                let base = if k >= 0 { inv.powi(k) } else { s.powi(-k) };
                let v = if e == 1 { base * c } else { base };
                v * coef
            })
            .sum()
    }

    pub fn eval_real(&self, phi: f64) -> f64 {
        self.eval(Complex64::new(phi, 0.0)).re
    }
}

/// `(2n-1)!! / (2n)!!`.
pub fn double_factorial_ratio(n: u32) -> Rational {
    let mut r = Rational::one();
    for j in 1..=n as i64 {
        r *= rat(2 * j - 1, 2 * j);
    }
    r
}

/// Contour integral of `cos^e / sin^k` in units of `i pi`.
///
/// `1/sin^{2n+1}` gives `(2n-1)!!/(2n)!!`, `cos/sin` gives 1; every other term has a
/// single-valued antiderivative and contributes nothing.
pub fn residue_integral(e: u8, k: i32) -> Rational {
    match (e, k) {
        (1, 1) => Rational::one(),
        (0, k) if k > 0 && k % 2 == 1 => double_factorial_ratio(((k - 1) / 2) as u32),
        _ => Rational::zero(),
    }
}

static RICCATI: Mutex<Vec<TrigLaurentSum>> = Mutex::new(Vec::new());

/// Riccati orders `v_{-1}, v_0, ..., v_L` (index `l + 1` holds `v_l`), symbolic in `(E, A)`.
pub fn riccati_orders(max_order: usize) -> Vec<TrigLaurentSum> {
    let mut cache = RICCATI.lock().unwrap_or_else(|e| e.into_inner());
    if cache.is_empty() {
        cache.push(TrigLaurentSum::term(0, -1, Poly::int(-1)));
        cache.push(TrigLaurentSum::term(1, 1, Poly::ratio(-1, 2)));
    }
    while cache.len() < max_order + 2 {
        let m = cache.len() - 2; // compute v_{m+1}
        let v = |l: usize| &cache[l + 1];
        let mut acc = v(m).derivative();
        for i in 0..=m {
            let j = m - i;
            if i > j {
                break;
            }
            let prod = v(i).mul(v(j));
            acc = acc.add(&prod);
            if i != j {
                acc = acc.add(&prod);
            }
        }
        if m == 0 {
            // subtract (-A cos - E)
            acc = acc.add(&TrigLaurentSum::term(1, 0, Poly::var(Var::A)));
            acc = acc.add(&TrigLaurentSum::term(0, 0, Poly::var(Var::Energy)));
        }
        // divide by -2 v_{-1} = 2 sin, then negate: -(acc) / (-2 sin) = acc / (2 sin)
        let next = acc.div_sin().scale(&Poly::ratio(1, 2));
        cache.push(next);
    }
    cache[..max_order + 2].to_vec()
}

/// `v_l` for `l >= -1`.
pub fn riccati_order(l: i32) -> TrigLaurentSum {
    let orders = riccati_orders((l + 1).max(0) as usize);
    orders[(l + 1) as usize].clone()
}

/// Exact `(1 / i pi) int_{C_0} v_l dphi` for `l = -1..=L`, keyed by `l`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentSeries {
    pub integrals: BTreeMap<i32, Poly>,
}

impl ExponentSeries {
    pub fn generate(max_order: usize) -> Self {
        let orders = riccati_orders(max_order);
        let integrals = orders
            .iter()
            .enumerate()
            .map(|(i, v)| (i as i32 - 1, v.residue_sum()))
            .collect();
        Self { integrals }
    }

    pub fn at(&self, l: i32) -> Poly {
        self.integrals.get(&l).cloned().unwrap_or_default()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    /// Sign of `B^{1/2}` in the expansion.
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MuValue {
    pub mu: f64,
    pub series: ExponentSeries,
    /// Contribution of each order `l`, already weighted by `(+-B^{1/2})^{-l}`.
    pub contributions: Vec<(i32, f64)>,
}

/// `mu(E) = (1/i pi) sum_l int v_l / (+-B^{1/2})^l` through order `order`.
///
/// The plus branch gives `mu`, the minus branch `-(mu + 1)`.
pub fn mu_of_energy(p: &PendulumParams, energy: f64, order: usize, branch: Branch) -> MuValue {
    let series = ExponentSeries::generate(order);
    let s = branch.sign() * p.b.sqrt();
    let point = Point::new().with(Var::Energy, energy).with(Var::A, p.a);
    let contributions: Vec<(i32, f64)> = series
        .integrals
        .iter()
        .map(|(&l, poly)| (l, poly.eval(&point) * s.powi(-l)))
        .collect();
    MuValue {
        mu: contributions.iter().map(|c| c.1).sum(),
        series,
        contributions,
    }
}

static ENERGY_COEFFS: Mutex<Vec<Poly>> = Mutex::new(Vec::new());

/// Coefficients `e_j(mu_tilde, A)` of `E = sum_j e_j B^{(1-j)/2}`, from formal reversion of
/// `mu(E)`; `e_j` needs Riccati orders up to `2j + 1`.
pub fn energy_coefficients(count: usize) -> Vec<Poly> {
    let mut cache = ENERGY_COEFFS.lock().unwrap_or_else(|e| e.into_inner());
    if cache.len() < count {
        *cache = revert(count);
    }
    cache[..count].to_vec()
}

fn series_mul(a: &[Poly], b: &[Poly], len: usize) -> Vec<Poly> {
    let mut out = vec![Poly::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += &(x * y);
        }
    }
    out
}

/// Coefficients of `t^0..t^{len-1}` of `sum_l sum_d c_{l,d} t^{l-d} eps^d` with `t = B^{-1/2}`.
fn mu_tilde_series(eps: &[Poly], len: usize, exponents: &ExponentSeries) -> Vec<Poly> {
    let max_l = 2 * len as i32 - 1;
    let mut powers: Vec<Vec<Poly>> = vec![{
        let mut one = vec![Poly::zero(); len];
        one[0] = Poly::one();
        one
    }];
    let mut out = vec![Poly::zero(); len];
    for l in 1..=max_l {
        let r = exponents.at(l);
        if r.is_zero() {
            continue;
        }
        for d in 0..=r.degree(Var::Energy) {
            let c = r.coeff_of(Var::Energy, d);
            if c.is_zero() {
                continue;
            }
            let shift = l - d as i32;
            if shift < 0 || shift as usize >= len {
                continue;
            }
            while powers.len() <= d as usize {
                let next = series_mul(powers.last().unwrap(), eps, len);
                powers.push(next);
            }
            for (i, coef) in powers[d as usize].iter().enumerate() {
                let at = i + shift as usize;
                if at < len && !coef.is_zero() {
                    out[at] += &(&c * coef);
                }
            }
        }
    }
    out
}

fn revert(count: usize) -> Vec<Poly> {
    let exponents = ExponentSeries::generate(2 * count - 1);
    let mut e: Vec<Poly> = Vec::with_capacity(count);
    for j in 0..count {
        let mut eps = e.clone();
        eps.push(Poly::zero());
        let partial = mu_tilde_series(&eps, j + 1, &exponents);
        let target = if j == 0 { Poly::var(Var::MuTilde) } else { Poly::zero() };
        // only the l = 1, d = 1 term carries e_j at order t^j, with weight 1/2
        e.push((&target - &partial[j]).scale(&rat(2, 1)));
    }
    e
}

/// `mu_tilde(E(mu_tilde)) - mu_tilde` through `t^{len-1}`; identically zero for a correct reversion.
pub fn reversion_residual(coefficients: &[Poly]) -> Vec<Poly> {
    let len = coefficients.len();
    let exponents = ExponentSeries::generate(2 * len - 1);
    let mut out = mu_tilde_series(coefficients, len, &exponents);
    out[0] -= &Poly::var(Var::MuTilde);
    out
}

/// `E(mu)` at the `phi = 0` saddle as a series in `B^{1/2}` with `terms` coefficients.
pub fn invert_to_energy(terms: usize) -> HalfPowerSeries {
    HalfPowerSeries::new(Expansion::SqrtB, 1, 1, energy_coefficients(terms))
}

/// Integration path for [`numeric_contour_integral`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub shape: PathShape,
    /// Radius (or half-width) of the detour around `phi = 0`.
    pub radius: f64,
    /// The path runs from `-i Y` to `+i Y`.
    pub half_height: f64,
    /// Bend to the left of the pole (branch cut on `(-pi, 0)`).
    pub bend_left: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathShape {
    Semicircle,
    Rectangle,
}

/// Smallest admissible distance between the path and the pole at the origin.
pub const R_MIN: f64 = 1e-3;

impl Default for PathSpec {
    fn default() -> Self {
        Self { shape: PathShape::Semicircle, radius: 1.0, half_height: 40.0, bend_left: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourIntegral {
    /// Raw integral of the summed integrand.
    pub integral: Complex64,
    /// `integral / (i pi)`.
    pub mu: Complex64,
    pub error: f64,
}

/// Path pieces as maps from a real parameter interval to `(phi, dphi/dt)`.
type Piece = (f64, f64, Box<dyn Fn(f64) -> (Complex64, Complex64)>);

fn pieces(path: &PathSpec) -> Vec<Piece> {
    let i = Complex64::i();
    let r = path.radius;
    let y = path.half_height;
    let side = if path.bend_left { -1.0 } else { 1.0 };
    let mut out: Vec<Piece> = vec![(-y, -r, Box::new(move |t| (i * t, i)))];
    match path.shape {
        PathShape::Semicircle => {
            // theta from -pi/2 through 0 (right) or through -pi (left)
            let (t0, t1) = if path.bend_left { (-PI / 2.0, -3.0 * PI / 2.0) } else { (-PI / 2.0, PI / 2.0) };
            out.push((t0, t1, Box::new(move |t| {
                let z = Complex64::from_polar(r, t);
                (z, i * z)
            })));
        }
        PathShape::Rectangle => {
            let x = side * r;
            out.push((0.0, x, Box::new(move |t| (Complex64::new(t, -r), Complex64::new(1.0, 0.0)))));
            out.push((-r, r, Box::new(move |t| (Complex64::new(x, t), i))));
            out.push((x, 0.0, Box::new(move |t| (Complex64::new(t, r), Complex64::new(1.0, 0.0)))));
        }
    }
    out.push((r, y, Box::new(move |t| (i * t, i))));
    out
}

fn integrate_path(f: &dyn Fn(Complex64) -> Complex64, path: &PathSpec) -> (Complex64, f64) {
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for (t0, t1, map) in pieces(path) {
        let g = |t: f64| {
            let (z, dz) = map(t);
            f(z) * dz
        };
        let r = integrate(g, t0, t1, 1e-12, 1e-14);
        total += r.value;
        err += r.error;
    }
    (total, err)
}

fn check_path(path: &PathSpec) -> Result<()> {
    if path.radius < R_MIN {
        return Err(Error::PathSingularity { distance: path.radius, r_min: R_MIN });
    }
    if path.radius >= PI - R_MIN || path.half_height <= path.radius {
        return Err(Error::Config(format!("path radius {} / height {} invalid", path.radius, path.half_height)));
    }
    Ok(())
}

/// Numerical `(1/i pi) int_C sum_{l=0}^{order} v_l / (+-B^{1/2})^l`.
///
/// `v_{-1} = -sin` integrates to `cos(iY) - cos(-iY) = 0` between the symmetric endpoints
/// and is left out.
pub fn numeric_contour_integral(
    p: &PendulumParams,
    energy: f64,
    order: usize,
    branch: Branch,
    path: &PathSpec,
) -> Result<ContourIntegral> {
    check_path(path)?;
    let s = branch.sign() * p.b.sqrt();
    let orders = riccati_orders(order);
    let numeric: Vec<(NumericTrigSum, f64)> = orders
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, v)| (v.numeric(energy, p.a), s.powi(-(i as i32 - 1))))
        .collect();
    let f = |z: Complex64| numeric.iter().map(|(v, w)| v.eval(z) * *w).sum::<Complex64>();
    let (integral, error) = integrate_path(&f, path);
    Ok(ContourIntegral { integral, mu: integral / Complex64::new(0.0, PI), error })
}

/// Numerical `(1/i pi) int_C v_l` for a single order.
pub fn numeric_order_integral(l: i32, energy: f64, a: f64, path: &PathSpec) -> Result<ContourIntegral> {
    check_path(path)?;
    if l < 0 {
        return Ok(ContourIntegral { integral: Complex64::new(0.0, 0.0), mu: Complex64::new(0.0, 0.0), error: 0.0 });
    }
    let v = riccati_order(l).numeric(energy, a);
    let (integral, error) = integrate_path(&|z| v.eval(z), path);
    Ok(ContourIntegral { integral, mu: integral / Complex64::new(0.0, PI), error })
}

/// Exact value of `(1/i pi) int v_l` at `(E, A)` converted once to `f64`.
pub fn exact_order_integral(l: i32, energy: f64, a: f64) -> f64 {
    let p = riccati_order(l).residue_sum();
    rat_to_f64(&p.eval_exact(&Point::new().with(Var::Energy, energy).with(Var::A, a)))
}

/// JSON document of the Riccati table, keyed by order.
pub fn riccati_table_json(max_order: usize) -> serde_json::Value {
    let orders = riccati_orders(max_order);
    let table: BTreeMap<String, Vec<TrigTerm>> = orders
        .iter()
        .enumerate()
        .map(|(i, v)| (format!("{}", i as i32 - 1), v.to_table()))
        .collect();
    serde_json::to_value(table).expect("serializable table")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e() -> Poly {
        Poly::var(Var::Energy)
    }

    #[test]
    fn first_orders_match_closed_forms() {
        let v = riccati_orders(3);
        assert_eq!(v[0], TrigLaurentSum::term(0, -1, Poly::int(-1)));
        assert_eq!(v[1], TrigLaurentSum::term(1, 1, Poly::ratio(-1, 2)));
        let v1 = &v[2];
        assert_eq!(v1.coefficient(0, 3), Poly::ratio(3, 8));
        let lin = (&Poly::int(1) - &e().scale(&rat(4, 1))).scale(&rat(-1, 8));
        assert_eq!(v1.coefficient(0, 1), lin);
        assert_eq!(v1.coefficient(1, 1), Poly::var(Var::A).scale(&rat(1, 2)));
        assert_eq!(v1.terms().count(), 3);
    }

    #[test]
    fn residue_table() {
        assert_eq!(residue_integral(0, 1), Rational::one());
        assert_eq!(residue_integral(0, 3), rat(1, 2));
        assert_eq!(residue_integral(0, 5), rat(3, 8));
        assert_eq!(residue_integral(1, 1), Rational::one());
        assert_eq!(residue_integral(0, 2), Rational::zero());
        assert_eq!(residue_integral(1, 3), Rational::zero());
        assert_eq!(residue_integral(0, -1), Rational::zero());
    }

    #[test]
    fn zero_point_term() {
        assert_eq!(riccati_order(0).residue_sum(), Poly::ratio(-1, 2));
    }

    #[test]
    fn printed_energy_coefficients() {
        let c = energy_coefficients(3);
        let mt = Poly::var(Var::MuTilde);
        let a = Poly::var(Var::A);
        assert_eq!(c[0], mt.scale(&rat(2, 1)));
        let c1 = &(-&a) - &(&mt.pow(2).scale(&rat(4, 1)) + &Poly::one()).scale(&rat(1, 8));
        assert_eq!(c[1], c1);
        let inner = &(&mt.pow(3).scale(&rat(4, 1)) + &mt.scale(&rat(3, 1))) - &(&a * &mt).scale(&rat(16, 1));
        assert_eq!(c[2], inner.scale(&rat(-1, 32)));
    }

    #[test]
    fn table_json_round_trip() {
        let v = riccati_order(3);
        let json = serde_json::to_string(&v.to_table()).unwrap();
        let back: Vec<TrigTerm> = serde_json::from_str(&json).unwrap();
        assert_eq!(TrigLaurentSum::from_table(&back), v);
    }

    #[test]
    fn too_small_radius_is_rejected() {
        let p = PendulumParams { a: 0.0, b: 100.0 };
        let path = PathSpec { radius: 1e-4, ..PathSpec::default() };
        assert!(matches!(
            numeric_contour_integral(&p, 10.0, 2, Branch::Plus, &path),
            Err(Error::PathSingularity { .. })
        ));
    }
}
