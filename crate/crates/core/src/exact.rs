//! Exact multivariate polynomials with rational coefficients.
//!
//! Every series coefficient in this crate (Riccati integrand orders, residue
//! sums, eigenvalue coefficients, Sips–Meixner tables) is a polynomial in a
//! handful of named symbols. Keeping them exact lets the algebraic identities
//! be checked with `==` instead of tolerances; conversion to `f64` happens
//! once, at evaluation time.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub type Rational = BigRational;

/// Symbols a [`Poly`] may depend on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Var {
    /// Dimensionless energy.
    Energy,
    /// Asymmetry coupling.
    A,
    /// Shifted quantum number `mu + 1/2`.
    MuTilde,
    /// Quantum number `mu`.
    Mu,
    /// Drive coupling.
    B,
}

impl Var {
    pub const ALL: [Var; 5] = [Var::Energy, Var::A, Var::MuTilde, Var::Mu, Var::B];

    fn index(self) -> usize {
        match self {
            Var::Energy => 0,
            Var::A => 1,
            Var::MuTilde => 2,
            Var::Mu => 3,
            Var::B => 4,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Var::Energy => "E",
            Var::A => "A",
            Var::MuTilde => "mt",
            Var::Mu => "mu",
            Var::B => "B",
        }
    }
}

type Monomial = [u32; NVARS];
const NVARS: usize = 5;

/// Rational from a ratio of small integers.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact rational value of a finite float.
pub fn rat_from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

/// Values assigned to the symbols of a [`Poly`]; unassigned symbols are zero.
#[derive(Clone, Debug, Default)]
pub struct Point {
    values: [Option<Rational>; NVARS],
}

impl Point {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: Var, value: f64) -> Self {
        self.values[var.index()] = Some(rat_from_f64(value));
        self
    }

    pub fn with_exact(mut self, var: Var, value: Rational) -> Self {
        self.values[var.index()] = Some(value);
        self
    }

    fn get(&self, idx: usize) -> Rational {
        self.values[idx].clone().unwrap_or_else(Rational::zero)
    }
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term([0; NVARS], c);
        p
    }

    pub fn int(n: i64) -> Self {
        Self::constant(rat(n, 1))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::constant(rat(num, den))
    }

    pub fn var(v: Var) -> Self {
        let mut m = [0; NVARS];
        m[v.index()] = 1;
        let mut p = Self::zero();
        p.add_term(m, Rational::one());
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value if the polynomial has no symbol dependence.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&[0; NVARS]).cloned(),
            _ => None,
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    pub fn degree(&self, v: Var) -> u32 {
        self.terms.keys().map(|m| m[v.index()]).max().unwrap_or(0)
    }

    /// Coefficient of `v^d`, as a polynomial in the remaining symbols.
    pub fn coeff_of(&self, v: Var, d: u32) -> Self {
        let i = v.index();
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if m[i] == d {
                let mut m2 = *m;
                m2[i] = 0;
                out.add_term(m2, c.clone());
            }
        }
        out
    }

    /// Replace every occurrence of `v` by `value`.
    pub fn substitute(&self, v: Var, value: &Poly) -> Self {
        let i = v.index();
        let max = self.degree(v);
        let mut powers = Vec::with_capacity(max as usize + 1);
        powers.push(Poly::one());
        for k in 1..=max as usize {
            let next = &powers[k - 1] * value;
            powers.push(next);
        }
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut m2 = *m;
            let d = m2[i] as usize;
            m2[i] = 0;
            let mut mono = Poly::zero();
            mono.add_term(m2, c.clone());
            out += &(&mono * &powers[d]);
        }
        out
    }

    pub fn eval_exact(&self, at: &Point) -> Rational {
        let vals: Vec<Rational> = (0..NVARS).map(|i| at.get(i)).collect();
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    t *= num_traits::pow(vals[i].clone(), e as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// Exact evaluation at the (exactly representable) float inputs, rounded once.
    pub fn eval(&self, at: &Point) -> f64 {
        rat_to_f64(&self.eval_exact(at))
    }

    /// Plain floating-point evaluation; used in inner loops where exactness is not needed.
    pub fn eval_f64(&self, values: [f64; NVARS]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut t = rat_to_f64(c);
                for (i, &e) in m.iter().enumerate() {
                    if e > 0 {
                        t *= values[i].powi(e as i32);
                    }
                }
                t
            })
            .sum()
    }

    /// Largest absolute coefficient, for growth reports.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms
            .values()
            .map(|c| rat_to_f64(&c.abs()))
            .fold(0.0, f64::max)
    }

    /// Terms as `(exponents, numerator, denominator)` in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (BTreeMap<Var, u32>, &Rational)> {
        self.terms.iter().map(|(m, c)| {
            let exps = Var::ALL
                .iter()
                .filter(|v| m[v.index()] > 0)
                .map(|v| (*v, m[v.index()]))
                .collect();
            (exps, c)
        })
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            if n > 0 {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            } else if neg {
                write!(f, "-")?;
            }
            let abs = c.abs();
            let is_const = m.iter().all(|&e| e == 0);
            if !abs.is_one() || is_const {
                write!(f, "{abs}")?;
                if !is_const {
                    write!(f, "*")?;
                }
            }
            let mut first = true;
            for v in Var::ALL {
                let e = m[v.index()];
                if e == 0 {
                    continue;
                }
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                write!(f, "{}", v.symbol())?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(*m, c.clone());
        }
    }
}

impl SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(*m, -c.clone());
        }
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        self += &rhs;
        self
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(mut self, rhs: Poly) -> Poly {
        self -= &rhs;
        self
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
        }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                let mut m = *m1;
                for (x, y) in m.iter_mut().zip(m2) {
                    *x += y;
                }
                out.add_term(m, c1 * c2);
            }
        }
        out
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl From<Rational> for Poly {
    fn from(c: Rational) -> Self {
        Poly::constant(c)
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct SerializedTerm {
    pub exponents: BTreeMap<Var, u32>,
    pub numerator: String,
    pub denominator: String,
}

impl Serialize for Poly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms: Vec<SerializedTerm> = self
            .terms()
            .map(|(exponents, c)| SerializedTerm {
                exponents,
                numerator: c.numer().to_string(),
                denominator: c.denom().to_string(),
            })
            .collect();
        terms.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let terms = Vec::<SerializedTerm>::deserialize(d)?;
        let mut p = Poly::zero();
        for t in terms {
            let mut m = [0u32; NVARS];
            for (v, e) in t.exponents {
                m[v.index()] = e;
            }
            let num: BigInt = t.numerator.parse().map_err(D::Error::custom)?;
            let den: BigInt = t.denominator.parse().map_err(D::Error::custom)?;
            if den.is_zero() {
                return Err(D::Error::custom("zero denominator"));
            }
            p.add_term(m, Rational::new(num, den));
        }
        Ok(p)
    }
}
