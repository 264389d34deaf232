//! The dimensionless Kapitza potential `u(phi) = -A cos(phi) + B sin^2(phi)`,
//! its parameter maps and classical geometry.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default threshold for the deep-well predicate `mu_tilde <= eps * sqrt(B)`.
pub const DEEP_WELL_EPS: f64 = 0.1;

/// Which stable saddle a localized state sits in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Well {
    Zero,
    Pi,
}

impl Well {
    pub fn center(self) -> f64 {
        match self {
            Well::Zero => 0.0,
            Well::Pi => PI,
        }
    }

    pub fn other(self) -> Well {
        match self {
            Well::Zero => Well::Pi,
            Well::Pi => Well::Zero,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PendulumParams {
    pub a: f64,
    pub b: f64,
}

impl PendulumParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::ParameterDomain(format!("non-finite couplings A={a}, B={b}")));
        }
        if b <= 0.0 {
            return Err(Error::NonPositiveInput("B"));
        }
        Ok(Self { a, b })
    }

    /// The parameters seen from the other saddle: `u(phi + pi; A, B) = u(phi; -A, B)`.
    pub fn mirrored(&self) -> Self {
        Self { a: -self.a, b: self.b }
    }

    /// Parameters as seen by a state living in `well`, with that well moved to the origin.
    pub fn seen_from(&self, well: Well) -> Self {
        match well {
            Well::Zero => *self,
            Well::Pi => self.mirrored(),
        }
    }

    pub fn potential(&self, phi: f64) -> f64 {
        let s = phi.sin();
        -self.a * phi.cos() + self.b * s * s
    }

    /// `2B > |A|`; for `A > 0` this is `B/A > 1/2`, negative `A` swaps the roles of the wells.
    pub fn is_double_well(&self) -> bool {
        2.0 * self.b > self.a.abs()
    }

    pub fn is_deep_well(&self, mu: u32) -> bool {
        self.is_deep_well_with(mu, DEEP_WELL_EPS)
    }

    pub fn is_deep_well_with(&self, mu: u32, eps: f64) -> bool {
        mu as f64 + 0.5 <= eps * self.b.sqrt()
    }

    pub fn summit_height(&self) -> f64 {
        self.b + self.a * self.a / (4.0 * self.b)
    }

    pub fn geometry(&self) -> Result<Geometry> {
        if !self.is_double_well() {
            return Err(Error::NotDoubleWell { ratio: self.b / self.a });
        }
        let cos_s = -self.a / (2.0 * self.b);
        let height = self.summit_height();
        Ok(Geometry {
            summit_cos: cos_s,
            summit_angle: cos_s.acos(),
            summit_height: height,
            depth_zero: height - self.potential(0.0),
            depth_pi: height - self.potential(PI),
        })
    }

    /// Classical turning points around `well`, ordered left to right.
    ///
    /// For the `Pi` well the points are reported on `(0, 2 pi)`.
    pub fn turning_points(&self, energy: f64, well: Well) -> Result<(f64, f64)> {
        let geo = self.geometry()?;
        let bottom = self.potential(well.center());
        if !(energy > bottom && energy < geo.summit_height) {
            return Err(Error::EnergyOutOfRange {
                energy,
                lower: bottom,
                upper: geo.summit_height,
            });
        }
        let f = |phi: f64| self.potential(phi) - energy;
        let s = geo.summit_angle;
        Ok(match well {
            Well::Zero => {
                let r = bisect(f, 0.0, s);
                (-r, r)
            }
            Well::Pi => (bisect(f, PI, s), bisect(f, PI, 2.0 * PI - s)),
        })
    }

    pub fn to_whittaker_hill(&self, energy: f64) -> WhittakerHillParams {
        WhittakerHillParams {
            theta0: 4.0 * energy - 2.0 * self.b,
            theta1: 4.0 * self.a,
            theta2: 2.0 * self.b,
        }
    }

    pub fn from_whittaker_hill(wh: &WhittakerHillParams) -> Result<(Self, f64)> {
        let p = Self::new(wh.theta1 / 4.0, wh.theta2 / 2.0)?;
        Ok((p, (wh.theta0 + wh.theta2) / 4.0))
    }

    pub fn from_physical(q: &PhysicalParams) -> Result<(Self, f64)> {
        q.validate()?;
        let hb2 = q.hbar * q.hbar;
        let m2 = q.mass * q.mass;
        let a = 2.0 * m2 * q.omega0 * q.omega0 * q.length.powi(4) / hb2;
        let b = m2 * q.omega * q.omega * q.z0 * q.z0 * q.length * q.length / (2.0 * hb2);
        let omega_c = 2f64.sqrt() * q.length / q.z0 * q.omega0;
        Ok((Self::new(a, b)?, omega_c))
    }
}

/// Root of `f` on the segment between `inside` (where `f < 0`) and `outside` (where `f > 0`),
/// bisected down to adjacent floats.
fn bisect(f: impl Fn(f64) -> f64, inside: f64, outside: f64) -> f64 {
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
    if f(lo).abs() <= f(hi).abs() {
        lo
    } else {
        hi
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    /// `cos(phi_s) = -A/2B`.
    pub summit_cos: f64,
    /// Summit angle in `(0, pi)`; the other summit is its negative.
    pub summit_angle: f64,
    pub summit_height: f64,
    pub depth_zero: f64,
    pub depth_pi: f64,
}

impl Geometry {
    pub const SADDLES: [f64; 2] = [0.0, PI];
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub mass: f64,
    pub length: f64,
    pub omega0: f64,
    pub omega: f64,
    pub z0: f64,
    pub hbar: f64,
}

impl PhysicalParams {
    fn validate(&self) -> Result<()> {
        let fields = [
            ("mass", self.mass),
            ("length", self.length),
            ("omega0", self.omega0),
            ("omega", self.omega),
            ("z0", self.z0),
            ("hbar", self.hbar),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::NonPositiveInput(name));
            }
        }
        Ok(())
    }
}

/// Coefficients of `psi'' + (theta0 + theta1 cos 2x + theta2 cos 4x) psi = 0`, `x = phi/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhittakerHillParams {
    pub theta0: f64,
    pub theta1: f64,
    pub theta2: f64,
}
