//! Spectral analysis of the quantum Kapitza pendulum,
//! `psi'' + (E - u(phi)) psi = 0` with `u(phi) = -A cos(phi) + B sin^2(phi)`.
//!
//! * [`potential`]: the potential, parameter maps and classical geometry.
//! * [`oracle`]: Fourier-matrix and monodromy ground truth.
//! * [`contour`]: exact Riccati integrands, residue calculus and series reversion.
//! * [`series`]: closed-form eigenvalue series for rotating and oscillatory states.
//! * [`wavefn`]: barrier and well wavefunctions, parabolic cylinder functions.
//! * [`tunneling`]: the two-level tunneling model.
//! * [`cli`]: the command implementations behind the `kapitza` binary.

pub mod cli;
pub mod contour;
pub mod error;
pub mod exact;
pub mod ode;
pub mod oracle;
pub mod potential;
pub mod quadrature;
pub mod series;
pub mod tunneling;
pub mod wavefn;

pub use error::{Error, Result};
pub use potential::{PendulumParams, Well};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
