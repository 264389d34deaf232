//! Independent numerical ground truth for the periodic spectral problem
//! `psi'' + (E - u(phi)) psi = 0`.
//!
//! Two unrelated routes are provided: a Fourier (Hill) matrix diagonalized with a
//! dense symmetric eigensolver, and a monodromy integration giving the Floquet
//! exponent at any real energy.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{dopri5, Tolerance};
use crate::potential::{PendulumParams, Well};

/// Eigenvalues are considered converged when they move less than this under `K -> K + 8`.
pub const CONVERGENCE_TOL: f64 = 1e-10;
pub const CONVERGENCE_STEP: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Sector {
    /// `psi(phi + 2 pi) = psi(phi)`.
    Periodic,
    /// `psi(phi + 2 pi) = -psi(phi)`.
    Antiperiodic,
    /// Bloch offset: `psi = e^{i nu phi} * (2 pi periodic)`.
    Offset(f64),
}

impl Sector {
    pub fn offset(self) -> f64 {
        match self {
            Sector::Periodic => 0.0,
            Sector::Antiperiodic => 0.5,
            Sector::Offset(nu) => nu,
        }
    }

    fn is_real(self) -> bool {
        !matches!(self, Sector::Offset(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierMatrixSpec {
    pub params: PendulumParams,
    pub sector: Sector,
    pub truncation: usize,
}

pub fn default_truncation(b: f64) -> usize {
    ((3.0 * b.sqrt()).ceil() as usize + 20).max(48)
}

impl FourierMatrixSpec {
    pub fn auto(params: PendulumParams, sector: Sector) -> Self {
        Self {
            params,
            sector,
            truncation: default_truncation(params.b),
        }
    }

    fn with_truncation(&self, truncation: usize) -> Self {
        Self { truncation, ..*self }
    }
}

/// Matrix element between plane waves of frequencies `p` and `q`.
fn element(params: &PendulumParams, p: f64, q: f64) -> f64 {
    let d = (p - q).abs();
    if d < 1e-9 {
        p * p + 0.5 * params.b
    } else if (d - 1.0).abs() < 1e-9 {
        -0.5 * params.a
    } else if (d - 2.0).abs() < 1e-9 {
        -0.25 * params.b
    } else {
        0.0
    }
}

/// Pentadiagonal Hill matrix on the basis `e^{i(k + nu) phi}`, `k = -K..=K`.
pub fn build_fourier_matrix(spec: &FourierMatrixSpec) -> DMatrix<f64> {
    let k = spec.truncation as i64;
    let nu = spec.sector.offset();
    let n = (2 * k + 1) as usize;
    DMatrix::from_fn(n, n, |i, j| {
        let p = i as i64 - k;
        let q = j as i64 - k;
        if (p - q).abs() > 2 {
            0.0
        } else {
            element(&spec.params, p as f64 + nu, q as f64 + nu)
        }
    })
}

/// Frequencies spanned by a sector at truncation `K`; symmetric about zero for real sectors.
fn frequencies(sector: Sector, truncation: usize) -> Vec<f64> {
    let k = truncation as i64;
    match sector {
        Sector::Periodic => (-k..=k).map(|j| j as f64).collect(),
        Sector::Antiperiodic => (-k - 1..=k).map(|j| j as f64 + 0.5).collect(),
        Sector::Offset(nu) => (-k..=k).map(|j| j as f64 + nu).collect(),
    }
}

struct Block {
    energies: Vec<f64>,
    vectors: Vec<Vec<f64>>,
}

/// Eigenpairs in ascending order. The eigenvalues are replaced by the Rayleigh quotients of
/// their vectors, whose rounding error scales with the low-frequency entries rather than
/// with the full matrix norm.
fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let eig = SymmetricEigen::new(m.clone());
    let mv = &m * &eig.eigenvectors;
    let rayleigh: Vec<f64> = (0..eig.eigenvalues.len())
        .map(|i| eig.eigenvectors.column(i).dot(&mv.column(i)) / eig.eigenvectors.column(i).norm_squared())
        .collect();
    let mut order: Vec<usize> = (0..rayleigh.len()).collect();
    order.sort_by(|&i, &j| rayleigh[i].total_cmp(&rayleigh[j]));
    let energies = order.iter().map(|&i| rayleigh[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    (energies, vectors)
}

/// Diagonalize one parity block of a real sector; vectors are returned as plane-wave
/// coefficients over `frequencies(sector, K)`.
fn parity_block(params: &PendulumParams, sector: Sector, parity: Parity, truncation: usize) -> Block {
    let freqs = frequencies(sector, truncation);
    let n = freqs.len();
    // Each basis vector: list of (index into freqs, weight).
    let mut basis: Vec<Vec<(usize, f64)>> = Vec::new();
    for (i, &q) in freqs.iter().enumerate() {
        if q < -1e-12 {
            continue;
        }
        let mirror = n - 1 - i;
        if mirror == i {
            if parity == Parity::Even {
                basis.push(vec![(i, 1.0)]);
            }
        } else {
            let s = if parity == Parity::Even { 1.0 } else { -1.0 };
            basis.push(vec![(i, FRAC_1_SQRT_2), (mirror, s * FRAC_1_SQRT_2)]);
        }
    }
    let m = basis.len();
    let h = DMatrix::from_fn(m, m, |a, b| {
        let mut acc = 0.0;
        for &(i, wi) in &basis[a] {
            for &(j, wj) in &basis[b] {
                acc += wi * wj * element(params, freqs[i], freqs[j]);
            }
        }
        acc
    });
    let (energies, small) = sorted_eigen(h);
    let vectors = small
        .into_iter()
        .map(|v| {
            let mut full = vec![0.0; n];
            for (a, comp) in v.iter().enumerate() {
                for &(i, w) in &basis[a] {
                    full[i] += comp * w;
                }
            }
            full
        })
        .collect();
    Block { energies, vectors }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralResult {
    pub params: PendulumParams,
    pub sector: Sector,
    pub truncation: usize,
    /// Plane-wave frequencies `k + nu` indexing every coefficient vector.
    pub frequencies: Vec<f64>,
    pub energies: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// `None` for the generic offset sector.
    pub parities: Vec<Option<Parity>>,
    /// `|E(K) - E(K + 8)|` per eigenvalue.
    pub convergence: Vec<f64>,
}

impl SpectralResult {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn converged(&self, index: usize) -> bool {
        self.convergence[index] < CONVERGENCE_TOL
    }

    /// First unconverged eigenvalue as an error.
    pub fn require_converged(&self) -> Result<()> {
        match (0..self.len()).find(|&i| !self.converged(i)) {
            None => Ok(()),
            Some(index) => Err(Error::NoConvergence {
                index,
                change: self.convergence[index],
                truncation: self.truncation,
                next: self.truncation + CONVERGENCE_STEP,
            }),
        }
    }

    /// Real representative of eigenfunction `index` at `phi` (unnormalized).
    ///
    /// For even states this is `sum c_q cos(q phi)`, for odd states `sum c_q sin(q phi)`;
    /// the sum `sum c_q (cos + sin)` covers both because the other half cancels. In the
    /// generic offset sector it is `Re psi + Im psi`.
    pub fn eval_raw(&self, index: usize, phi: f64) -> f64 {
        self.frequencies
            .iter()
            .zip(&self.vectors[index])
            .map(|(&q, &c)| {
                let (s, co) = (q * phi).sin_cos();
                c * (co + s)
            })
            .sum()
    }
}

/// Lowest `count` eigenpairs of the truncated Hill matrix with a `K -> K + 8` convergence record.
pub fn eigenvalues(spec: &FourierMatrixSpec, count: usize) -> Result<SpectralResult> {
    if spec.truncation < 4 {
        return Err(Error::Config(format!("truncation {} below 4", spec.truncation)));
    }
    let coarse = raw_spectrum(spec);
    let fine = raw_spectrum(&spec.with_truncation(spec.truncation + CONVERGENCE_STEP));
    let count = count.min(coarse.0.len());
    let mut convergence = Vec::with_capacity(count);
    for i in 0..count {
        let (e, parity, rank) = coarse.0[i];
        let partner = fine
            .0
            .iter()
            .filter(|(_, p, _)| *p == parity)
            .find(|(_, _, r)| *r == rank)
            .map(|t| t.0)
            .unwrap_or(f64::INFINITY);
        convergence.push((e - partner).abs());
    }
    let (entries, vectors) = coarse;
    Ok(SpectralResult {
        params: spec.params,
        sector: spec.sector,
        truncation: spec.truncation,
        frequencies: frequencies(spec.sector, spec.truncation),
        energies: entries[..count].iter().map(|t| t.0).collect(),
        vectors: vectors.into_iter().take(count).collect(),
        parities: entries[..count].iter().map(|t| t.1).collect(),
        convergence,
    })
}

type RawSpectrum = (Vec<(f64, Option<Parity>, usize)>, Vec<Vec<f64>>);

fn raw_spectrum(spec: &FourierMatrixSpec) -> RawSpectrum {
    if spec.sector.is_real() {
        let even = parity_block(&spec.params, spec.sector, Parity::Even, spec.truncation);
        let odd = parity_block(&spec.params, spec.sector, Parity::Odd, spec.truncation);
        let mut all: Vec<(f64, Option<Parity>, usize, Vec<f64>)> = Vec::new();
        for (parity, block) in [(Parity::Even, even), (Parity::Odd, odd)] {
            for (rank, (e, v)) in block.energies.into_iter().zip(block.vectors).enumerate() {
                all.push((e, Some(parity), rank, v));
            }
        }
        all.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1 == Some(Parity::Odd)).cmp(&(y.1 == Some(Parity::Odd)))));
        let vectors = all.iter().map(|t| t.3.clone()).collect();
        (all.into_iter().map(|t| (t.0, t.1, t.2)).collect(), vectors)
    } else {
        let (energies, vectors) = sorted_eigen(build_fourier_matrix(spec));
        (
            energies.into_iter().enumerate().map(|(r, e)| (e, None, r)).collect(),
            vectors,
        )
    }
}

/// Energies of one parity block of a real sector, ascending (no convergence record).
pub fn block_energies(params: &PendulumParams, sector: Sector, parity: Parity, truncation: usize) -> Vec<f64> {
    parity_block(params, sector, parity, truncation).energies
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandEdge {
    pub n: usize,
    pub a: f64,
    /// `b_0` does not exist.
    pub b: Option<f64>,
}

/// Band edges `a_n`, `b_n` for `n <= n_max`, labeled by parity block of the periodic sector.
///
/// With `E_j`/`O_j` the ascending even/odd periodic eigenvalues, `a_n = E_n` and
/// `b_n = O_{n-1}` for even `n`, `a_n = O_{n-1}` and `b_n = E_n` for odd `n`. At `A = 0`
/// this is the Mathieu labeling with `h = B/4` after subtracting `B/2`.
pub fn band_edges(params: &PendulumParams, n_max: usize) -> Result<Vec<BandEdge>> {
    let k = default_truncation(params.b).max(n_max + 24);
    let spec = |t| (
        block_energies(params, Sector::Periodic, Parity::Even, t),
        block_energies(params, Sector::Periodic, Parity::Odd, t),
    );
    let (even, odd) = spec(k);
    let (even2, odd2) = spec(k + CONVERGENCE_STEP);
    for (i, (x, y)) in even.iter().zip(&even2).take(n_max + 1).enumerate() {
        if (x - y).abs() >= CONVERGENCE_TOL {
            return Err(Error::NoConvergence { index: i, change: (x - y).abs(), truncation: k, next: k + CONVERGENCE_STEP });
        }
    }
    for (i, (x, y)) in odd.iter().zip(&odd2).take(n_max).enumerate() {
        if (x - y).abs() >= CONVERGENCE_TOL {
            return Err(Error::NoConvergence { index: i, change: (x - y).abs(), truncation: k, next: k + CONVERGENCE_STEP });
        }
    }
    Ok((0..=n_max)
        .map(|n| {
            if n == 0 {
                BandEdge { n, a: even[0], b: None }
            } else if n % 2 == 0 {
                BandEdge { n, a: even[n], b: Some(odd[n - 1]) }
            } else {
                BandEdge { n, a: odd[n - 1], b: Some(even[n]) }
            }
        })
        .collect())
}

/// Samples of eigenfunction `index` on `grid`, normalized to `int_0^{2 pi} psi^2 = 1`
/// (trapezoidal rule on a uniform grid fine enough to be exact for the trigonometric sum).
pub fn eigenfunction_grid(result: &SpectralResult, index: usize, grid: &[f64]) -> Result<Vec<f64>> {
    if index >= result.len() {
        return Err(Error::Config(format!("eigenfunction index {index} out of range {}", result.len())));
    }
    let (scale, sign) = normalization(result, index);
    Ok(grid.iter().map(|&phi| sign * scale * result.eval_raw(index, phi)).collect())
}

/// Closure form of [`eigenfunction_grid`] for refinement-on-demand consumers.
pub fn eigenfunction(result: &SpectralResult, index: usize) -> impl Fn(f64) -> f64 + '_ {
    let (scale, sign) = normalization(result, index);
    move |phi| sign * scale * result.eval_raw(index, phi)
}

fn normalization(result: &SpectralResult, index: usize) -> (f64, f64) {
    let qmax = result.frequencies.iter().fold(0.0f64, |m, q| m.max(q.abs()));
    let n = 4 * (qmax.ceil() as usize) + 64;
    let h = 2.0 * PI / n as f64;
    let mut norm = 0.0;
    let mut peak = 0.0f64;
    for i in 0..n {
        let v = result.eval_raw(index, i as f64 * h);
        norm += v * v * h;
        if v.abs() > peak.abs() {
            peak = v;
        }
    }
    (1.0 / norm.sqrt(), if peak < 0.0 { -1.0 } else { 1.0 })
}

/// Number of sign changes of `f` on `(start, end)`, ignoring samples below
/// `1e-9 * max |f|`. The grid is doubled until two successive counts agree.
pub fn count_nodes(f: impl Fn(f64) -> f64, region: (f64, f64), initial: usize) -> Result<usize> {
    let (start, end) = region;
    let mut n = initial.max(16);
    let mut previous: Option<usize> = None;
    let refinements = 8;
    for _ in 0..refinements {
        let samples: Vec<f64> = (0..=n)
            .map(|i| f(start + (end - start) * i as f64 / n as f64))
            .collect();
        let count = count_sign_changes(&samples);
        if previous == Some(count) {
            return Ok(count);
        }
        previous = Some(count);
        n *= 2;
    }
    Err(Error::AmbiguousNode { start, end, refinements })
}

/// Sign changes in a sample sequence, skipping values below `1e-9 * max |samples|`.
pub fn count_sign_changes(samples: &[f64]) -> usize {
    let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 1e-9 * peak;
    let mut last = 0.0f64;
    let mut changes = 0;
    for &v in samples {
        if v.abs() <= floor {
            continue;
        }
        if last != 0.0 && last.signum() != v.signum() {
            changes += 1;
        }
        last = v;
    }
    changes
}

/// Oracle state assigned to a well.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WellState {
    pub well: Well,
    pub mu: u32,
    /// Index into the periodic [`SpectralResult`].
    pub index: usize,
    pub energy: f64,
    /// Probability in `|phi| < pi/2`.
    pub weight_zero: f64,
}

/// Assign the lowest periodic states to wells by their probability in `|phi| < pi/2`.
///
/// States with weight within 0.25 of one half are shared between the wells (the
/// symmetric case); they go to the well holding fewer states so far, ties to well 0.
pub fn classify_wells(result: &SpectralResult) -> Vec<WellState> {
    let n = 2048;
    let h = 2.0 * PI / n as f64;
    let mut counts = [0u32; 2];
    let mut out = Vec::with_capacity(result.len());
    for index in 0..result.len() {
        let mut inner = 0.0;
        let mut total = 0.0;
        for i in 0..n {
            let phi = -PI + (i as f64 + 0.5) * h;
            let v = result.eval_raw(index, phi);
            let w = v * v;
            total += w;
            if phi.abs() < PI / 2.0 {
                inner += w;
            }
        }
        let weight = inner / total;
        let well = if (weight - 0.5).abs() < 0.25 {
            if counts[1] < counts[0] {
                Well::Pi
            } else {
                Well::Zero
            }
        } else if weight > 0.5 {
            Well::Zero
        } else {
            Well::Pi
        };
        let slot = if well == Well::Zero { 0 } else { 1 };
        out.push(WellState { well, mu: counts[slot], index, energy: result.energies[index], weight_zero: weight });
        counts[slot] += 1;
    }
    out
}

/// Periodic-sector spectrum with the states labeled by well.
pub fn well_spectrum(params: &PendulumParams, count: usize) -> Result<(SpectralResult, Vec<WellState>)> {
    let result = eigenvalues(&FourierMatrixSpec::auto(*params, Sector::Periodic), count)?;
    result.require_converged()?;
    let states = classify_wells(&result);
    Ok((result, states))
}

/// Oracle energy of the `mu`-th state of `well`.
pub fn well_state(params: &PendulumParams, well: Well, mu: u32) -> Result<WellState> {
    let count = 2 * mu as usize + 8;
    let (_, states) = well_spectrum(params, count)?;
    states
        .into_iter()
        .find(|s| s.well == well && s.mu == mu)
        .ok_or_else(|| Error::Config(format!("state mu={mu} not found among the lowest {count}")))
}

/// Floquet exponent from the monodromy matrix over one period.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicExponent {
    /// Half the monodromy trace, `cos(2 pi nu)`.
    pub half_trace: f64,
    /// Reduced exponent with real part in `[0, 1/2]`; imaginary inside gaps.
    pub nu: Complex64,
}

impl CharacteristicExponent {
    pub fn is_real(&self) -> bool {
        self.nu.im == 0.0
    }

    /// The real exponent `n +- Re(nu)` nearest to `guess`.
    pub fn unfold_near(&self, guess: f64) -> f64 {
        let r = self.nu.re;
        let n = guess.round();
        [n - 1.0, n, n + 1.0]
            .iter()
            .flat_map(|&m| [m + r, m - r])
            .min_by(|x, y| (x - guess).abs().total_cmp(&(y - guess).abs()))
            .unwrap()
    }
}

pub fn characteristic_exponent(params: &PendulumParams, energy: f64) -> Result<CharacteristicExponent> {
    let rhs = |phi: f64, y: &[f64; 4]| {
        let w = params.potential(phi) - energy;
        [y[1], w * y[0], y[3], w * y[2]]
    };
    let tol = Tolerance { abs: 1e-12, rel: 1e-12 };
    let y = dopri5(rhs, 0.0, 2.0 * PI, [1.0, 0.0, 0.0, 1.0], tol)?;
    let half_trace = 0.5 * (y[0] + y[3]);
    if !half_trace.is_finite() {
        return Err(Error::IntegratorFailure("non-finite monodromy".into()));
    }
    let two_pi = 2.0 * PI;
    let nu = if half_trace > 1.0 {
        Complex64::new(0.0, half_trace.acosh() / two_pi)
    } else if half_trace < -1.0 {
        Complex64::new(0.5, (-half_trace).acosh() / two_pi)
    } else {
        Complex64::new(half_trace.acos() / two_pi, 0.0)
    };
    Ok(CharacteristicExponent { half_trace, nu })
}

/// Oracle energy of the rotating state with Floquet exponent `nu`, from the Bloch matrix
/// with that offset. When `nu` sits on a band edge (integer or half-integer) the two
/// near-degenerate edge eigenvalues are averaged.
pub fn bloch_energy(params: &PendulumParams, nu: f64) -> Result<f64> {
    let nu = nu.abs();
    let delta = nu - nu.round();
    let trunc = default_truncation(params.b).max(nu.ceil() as usize + 40);
    let spec = FourierMatrixSpec { params: *params, sector: Sector::Offset(delta), truncation: trunc };
    let freqs = frequencies(spec.sector, trunc);
    let below = freqs.iter().filter(|q| q.abs() < nu - 1e-9).count();
    let tied = freqs.iter().filter(|q| (q.abs() - nu).abs() <= 1e-9).count();
    let result = eigenvalues(&spec, below + tied.max(1))?;
    result.require_converged()?;
    let picked = &result.energies[below..below + tied.max(1)];
    Ok(picked.iter().sum::<f64>() / picked.len() as f64)
}
