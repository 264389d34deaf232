use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("not a double well: B/A = {ratio} must exceed 1/2")]
    NotDoubleWell { ratio: f64 },

    #[error("energy {energy} outside the admissible range ({lower}, {upper})")]
    EnergyOutOfRange { energy: f64, lower: f64, upper: f64 },

    #[error("input `{0}` must be strictly positive")]
    NonPositiveInput(&'static str),

    #[error("eigenvalue {index} not converged: change {change:e} under truncation {truncation} -> {next}")]
    NoConvergence {
        index: usize,
        change: f64,
        truncation: usize,
        next: usize,
    },

    #[error("node count ambiguous on ({start}, {end}) after {refinements} refinements")]
    AmbiguousNode {
        start: f64,
        end: f64,
        refinements: usize,
    },

    #[error("ODE integration failed: {0}")]
    IntegratorFailure(String),

    #[error("weak-coupling Mathieu series is singular for n = {n} (requires n >= 2)")]
    WeakSeriesSingular { n: u32 },

    #[error("contour passes within {distance:e} of the pole at 0 (minimum {r_min:e})")]
    PathSingularity { distance: f64, r_min: f64 },

    #[error("requested order {requested} exceeds the printed table (max {max}); enable recursion")]
    OrderBeyondTable { requested: usize, max: usize },

    #[error("projection onto D_mu is nonzero at order {order}: eigenvalue series inconsistent")]
    GaugeConflict { order: usize },

    #[error("angle {phi} outside the real branch (0, pi) of the canonical coordinate")]
    BranchViolation { phi: f64 },

    #[error("parameter domain violated: {0}")]
    ParameterDomain(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
