//! Error types shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Ring size outside the range supported by the requested backend.
    #[error("ring size {n} outside supported range [{min}, {max}]")]
    SizeOutOfRange { n: usize, min: usize, max: usize },

    /// Mismatched array/matrix shapes.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// An operation required a Hermitian operator and did not get one.
    #[error("operator is not Hermitian: {0}")]
    NotHermitian(String),

    /// Contract violation that is not covered by a more specific variant.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Projector window does not fit on the ring.
    #[error("bubble window of {window} sites does not fit on a ring of {n} sites")]
    WindowTooLarge { window: usize, n: usize },

    /// Requested bubble layout does not fit on the ring.
    #[error("infeasible bubble layout: {0}")]
    Layout(String),

    /// Accidental degeneracy between sector and out-of-sector states.
    #[error("accidental degeneracy with out-of-sector states: {configs:?} at energy {energy}")]
    Degeneracy { configs: Vec<String>, energy: f64 },

    /// Input data outside the domain of an analysis routine.
    #[error("data error: {0}")]
    Data(String),

    /// Empty or invalid parameter/time range.
    #[error("range error: {0}")]
    Range(String),

    /// Time step too coarse for the fastest schedule feature (strict mode).
    #[error("time step {dt} too coarse for schedule feature {feature} (need dt <= feature/10)")]
    Resolution { dt: f64, feature: f64 },

    /// MPS truncation exceeded the configured fidelity budget (strict mode).
    #[error("truncation error {err:.3e} exceeded {limit:.3e} in a single step")]
    Truncation { err: f64, limit: f64 },

    /// Master-equation integrator failed its stability guard.
    #[error("integrator failure: {0}")]
    Integrator(String),

    /// Malformed run configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
