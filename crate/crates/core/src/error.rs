use thiserror::Error;

use crate::evolver::Trajectory;
use crate::spectral::{DecayWarning, Representation};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("representation mismatch: expected {expected:?}, found {found:?}")]
    RepresentationMismatch {
        expected: Representation,
        found: Representation,
    },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A ratio or fit whose denominator vanished.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("gauge overflow: max |Re phase| = {max_re_phase:.3e} exceeds {limit}")]
    GaugeOverflow { max_re_phase: f64, limit: f64 },

    #[error("Picard iteration did not converge after {iterations} iterations (last residual {residual:.3e})")]
    PicardDivergence { iterations: usize, residual: f64 },

    #[error("coefficients do not satisfy 2*lambda + conj(mu) = 0")]
    NotSpecialCase,

    #[error("field is not finite at t = {t}")]
    NonFinite { t: f64 },

    #[error("field does not decay at the box edges: {0}")]
    DecayViolation(DecayWarning),

    /// A solver stopped early; `partial` holds every sample recorded before `t`.
    #[error("solve aborted at t = {t}: {source}")]
    SolveAborted {
        t: f64,
        source: Box<Error>,
        partial: Box<Trajectory>,
    },

    #[error("trajectory mismatch: {0}")]
    TrajectoryMismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed dump: {0}")]
    MalformedDump(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
