//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent run configuration. `line` is 1-based; 0 means
    /// the problem is file-level (e.g. a required key is missing entirely).
    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    /// Invalid argument to a library constructor.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// p or q left the admissible interval (0, cap] during grid integration.
    #[error("{field} = {value:.6e} outside (0, {cap:.6e}] at node (X = {x:.6}, Y = {y:.6})")]
    PqBoundViolation {
        x: f64,
        y: f64,
        field: &'static str,
        value: f64,
        cap: f64,
    },

    /// A grid field became NaN or infinite during integration.
    #[error("non-finite value in field {field} at node (X = {x:.6}, Y = {y:.6})")]
    NonFiniteField { x: f64, y: f64, field: &'static str },

    /// Requested physical time has no level curve inside the computed domain.
    #[error("time {tau} outside the reachable range [0, {t_max:.6}]")]
    TimeOutOfRange { tau: f64, t_max: f64 },

    /// No grid node has reached the singular threshold max{w, z} >= pi.
    /// Informational: callers typically treat it as "nothing to report".
    #[error("singular set is empty")]
    EmptySingularSet,

    /// A physical-space reference solve exceeded its gradient ceiling.
    #[error("blow-up detected at t = {t:.6}: max |R|, |S| exceeded {ceiling:.3e}")]
    BlowupDetected { t: f64, ceiling: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short stable identifier used in machine-readable reports.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Config { .. } => "Config",
            Error::InvalidParam(_) => "InvalidParam",
            Error::PqBoundViolation { .. } => "PQBoundViolation",
            Error::NonFiniteField { .. } => "NonFiniteField",
            Error::TimeOutOfRange { .. } => "TimeOutOfRange",
            Error::EmptySingularSet => "EmptySingularSet",
            Error::BlowupDetected { .. } => "BlowupDetected",
            Error::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
