//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Operation undefined at (or too close to) the conical-intersection point.
    #[error("singular point: operation undefined at rho={rho:.3e} (conical intersection)")]
    SingularPoint { rho: f64 },

    /// Generic precondition violation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Gaussian packet support too close to the grid edge.
    #[error("support violation: packet needs {required:.3} a.u. of clearance from every grid edge, has {margin:.3}")]
    SupportViolation { margin: f64, required: f64 },

    /// Expectation value requested of a field with zero norm.
    #[error("zero-norm field: expectation values undefined")]
    ZeroNorm,

    /// Propagation produced a non-finite value.
    #[error("non-finite {what} at t={t}")]
    NonFinite { t: f64, what: &'static str },

    /// Series lacks a channel required by the requested analysis.
    #[error("missing channel '{name}'")]
    MissingChannel { name: String },

    /// Too few samples in the requested fit window.
    #[error("insufficient samples: found {found}, need at least {required}")]
    InsufficientSamples { found: usize, required: usize },

    /// Too few positive samples for a log-log fit.
    #[error("non-positive data: only {found} positive samples in window, need at least {required}")]
    NonPositiveData { found: usize, required: usize },

    /// Series comparison with no common time range.
    #[error("series have no overlapping time range")]
    EmptyOverlap,

    /// Ensemble integration failures.
    #[error("{failed} of {total} trajectories failed to integrate")]
    TrajectoryFailures { failed: usize, total: usize },

    /// Config text that does not parse.
    #[error("config syntax error at line {line}: {msg}")]
    ConfigSyntax { line: usize, msg: String },

    /// Config value violating a module precondition.
    #[error("config domain error for '{key}': {msg}")]
    ConfigDomain { key: String, msg: String },

    /// Config key that no module defines.
    #[error("unknown config key '{key}' at line {line}")]
    UnknownKey { line: usize, key: String },

    /// CLI argument naming a preset that does not exist.
    #[error("unknown preset '{name}'")]
    UnknownPreset { name: String },

    /// Malformed CSV being read back.
    #[error("csv format error at line {line}: {msg}")]
    CsvFormat { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
