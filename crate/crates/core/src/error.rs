//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by the solvers, analysis routines, and file formats.
#[derive(Debug, Error)]
pub enum Error {
    /// A thermodynamic quantity left its admissible range (vacuum states are
    /// errors, never clamped).
    #[error("{what} must be positive, got {value:e}")]
    Domain { what: &'static str, value: f64 },

    /// Same as [`Error::Domain`], locating the offending cell.
    #[error("{what} must be positive, got {value:e} at cell ({i}, {j})")]
    DomainAt {
        what: &'static str,
        value: f64,
        i: usize,
        j: usize,
    },

    /// A caller-supplied parameter is out of range or inconsistent.
    #[error("invalid parameter: {0}")]
    Param(String),

    /// An explicit update lost positivity; the caller may retry with a
    /// smaller time step.
    #[error(
        "step rejected: {what} non-positive at cell ({i}, {j}) after update \
         with dt = {dt:e}"
    )]
    StepRejected {
        what: &'static str,
        i: usize,
        j: usize,
        dt: f64,
    },

    /// The driver halved dt the maximum number of times and still could not
    /// complete a step.
    #[error("time-step retry budget exhausted at t = {time:e}")]
    RetryBudgetExhausted { time: f64 },

    /// The Riemann data would generate vacuum (pressure positivity condition
    /// violated); the exact solver does not cover this regime.
    #[error("vacuum forms between the Riemann states: 2c_l/(g-1) + 2c_r/(g-1) <= u_r - u_l")]
    Vacuum,

    /// An iterative solver failed to converge.
    #[error("iteration did not converge within {iters} iterations")]
    NoConvergence { iters: u32 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// A file did not match the expected on-disk format.
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
