//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Errors produced by weight evaluation, assembly, evolution and analysis.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument is outside the documented range of an operation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A point lies outside the open domain interval of a weight spec.
    #[error("point {point} outside open domain ({lo}, {hi})")]
    OutsideDomain { point: f64, lo: f64, hi: f64 },

    /// A weight spec violates a structural requirement (positivity, finite
    /// total mass, catalog domain).
    #[error("unsupported weight spec: {0}")]
    UnsupportedSpec(String),

    /// A mass integral diverges where a finite value is required.
    #[error("infinite measure: {0}")]
    InfiniteMeasure(String),

    /// Operator assembly failed (e.g. a cell with infinite mass).
    #[error("assembly error: {0}")]
    Assembly(String),

    /// A nonlinear solve did not reach the requested residual.
    #[error("implicit step failed: {0}")]
    StepFailure(String),

    /// Time stepping aborted after exhausting the dt-halving retries.
    #[error("evolution failed at t={t}: {reason}")]
    EvolveFailure { t: f64, reason: String },

    /// An iterative eigenvalue or optimization routine did not converge.
    #[error("no convergence after {iterations} iterations: {reason}")]
    NoConvergence { iterations: usize, reason: String },

    /// The discrete operator is disconnected, so the first nonzero
    /// eigenvalue is not isolated from the constants.
    #[error("operator disconnected: {0}")]
    Multiplicity(String),

    /// A regression could not be performed on the requested window.
    #[error("fit error: {0}")]
    Fit(String),

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature failure: {0}")]
    Quadrature(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
