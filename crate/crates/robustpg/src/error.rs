//! Error type shared by every module in the crate.
//!
//! Variants are grouped by how a caller should react:
//!
//! * [`Error::Domain`] / [`Error::Dimension`] — the inputs are outside the
//!   range an operation is defined on (means off the unit cube, a value
//!   profile of the wrong length, a mean vector a solver family does not
//!   cover). Retrying with the same inputs cannot succeed.
//! * [`Error::NoSolution`] — the inputs are plausible but the parameter
//!   system has no root in its bracket (e.g. a mean vector below the
//!   feasibility frontier of the N-agent family).
//! * [`Error::Bracket`] / [`Error::NonConvergence`] / [`Error::Quadrature`] —
//!   numerical machinery failed; these indicate either a caller-supplied
//!   bracket that does not straddle the target or a genuinely hostile
//!   integrand, and are bugs when raised from inside the crate's own solvers.
//! * [`Error::Degenerate`] — the requested quantity does not exist at a
//!   boundary parameter (e.g. a dual certificate with an infinite
//!   multiplier when a mean sits exactly at 1).
//! * [`Error::Unsupported`] — the operation is meaningful only for another
//!   mechanism kind (e.g. the common provision probability of an
//!   excludable mechanism).

/// Crate-wide error enum.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Value profile or mean vector of the wrong length.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// The parameter system has no solution for these inputs.
    #[error("no solution: {0}")]
    NoSolution(String),

    /// A root-finding bracket does not straddle its target.
    #[error("bracket does not straddle the target: {0}")]
    Bracket(String),

    /// An iterative routine hit its iteration cap before converging.
    #[error("iteration limit reached: {0}")]
    NonConvergence(String),

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),

    /// The requested quantity degenerates at this parameter (division by a
    /// vanishing scale, an infinite multiplier, ...).
    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    /// Operation not defined for this mechanism kind.
    #[error("unsupported operation for this mechanism kind: {0}")]
    Unsupported(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
