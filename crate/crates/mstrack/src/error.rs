//! Error taxonomy shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Degenerate or inconsistent geometry (zero-length elements, flipped
    /// triangles, mismatched connectivity).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Invalid configuration (bad mesh parameters, shapes outside the
    /// domain, malformed experiment specs).
    #[error("config error: {0}")]
    Config(String),

    /// Point-location query outside the computational domain.
    #[error("point ({x:.6}, {y:.6}) lies outside the computational domain")]
    OutsideDomain { x: f64, y: f64 },

    /// Function evaluated outside its mathematical domain (zero direction
    /// for an energy density, time past extinction).
    #[error("domain error: {0}")]
    Domain(String),

    /// Sparse factorization or solve failure.
    #[error("linear solver failed: {0}")]
    Solver(String),

    /// Fixed-point iteration exhausted its iteration budget.
    #[error("fixed-point iteration did not converge: residual {residual:.3e} after {iterations} iterations")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
