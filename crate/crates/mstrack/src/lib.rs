//! Front-tracking finite element solver for the two-sided Mullins-Sekerka
//! problem in two dimensions.
//!
//! The interface is a polygonal curve moving through a fixed square domain
//! while a harmonic bulk field, whose interface trace equals the discrete
//! curvature, drives the normal velocity through its normal-derivative jump.
//! The flow preserves the enclosed area and decreases the interface energy;
//! the solver reproduces both properties discretely:
//!
//! * [`curve`]: polygonal interfaces, normals, averaged normals, lumped
//!   inner products, enclosed volume, mesh-quality diagnostics.
//! * [`bulk`]: adaptive conforming triangulation of the square domain with
//!   a piecewise-linear nodal space, stiffness assembly and point location.
//! * [`coupling`]: unfitted bulk-surface assembly (the curve moves
//!   independently of the bulk mesh), with a vertex-lumped and an exactly
//!   integrated variant.
//! * [`anisotropy`]: weighted surface energies built from symmetric positive
//!   definite quadratic forms, their gradients and stable discrete forms.
//! * [`linsolve`]: sparse matrix plumbing and the monolithic direct solve of
//!   the coupled step system.
//! * [`stepper`]: the linear one-step scheme, the volume-conserving
//!   fixed-point scheme, the time loop and per-step diagnostics.
//! * [`reference`]: exact concentric-circles solution and error norms.
//! * [`convergence`]: the refinement ladder used by the convergence study.
//! * [`io`]: plain-text snapshot and CSV emission.

pub mod anisotropy;
pub mod bulk;
pub mod convergence;
pub mod coupling;
pub mod curve;
pub mod error;
pub mod geom;
pub mod io;
pub mod linsolve;
pub mod reference;
pub mod stepper;

pub use error::{Error, Result};
