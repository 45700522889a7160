//! Eigenvalue tests for membership in commutator subspaces of operator ideals.
//!
//! The crate works at desk scale: compact operators are stood in for by dense
//! complex matrices, and infinite singular value or eigenvalue sequences are
//! either finite lists with a zero tail or symbolic decay laws.
//!
//! * [`spectral`]: eigenvalue and singular value sequences and their ordering
//!   conventions.
//! * [`cutoffs`]: the smooth step `phi`, its convex corrector `psi`, and the
//!   functions `g` and `h` built from them.
//! * [`functionals`]: the threshold functionals `nu`, `mu`, `chi`, `chi_phi`,
//!   generic `f_hat` and the circle mean.
//! * [`ideals`]: ideal families, membership, Cesaro means and the sequence
//!   transforms used for geometric stability.
//! * [`criterion`]: the Cesaro criterion for commutator-subspace membership with
//!   constructive witnesses.
//! * [`verify`]: seeded randomized suites checking every inequality.

pub mod criterion;
pub mod cutoffs;
mod error;
pub mod functionals;
pub mod ideals;
pub mod io;
pub(crate) mod numeric;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use nalgebra::Complex;

/// Complex scalar used throughout.
pub type C64 = Complex<f64>;

/// Schema tag embedded in every emitted JSON document.
pub const SCHEMA_VERSION: &str = "commspec/v1";
