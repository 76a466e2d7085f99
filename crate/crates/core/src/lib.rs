//! Spectral toolkit for Lieb-Thirring type inequalities of Jacobi operators:
//! discrete spectra outside `[-2, 2]`, the commutation method that removes
//! eigenvalues one at a time, the Lieb-Thirring functionals, and the
//! continuum limit of discretized Schrodinger operators.

pub mod cli;
pub mod commutation;
pub mod continuum;
pub mod eigen;
pub mod error;
pub mod functional;
pub mod linalg;
pub mod operator;
pub mod verify;

pub use error::{Error, Result};
