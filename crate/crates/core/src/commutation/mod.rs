//! Commutation steps that remove the extreme eigenvalue of a Jacobi operator
//! and chains that remove all of them while tracking the sum identities.

mod matrix;
mod scalar;

use serde::{Deserialize, Serialize};

pub use matrix::{eliminate_all_block, matrix_cut, matrix_step, BlockChainReport, CutReport, RiccatiChain, TraceLimit};
pub use scalar::{commute_with_solution, eliminate_all, eliminate_top, scalar_step, ChainReport};

use crate::eigen::{SpectralPoint, SpectrumResult};
use crate::operator::Operator;

/// Identity residuals are accepted below this multiple of the scale.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Absolute tolerance for matching spectra before and after a step.
pub const SPECTRUM_MATCH_TOL: f64 = 1e-7;
/// Identity tolerance for block steps.
pub const MATRIX_IDENTITY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    /// Log form of the product identity.
    pub product: f64,
    /// `1 + size(op) + sum of k^2` for the eigenvalues removed.
    pub scale: f64,
    /// Sum identity for the squared diagonal coefficients.
    pub sum: f64,
}

impl IdentityResiduals {
    pub fn within_tolerance(&self) -> bool {
        self.within(IDENTITY_TOL)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.sum.abs() <= tol * self.scale && self.product.abs() <= tol * self.scale
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutationReport {
    pub identity_residuals: IdentityResiduals,
    pub input_eigenvalue: SpectralPoint,
    /// Spectrum of the transformed operator.
    pub output_spectrum: SpectrumResult,
    /// `true` when the output spectrum equals the input spectrum with the
    /// removed eigenvalue (all copies of it) deleted.
    pub removed_only: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub riccati: Option<RiccatiChain>,
    pub spectrum_mismatch: f64,
    pub transformed: Operator,
}

/// Spectrum of the sign-flipped operator.
fn flip_spectrum(s: &SpectrumResult) -> crate::error::Result<SpectrumResult> {
    let mut out = s.clone();
    out.points = s
        .points
        .iter()
        .map(|p| SpectralPoint::from_lambda(-p.lambda, p.multiplicity))
        .collect::<crate::error::Result<_>>()?;
    Ok(out)
}

/// Compares `after` with `before` minus `copies` copies of `lambda`.
fn spectrum_shrinks(before: &SpectrumResult, after: &SpectrumResult, lambda: f64, copies: usize) -> (bool, f64) {
    let mut expected = before.expanded();
    for _ in 0..copies {
        let Some(pos) = expected
            .iter()
            .enumerate()
            .min_by(|x, y| (x.1 - lambda).abs().total_cmp(&(y.1 - lambda).abs()))
            .map(|(i, _)| i)
        else {
            return (false, f64::INFINITY);
        };
        expected.remove(pos);
    }
    let got = after.expanded();
    if got.len() != expected.len() {
        return (false, f64::INFINITY);
    }
    let mismatch = got
        .iter()
        .zip(&expected)
        .map(|(x, y)| (x - y).abs() / x.abs().max(1.0))
        .fold(0.0, f64::max);
    (mismatch <= SPECTRUM_MATCH_TOL, mismatch)
}
