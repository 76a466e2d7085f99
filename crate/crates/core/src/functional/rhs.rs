use serde::{Deserialize, Serialize};

use super::{beta, c_gamma, d_gamma};
use crate::error::{Error, Result};
use crate::operator::{BlockJacobiOperator, JacobiOperator};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhsBreakdown {
    pub offdiag_term: f64,
    pub potential_term: f64,
    pub total: f64,
}

impl RhsBreakdown {
    pub fn from_terms(potential_term: f64, offdiag_term: f64) -> Self {
        Self::new(potential_term, offdiag_term)
    }

    fn new(potential_term: f64, offdiag_term: f64) -> Self {
        Self {
            offdiag_term,
            potential_term,
            total: potential_term + offdiag_term,
        }
    }

    fn scaled(self, c: f64) -> Self {
        Self::new(c * self.potential_term, c * self.offdiag_term)
    }
}

/// Right-hand sides available for scalar operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhsKind {
    Final,
    HsMain,
    Hs1,
    Hs2,
    OrderAlpha,
}

fn power_sums(op: &JacobiOperator, p: f64) -> (f64, f64) {
    let pot = op.b_window().iter().map(|b| b.abs().powf(p)).sum();
    let off = 4.0 * op.a_window().iter().map(|a| (a + 1.0).abs().powf(p)).sum::<f64>();
    (pot, off)
}

/// Named right-hand side of a scalar inequality.
///
/// `free_offdiag_form` selects the sharper constants valid when `a = -1`
/// identically (`d_gamma` for `hs1`, no `3^(gamma - 1/2)` for `hs2`); it is
/// rejected for operators with other off-diagonals. `orderalpha` always
/// requires `a = -1`.
pub fn rhs_scalar(op: &JacobiOperator, kind: RhsKind, gamma: Option<f64>, free_offdiag_form: bool) -> Result<RhsBreakdown> {
    if free_offdiag_form && !op.has_free_offdiagonal() {
        return Err(Error::DomainError("free off-diagonal form needs a = -1 everywhere".into()));
    }
    let need_gamma = || -> Result<f64> {
        let g = gamma.ok_or_else(|| Error::DomainError(format!("{kind:?} needs gamma")))?;
        if !(g >= 0.5) || !g.is_finite() {
            return Err(Error::DomainError(format!("gamma must be at least 1/2, got {g}")));
        }
        Ok(g)
    };
    match kind {
        RhsKind::Final => {
            let off = 2.0
                * op.a_window()
                    .iter()
                    .map(|&a| {
                        let t = (a - 1.0) * (a + 1.0);
                        t - t.ln_1p()
                    })
                    .sum::<f64>();
            Ok(RhsBreakdown::new(op.sum_b_sq(), off))
        }
        RhsKind::HsMain => {
            let (pot, off) = power_sums(op, 1.0);
            Ok(RhsBreakdown::new(pot, off))
        }
        RhsKind::Hs1 => {
            let g = need_gamma()?;
            let (pot, off) = power_sums(op, g + 0.5);
            let c = if free_offdiag_form { d_gamma(g) } else { c_gamma(g) };
            Ok(RhsBreakdown::new(pot, off).scaled(c))
        }
        RhsKind::Hs2 => {
            let g = need_gamma()?;
            let (pot, off) = power_sums(op, g + 0.5);
            let c = if free_offdiag_form { 1.0 } else { 3f64.powf(g - 0.5) };
            Ok(RhsBreakdown::new(pot, off).scaled(c))
        }
        RhsKind::OrderAlpha => {
            let g = need_gamma()?;
            if !(g > 0.5) {
                return Err(Error::DomainError("orderalpha needs gamma > 1/2".into()));
            }
            if !op.has_free_offdiagonal() {
                return Err(Error::DomainError("orderalpha is stated for a = -1 only".into()));
            }
            let (pot, _) = power_sums(op, g + 0.5);
            Ok(RhsBreakdown::new(beta(g - 0.5, 2.0) * pot, 0.0))
        }
    }
}

/// `sum tr B^2 + 2 sum [tr(A A^* - I) - log det(A A^*)]`, evaluated per
/// eigenvalue of `A A^*` so that each term is visibly nonnegative.
pub fn rhs_block(op: &BlockJacobiOperator) -> RhsBreakdown {
    let off = 2.0
        * op.a_window()
            .iter()
            .map(|a| {
                let (vals, _) = (a * &a.adjoint()).hermitian_eigen();
                vals.iter().map(|&x| (x - 1.0) - (x - 1.0).ln_1p()).sum::<f64>()
            })
            .sum::<f64>();
    RhsBreakdown::new(op.sum_tr_b_sq(), off)
}

/// `sum tr |B|^p` over the window.
pub fn rhs_block_power(op: &BlockJacobiOperator, p: f64) -> RhsBreakdown {
    let pot = op
        .b_window()
        .iter()
        .map(|b| b.hermitian_eigen().0.iter().map(|x| x.abs().powf(p)).sum::<f64>())
        .sum();
    RhsBreakdown::new(pot, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMat;

    #[test]
    fn free_operator_is_zero() {
        let op = JacobiOperator::free();
        for kind in [RhsKind::Final, RhsKind::HsMain, RhsKind::Hs1, RhsKind::Hs2, RhsKind::OrderAlpha] {
            assert_eq!(rhs_scalar(&op, kind, Some(1.0), false).unwrap().total, 0.0);
        }
        assert_eq!(rhs_block(&BlockJacobiOperator::free(2)).total, 0.0);
    }

    #[test]
    fn delta_hsmain() {
        let op = JacobiOperator::new(0, vec![-1.0], vec![-2.5]).unwrap();
        assert_eq!(rhs_scalar(&op, RhsKind::HsMain, None, false).unwrap().total, 2.5);
    }

    #[test]
    fn diagonal_block_offdiag_term() {
        let a = CMat::from_real_diag(&[-1.2, -0.9]);
        let op = BlockJacobiOperator::new(0, 2, vec![a], vec![CMat::zeros(2)]).unwrap();
        let r = rhs_block(&op);
        let expected = 2.0 * ((0.44 - 1.44f64.ln()) + (-0.19 - 0.81f64.ln()));
        assert!((r.offdiag_term - expected).abs() < 1e-14);
        assert!((r.offdiag_term - 0.192_155_835_455_486_6).abs() < 1e-13);
    }

    #[test]
    fn block_of_scalar_matches_final() {
        let op = JacobiOperator::new(-1, vec![-0.7, -1.3, -1.0], vec![0.2, -0.4, 1.1]).unwrap();
        let s = rhs_scalar(&op, RhsKind::Final, None, false).unwrap();
        let b = rhs_block(&op.to_block());
        assert!((s.total - b.total).abs() < 1e-12);
    }

    #[test]
    fn free_form_requires_free_offdiagonal() {
        let op = JacobiOperator::new(0, vec![-0.7], vec![0.2]).unwrap();
        assert!(rhs_scalar(&op, RhsKind::Hs1, Some(1.0), true).is_err());
    }
}
