use serde::{Deserialize, Serialize};

use super::{flip_spectrum, spectrum_shrinks, CommutationReport, IdentityResiduals};
use crate::eigen::{
    eigenvalues_outside_band, ground_state, GroundState, Side, SpectralPoint, SpectrumResult, DEFAULT_TOL,
};
use crate::error::{Error, Result};
use crate::functional::k_functional;
use crate::operator::{JacobiOperator, Operator};

/// Commutes `op` with a positive solution `phi` of `(W - lambda) phi = 0`
/// on the sites `first..=last`, returning the new coefficients there.
/// `phi` need not be square summable.
pub fn commute_with_solution(
    op: &JacobiOperator,
    lambda: f64,
    phi: impl Fn(i64) -> f64,
    first: i64,
    last: i64,
) -> Result<JacobiOperator> {
    let ratio = |n: i64| phi(n + 1) / phi(n);
    commute_with_ratios(op, lambda, ratio, &phi, first, last)
}

fn commute_with_ratios(
    op: &JacobiOperator,
    lambda: f64,
    ratio: impl Fn(i64) -> f64,
    phi: impl Fn(i64) -> f64,
    first: i64,
    last: i64,
) -> Result<JacobiOperator> {
    let mut a1 = Vec::new();
    let mut b1 = Vec::new();
    for n in first..=last {
        for m in [n, n + 1, n + 2] {
            let v = phi(m);
            if !(v > 0.0) {
                return Err(Error::PositivityViolation { index: m, value: v });
            }
        }
        let r0 = ratio(n);
        let r1 = ratio(n + 1);
        a1.push(-(op.a(n) * op.a(n + 1) * r1 / r0).sqrt());
        b1.push(-op.a(n) * (1.0 / r0 + r0) + lambda);
    }
    JacobiOperator::new(first, a1, b1)
}

/// Removes the bottom eigenvalue of `op` given its ground state.
pub fn scalar_step(op: &JacobiOperator, gs: &GroundState) -> Result<CommutationReport> {
    let before = eigenvalues_outside_band(op, DEFAULT_TOL)?;
    step_with_spectrum(op, gs, &before)
}

fn step_with_spectrum(op: &JacobiOperator, gs: &GroundState, before: &SpectrumResult) -> Result<CommutationReport> {
    if !gs.point.is_below_band() {
        return Err(Error::DomainError("scalar_step removes an eigenvalue below -2; use eliminate_top".into()));
    }
    if op.is_empty() {
        return Err(Error::NoEigenvalue);
    }
    let lambda = gs.point.lambda;
    let k = gs.point.k;
    let first = op.window_start() - 1;
    let last = op.window_end() - 1;
    let transformed = commute_with_ratios(op, lambda, |n| gs.ratio(n), |n| gs.phi(n), first, last)?;

    let k2 = k * k;
    let sum = transformed.sum_b_sq()
        - (op.sum_b_sq() - (k2 - 1.0 / k2) + 2.0 * (op.sum_a_sq_minus_one() - transformed.sum_a_sq_minus_one()));
    let product = transformed.sum_log_a_sq() - op.sum_log_a_sq() + 2.0 * gs.point.log_k();
    let residuals = IdentityResiduals {
        product,
        scale: 1.0 + op.size_scale() + k2,
        sum,
    };
    if !residuals.within_tolerance() {
        let (identity, residual) = if sum.abs() > product.abs() { ("sum", sum) } else { ("product", product) };
        return Err(Error::IdentityViolation {
            identity,
            residual,
            scale: residuals.scale,
        });
    }
    let after = eigenvalues_outside_band(&transformed, DEFAULT_TOL)?;
    let (removed_only, mismatch) = spectrum_shrinks(before, &after, lambda, 1);
    Ok(CommutationReport {
        identity_residuals: residuals,
        input_eigenvalue: gs.point,
        output_spectrum: after,
        removed_only,
        riccati: None,
        spectrum_mismatch: mismatch,
        transformed: Operator::Scalar(transformed),
    })
}

/// Removes the top eigenvalue through the conjugation `(a, b) -> (a, -b)`.
/// `gs` is the ground state of the top eigenvalue as returned by
/// `ground_state(op, Side::Top)`.
pub fn eliminate_top(op: &JacobiOperator, gs: &GroundState) -> Result<CommutationReport> {
    let before = eigenvalues_outside_band(op, DEFAULT_TOL)?;
    top_with_spectrum(op, gs, &before)
}

fn top_with_spectrum(op: &JacobiOperator, gs: &GroundState, before: &SpectrumResult) -> Result<CommutationReport> {
    if gs.point.is_below_band() {
        return Err(Error::DomainError("eliminate_top expects an eigenvalue above 2".into()));
    }
    let flipped = op.sign_flip_conjugate();
    let mut flipped_gs = gs.clone();
    flipped_gs.point = SpectralPoint::from_lambda(-gs.point.lambda, 1)?;
    for (i, v) in flipped_gs.values.iter_mut().enumerate() {
        if (gs.first_site + i as i64).rem_euclid(2) == 1 {
            *v = -*v;
        }
    }
    let mut report = step_with_spectrum(&flipped, &flipped_gs, &flip_spectrum(before)?)?;
    report.input_eigenvalue = gs.point;
    report.output_spectrum = flip_spectrum(&report.output_spectrum)?;
    if let Operator::Scalar(t) = &report.transformed {
        report.transformed = Operator::Scalar(t.sign_flip_conjugate());
    }
    Ok(report)
}

/// Result of removing every eigenvalue outside `[-2, 2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    /// `RHS - LHS` evaluated directly.
    pub direct_slack: f64,
    /// `sum b_M^2 + 2 sum (a_M^2 - 1 - log a_M^2)` of the final operator; equals
    /// `RHS - LHS` by the accumulated identities and is nonnegative termwise.
    pub certified_slack: f64,
    pub final_operator: Operator,
    /// Residual of the accumulated sum identity.
    pub final_sum_residual: f64,
    /// Residual of the accumulated product identity (log form).
    pub final_product_residual: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub scale: f64,
    pub steps: Vec<CommutationReport>,
}

/// Removes all eigenvalues: bottom ones first (lowest first), then top ones
/// (highest first).
pub fn eliminate_all(op: &JacobiOperator, tol: f64) -> Result<ChainReport> {
    let mut current = op.clone();
    let mut spectrum = eigenvalues_outside_band(op, tol)?;
    let initial_count = spectrum.eigenvalue_count();
    let mut steps: Vec<CommutationReport> = Vec::new();
    let mut ks = Vec::new();
    while let Some(side) = spectrum
        .bottom()
        .map(|_| Side::Bottom)
        .or_else(|| spectrum.top().map(|_| Side::Top))
    {
        if steps.len() > initial_count {
            return Err(Error::ChainStalled {
                step: steps.len(),
                detail: "more steps than eigenvalues".into(),
            });
        }
        let gs = ground_state(&current, side)?;
        let report = match side {
            Side::Bottom => step_with_spectrum(&current, &gs, &spectrum)?,
            Side::Top => top_with_spectrum(&current, &gs, &spectrum)?,
        };
        if !report.removed_only {
            return Err(Error::ChainStalled {
                step: steps.len(),
                detail: format!(
                    "spectrum after removing {} does not match (mismatch {:e})",
                    gs.point.lambda, report.spectrum_mismatch
                ),
            });
        }
        ks.push(gs.point.k);
        spectrum = report.output_spectrum.clone();
        current = match &report.transformed {
            Operator::Scalar(t) => t.trimmed(),
            Operator::Block(_) => unreachable!("scalar chain"),
        };
        steps.push(report);
    }
    let lhs: f64 = ks.iter().map(|&k| k_functional(k)).sum();
    let rhs = op.final_functional();
    let sum_k = ks.iter().map(|&k| k * k - 1.0 / (k * k)).sum::<f64>();
    let log_k = ks.iter().map(|&k| 2.0 * (k.abs() - 1.0).ln_1p()).sum::<f64>();
    let final_sum_residual = current.sum_b_sq()
        - (op.sum_b_sq() - sum_k + 2.0 * (op.sum_a_sq_minus_one() - current.sum_a_sq_minus_one()));
    let final_product_residual = current.sum_log_a_sq() - (op.sum_log_a_sq() - log_k);
    Ok(ChainReport {
        direct_slack: rhs - lhs,
        certified_slack: current.final_functional(),
        final_operator: Operator::Scalar(current),
        final_sum_residual,
        final_product_residual,
        lhs,
        rhs,
        scale: 1.0 + op.size_scale() + ks.iter().map(|k| k * k).sum::<f64>(),
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{make_reflectionless, ReflectionlessSpec};

    #[test]
    fn reflectionless_from_free_operator() {
        for omega in [0.3, 1.0, 2.0] {
            let spec = ReflectionlessSpec {
                omega,
                half_width: Some(12),
            };
            let target = make_reflectionless(&spec).unwrap();
            let built = commute_with_solution(
                &JacobiOperator::free(),
                spec.eigenvalue(),
                |n| (omega * n as f64).cosh(),
                -12,
                12,
            )
            .unwrap();
            for n in -12..=12 {
                assert!((built.a(n) - target.a(n)).abs() < 1e-12);
                assert!((built.b(n) - target.b(n)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reflectionless_step_removes_eigenvalue() {
        let op = make_reflectionless(&ReflectionlessSpec::new(1.0)).unwrap();
        let gs = ground_state(&op, Side::Bottom).unwrap();
        let report = scalar_step(&op, &gs).unwrap();
        assert!(report.removed_only);
        assert!(report.output_spectrum.points.is_empty());
        assert!(report.identity_residuals.sum.abs() < 1e-8);
    }

    #[test]
    fn single_site_identities() {
        let op = JacobiOperator::new(0, vec![-1.0], vec![-3.0]).unwrap();
        let gs = ground_state(&op, Side::Bottom).unwrap();
        assert!((gs.point.k - (13f64.sqrt() + 3.0) / 2.0).abs() < 1e-12);
        let report = scalar_step(&op, &gs).unwrap();
        assert!(report.identity_residuals.sum.abs() < 1e-8 * report.identity_residuals.scale);
        assert!(report.removed_only);
    }

    #[test]
    fn top_elimination() {
        let op = JacobiOperator::new(0, vec![-1.0], vec![3.0]).unwrap();
        let gs = ground_state(&op, Side::Top).unwrap();
        let report = eliminate_top(&op, &gs).unwrap();
        assert!((report.input_eigenvalue.lambda - 13f64.sqrt()).abs() < 1e-12);
        assert!(report.removed_only);
        assert!(report.output_spectrum.points.is_empty());
    }

    #[test]
    fn mixed_chain() {
        let mut b = vec![0.0; 6];
        b[0] = -3.0;
        b[5] = 3.0;
        let op = JacobiOperator::new(0, vec![-1.0; 6], b).unwrap();
        let chain = eliminate_all(&op, 1e-10).unwrap();
        assert_eq!(chain.steps.len(), 2);
        assert!(chain.final_sum_residual.abs() < 1e-7);
        assert!(chain.certified_slack >= 0.0);
        assert!((chain.certified_slack - chain.direct_slack).abs() < 1e-8 * chain.scale);
    }

    #[test]
    fn two_bump_product_identity() {
        let mut b = vec![0.0; 11];
        b[0] = -2.0;
        b[10] = -2.0;
        let op = JacobiOperator::new(0, vec![-1.0; 11], b).unwrap();
        let chain = eliminate_all(&op, 1e-10).unwrap();
        assert_eq!(chain.steps.len(), 2);
        assert!(chain.final_product_residual.abs() < 1e-8);
    }

    #[test]
    fn free_chain_is_empty() {
        let chain = eliminate_all(&JacobiOperator::free(), 1e-9).unwrap();
        assert!(chain.steps.is_empty());
        assert_eq!(chain.lhs, 0.0);
        assert_eq!(chain.final_operator, Operator::Scalar(JacobiOperator::free()));
    }

    #[test]
    fn top_on_free_operator_has_no_eigenvalue() {
        assert_eq!(ground_state(&JacobiOperator::free(), Side::Top).unwrap_err(), Error::NoEigenvalue);
    }
}
